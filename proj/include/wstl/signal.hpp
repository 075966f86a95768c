#pragma once

#include <Eigen/Core>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace wstl {

/// Raised when evaluation hits a semantic problem (missing channel, short
/// signal, missing weight, ...).
class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Referenced channel absent from the signal; mapped to its own exit code by
/// the CLI.
class MissingChannelError : public EvalError {
public:
  explicit MissingChannelError(const std::string& channel)
      : EvalError("channel '" + channel + "' missing from signal"),
        channel_(channel) {}
  const std::string& channel() const { return channel_; }

private:
  std::string channel_;
};

/// Raised on malformed input files (CSV/JSON).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A multi-channel discrete-time signal. All channels share the same length;
/// the time domain is 0, 1, ..., length()-1.
class Signal {
public:
  Signal() = default;

  void add_channel(const std::string& name, Eigen::VectorXd values);

  bool has_channel(const std::string& name) const {
    return channels_.count(name) != 0;
  }
  const Eigen::VectorXd& channel(const std::string& name) const;
  double sample(const std::string& name, int t) const;

  Eigen::Index length() const { return length_; }
  const std::map<std::string, Eigen::VectorXd>& channels() const {
    return channels_;
  }

  /// First k samples of every channel (k clamped to the signal length).
  Signal prefix(Eigen::Index k) const;

private:
  std::map<std::string, Eigen::VectorXd> channels_;
  Eigen::Index length_ = 0;
};

/// Named collection of signals, the unit the data loaders produce.
using SignalStore = std::map<std::string, Signal>;

}  // namespace wstl
