#include "wstl/signal.hpp"

#include <algorithm>

namespace wstl {

void Signal::add_channel(const std::string& name, Eigen::VectorXd values) {
  if (!channels_.empty() && values.size() != length_)
    throw DataError("channel '" + name + "' has length " +
                    std::to_string(values.size()) + ", expected " +
                    std::to_string(length_));
  length_ = values.size();
  channels_[name] = std::move(values);
}

const Eigen::VectorXd& Signal::channel(const std::string& name) const {
  auto it = channels_.find(name);
  if (it == channels_.end()) throw MissingChannelError(name);
  return it->second;
}

double Signal::sample(const std::string& name, int t) const {
  const Eigen::VectorXd& ch = channel(name);
  if (t < 0 || t >= ch.size())
    throw EvalError("sample index " + std::to_string(t) +
                    " out of range for signal of length " +
                    std::to_string(ch.size()));
  return ch[t];
}

Signal Signal::prefix(Eigen::Index k) const {
  k = std::clamp<Eigen::Index>(k, 0, length_);
  Signal out;
  for (const auto& [name, values] : channels_)
    out.add_channel(name, values.head(k));
  return out;
}

}  // namespace wstl
