#pragma once

#include <map>
#include <string>
#include <vector>

#include "wstl/signal.hpp"

namespace wstl {

/// One labeled comparison: label +1 prefers `left`, -1 prefers `right`.
struct PreferencePair {
  std::string left;
  std::string right;
  int label = 1;
};

/// Signal ids ordered best first.
struct RankingDataset {
  std::vector<std::string> ordered;

  /// All-pairs view: C(P,2) pairs, each labeled +1 for the higher-ranked id.
  std::vector<PreferencePair> expand() const;
};

struct DemoDataset {
  std::vector<std::string> demos;
};

enum class FeedbackMode { Preferences, Ranking, Demonstrations };

struct Feedback {
  FeedbackMode mode = FeedbackMode::Preferences;
  std::vector<PreferencePair> pairs;
  RankingDataset ranking;
  DemoDataset demos;
};

/// Load one signal from a CSV file (header row of channel names, one row per
/// time step; the id is the file stem), or a whole store from a JSON manifest
/// {"signals": {"<id>": "<csv path>"}, "groups": {"<id>": "<group>"}?} with
/// paths relative to the manifest. Throws DataError on ragged rows or
/// non-numeric cells, naming the offending row.
SignalStore load_signals(const std::string& path);

/// Group labels recorded by a manifest's optional "groups" key (empty
/// otherwise). Signals without an entry share the default group "".
std::map<std::string, std::string> load_signal_groups(const std::string& path);

/// Per channel and per group, across signals and time: x' = (x-min)/(max-min);
/// constant channels map to 0. `groups` assigns each signal id to a group;
/// missing ids fall into "". Idempotent and order-preserving within a group.
void min_max_normalize(SignalStore& store,
                       const std::map<std::string, std::string>& groups = {});

/// Single-lap telemetry row. b_sc uses the +1/-1 convention (+1 while the
/// field runs slow) so implication rewrites keep their predicate signs.
struct LapRecord {
  double raw_lap_time = 0.0;  // seconds
  double pit_time = 0.0;      // seconds in pit lane, 0 if no stop
  int lap_index = 1;          // 1-based
  double completion = 0.0;    // fraction of race distance covered, [0,1]
  double position = 0.0;
  double delta_to_lead = 0.0;  // seconds
  double safety_car = -1.0;    // +1 or -1
};

constexpr double kFullTankMass = 100.0;     // kg
constexpr double kMassSensitivity = 0.033;  // seconds per kg

/// Fuel-and-pit-corrected lap time:
///   t_raw - (m_full - c*k) * s - t_pit
/// with m_full and s fixed above and fuel burn c (kg/lap) configurable.
double fuel_corrected_lap_time(const LapRecord& rec, double fuel_per_lap);

/// Parse a per-lap CSV (required column t_raw; optional t_pit; lap index is
/// the 1-based row number) into records. Other columns are ignored here.
std::vector<LapRecord> load_lap_records(const std::string& path);

/// Load a feedback JSON holding exactly one of the keys "pairs" (list of
/// [left, right, label]), "ranking" (ids best first), "demos" (ids). The
/// declared mode must match the key. Ids are validated against `store`.
Feedback load_feedback(const std::string& path, FeedbackMode mode,
                       const SignalStore& store);

FeedbackMode parse_mode(const std::string& name);
std::string mode_name(FeedbackMode mode);

}  // namespace wstl
