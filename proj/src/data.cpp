#include "wstl/data.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace wstl {

std::vector<PreferencePair> RankingDataset::expand() const {
  std::vector<PreferencePair> pairs;
  for (std::size_t i = 0; i < ordered.size(); ++i)
    for (std::size_t j = i + 1; j < ordered.size(); ++j)
      pairs.push_back({ordered[i], ordered[j], 1});
  return pairs;
}

// ---------------------------------------------------------------------------
// CSV signals

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, int row) {
  double value;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || p != cell.data() + cell.size())
    throw DataError(path + ": non-numeric cell '" + cell + "' in row " +
                    std::to_string(row));
  return value;
}

Signal load_signal_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  if (header.empty()) throw DataError(path + ": empty header");

  std::vector<std::vector<double>> cols(header.size());
  int row = 1;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    for (std::size_t j = 0; j < cells.size(); ++j)
      cols[j].push_back(parse_cell(cells[j], path, row));
  }

  Signal sig;
  for (std::size_t j = 0; j < header.size(); ++j) {
    Eigen::VectorXd v =
        Eigen::Map<Eigen::VectorXd>(cols[j].data(), cols[j].size());
    sig.add_channel(header[j], std::move(v));
  }
  return sig;
}

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return doc;
}

bool is_manifest(const std::string& path) {
  return fs::path(path).extension() == ".json";
}

}  // namespace

SignalStore load_signals(const std::string& path) {
  SignalStore store;
  if (!is_manifest(path)) {
    store[fs::path(path).stem().string()] = load_signal_csv(path);
    return store;
  }
  json doc = load_json(path);
  if (!doc.contains("signals") || !doc["signals"].is_object())
    throw DataError(path + ": manifest needs a \"signals\" object");
  fs::path base = fs::path(path).parent_path();
  for (const auto& [id, rel] : doc["signals"].items()) {
    if (!rel.is_string())
      throw DataError(path + ": signal path for '" + id +
                      "' must be a string");
    store[id] = load_signal_csv((base / rel.get<std::string>()).string());
  }
  return store;
}

std::map<std::string, std::string> load_signal_groups(const std::string& path) {
  std::map<std::string, std::string> groups;
  if (!is_manifest(path)) return groups;
  json doc = load_json(path);
  if (doc.contains("groups"))
    for (const auto& [id, g] : doc["groups"].items())
      groups[id] = g.get<std::string>();
  return groups;
}

// ---------------------------------------------------------------------------
// normalization

void min_max_normalize(SignalStore& store,
                       const std::map<std::string, std::string>& groups) {
  auto group_of = [&groups](const std::string& id) {
    auto it = groups.find(id);
    return it == groups.end() ? std::string() : it->second;
  };

  // extrema per (group, channel) across signals and time
  std::map<std::pair<std::string, std::string>, std::pair<double, double>>
      extrema;
  for (const auto& [id, sig] : store) {
    for (const auto& [ch, values] : sig.channels()) {
      if (values.size() == 0) continue;
      auto key = std::make_pair(group_of(id), ch);
      auto it = extrema.find(key);
      double lo = values.minCoeff(), hi = values.maxCoeff();
      if (it == extrema.end()) {
        extrema[key] = {lo, hi};
      } else {
        it->second.first = std::min(it->second.first, lo);
        it->second.second = std::max(it->second.second, hi);
      }
    }
  }

  for (auto& [id, sig] : store) {
    Signal scaled;
    for (const auto& [ch, values] : sig.channels()) {
      auto [lo, hi] = extrema.at({group_of(id), ch});
      Eigen::VectorXd v = values;
      if (hi > lo)
        v = (v.array() - lo) / (hi - lo);
      else
        v.setZero();
      scaled.add_channel(ch, std::move(v));
    }
    sig = std::move(scaled);
  }
}

// ---------------------------------------------------------------------------
// lap records

double fuel_corrected_lap_time(const LapRecord& rec, double fuel_per_lap) {
  if (rec.lap_index < 1)
    throw std::invalid_argument("lap index is 1-based");
  return rec.raw_lap_time -
         (kFullTankMass - fuel_per_lap * rec.lap_index) * kMassSensitivity -
         rec.pit_time;
}

std::vector<LapRecord> load_lap_records(const std::string& path) {
  Signal sig = load_signal_csv(path);
  if (!sig.has_channel("t_raw"))
    throw DataError(path + ": lap CSV needs a t_raw column");
  auto get = [&sig](const char* ch, Eigen::Index t, double fallback) {
    return sig.has_channel(ch) ? sig.channel(ch)[t] : fallback;
  };
  std::vector<LapRecord> laps;
  for (Eigen::Index t = 0; t < sig.length(); ++t) {
    LapRecord rec;
    rec.raw_lap_time = sig.channel("t_raw")[t];
    rec.pit_time = get("t_pit", t, 0.0);
    rec.lap_index = static_cast<int>(t) + 1;
    rec.completion = get("r_lap", t, 0.0);
    rec.position = get("p", t, 0.0);
    rec.delta_to_lead = get("t_dlead", t, 0.0);
    rec.safety_car = get("b_sc", t, -1.0);
    laps.push_back(rec);
  }
  return laps;
}

// ---------------------------------------------------------------------------
// feedback

FeedbackMode parse_mode(const std::string& name) {
  if (name == "preferences" || name == "pairs") return FeedbackMode::Preferences;
  if (name == "ranking") return FeedbackMode::Ranking;
  if (name == "demos" || name == "demonstrations")
    return FeedbackMode::Demonstrations;
  throw DataError("unknown mode '" + name +
                  "' (expected preferences, ranking, or demos)");
}

std::string mode_name(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::Preferences: return "preferences";
    case FeedbackMode::Ranking: return "ranking";
    case FeedbackMode::Demonstrations: return "demos";
  }
  return "unknown";
}

Feedback load_feedback(const std::string& path, FeedbackMode mode,
                       const SignalStore& store) {
  json doc = load_json(path);
  int keys = doc.contains("pairs") + doc.contains("ranking") +
             doc.contains("demos");
  if (keys != 1)
    throw DataError(path +
                    ": feedback needs exactly one of pairs/ranking/demos");

  auto check_id = [&store, &path](const std::string& id) {
    if (store.count(id) == 0)
      throw DataError(path + ": unknown signal id '" + id + "'");
  };

  Feedback fb;
  fb.mode = mode;
  if (doc.contains("pairs")) {
    if (mode != FeedbackMode::Preferences)
      throw DataError(path + ": file holds pairs but mode is " +
                      mode_name(mode));
    for (const auto& item : doc["pairs"]) {
      if (!item.is_array() || item.size() != 3)
        throw DataError(path + ": each pair must be [left, right, label]");
      PreferencePair p;
      p.left = item[0].get<std::string>();
      p.right = item[1].get<std::string>();
      p.label = item[2].get<int>();
      if (p.label != 1 && p.label != -1)
        throw DataError(path + ": label must be 1 or -1");
      check_id(p.left);
      check_id(p.right);
      fb.pairs.push_back(std::move(p));
    }
    if (fb.pairs.empty()) throw DataError(path + ": empty pair list");
  } else if (doc.contains("ranking")) {
    if (mode != FeedbackMode::Ranking)
      throw DataError(path + ": file holds a ranking but mode is " +
                      mode_name(mode));
    std::set<std::string> seen;
    for (const auto& item : doc["ranking"]) {
      std::string id = item.get<std::string>();
      check_id(id);
      if (!seen.insert(id).second)
        throw DataError(path + ": duplicate id '" + id + "' in ranking");
      fb.ranking.ordered.push_back(std::move(id));
    }
    if (fb.ranking.ordered.size() < 2)
      throw DataError(path + ": ranking needs at least two ids");
  } else {
    if (mode != FeedbackMode::Demonstrations)
      throw DataError(path + ": file holds demos but mode is " +
                      mode_name(mode));
    for (const auto& item : doc["demos"]) {
      std::string id = item.get<std::string>();
      check_id(id);
      fb.demos.demos.push_back(std::move(id));
    }
    if (fb.demos.demos.empty()) throw DataError(path + ": empty demo list");
  }
  return fb;
}

}  // namespace wstl
