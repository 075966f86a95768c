#include "wstl/eval.hpp"

#include <algorithm>
#include <cmath>

#include "wstl/rct.hpp"

namespace wstl {

namespace {

std::map<std::string, double> robustness_by_id(
    const Valuation& v, const FormulaPtr& formula, const ParameterTable& table,
    const SignalStore& signals, const std::vector<std::string>& ids) {
  std::map<std::string, double> out;
  for (const auto& id : ids) {
    if (out.count(id)) continue;
    auto it = signals.find(id);
    if (it == signals.end()) throw DataError("unknown signal id: " + id);
    out[id] = weighted_robustness(*formula, table, it->second, 0, v);
  }
  return out;
}

EvalReport report_from_counts(long concordant, long discordant,
                              long constant) {
  EvalReport r;
  r.concordant = concordant;
  r.discordant = discordant;
  r.constant_pairs = constant;
  long total = concordant + discordant;
  r.accuracy = total > 0 ? static_cast<double>(concordant) / total : 0.0;
  r.kendall_tau_distance =
      total > 0 ? static_cast<double>(discordant) / total : 0.0;
  return r;
}

}  // namespace

EvalReport pairwise_accuracy(const Valuation& v, const FormulaPtr& formula,
                             const ParameterTable& table,
                             const SignalStore& signals,
                             const std::vector<PreferencePair>& pairs) {
  std::vector<std::string> ids;
  for (const auto& p : pairs) {
    ids.push_back(p.left);
    ids.push_back(p.right);
  }
  auto r = robustness_by_id(v, formula, table, signals, ids);

  long concordant = 0, discordant = 0, constant = 0;
  for (const auto& p : pairs) {
    double delta = r.at(p.left) - r.at(p.right);
    bool ok = p.label * delta > 0.0;  // ties count as discordant
    (ok ? concordant : discordant) += 1;
    if (sign_of(r.at(p.left)) != sign_of(r.at(p.right))) ++constant;
  }
  return report_from_counts(concordant, discordant, constant);
}

EvalReport kendall_accuracy(const Valuation& v, const FormulaPtr& formula,
                            const ParameterTable& table,
                            const SignalStore& signals,
                            const RankingDataset& ranking) {
  if (ranking.ordered.size() < 2)
    throw std::invalid_argument("ranking needs at least two items");
  auto r = robustness_by_id(v, formula, table, signals, ranking.ordered);

  long concordant = 0, discordant = 0, constant = 0;
  const auto& ids = ranking.ordered;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      bool ok = r.at(ids[i]) > r.at(ids[j]);
      (ok ? concordant : discordant) += 1;
      if (sign_of(r.at(ids[i])) != sign_of(r.at(ids[j]))) ++constant;
    }
  }
  return report_from_counts(concordant, discordant, constant);
}

std::vector<std::string> prefix_prediction(const Valuation& v,
                                           const FormulaPtr& formula,
                                           const SignalStore& signals,
                                           const std::vector<std::string>& ids,
                                           int k) {
  if (k < 1) throw std::invalid_argument("prefix length must be >= 1");

  std::vector<std::pair<std::string, double>> scored;
  for (const auto& id : ids) {
    auto it = signals.find(id);
    if (it == signals.end()) throw DataError("unknown signal id: " + id);
    Signal cut = it->second.prefix(k);
    int len = static_cast<int>(cut.length());
    FormulaPtr shrunk = clamp_intervals(formula, len - 1);
    shrunk = resolve_intervals(shrunk, len);
    ParameterTable table = collect_parameters(shrunk);
    scored.emplace_back(id, weighted_robustness(*shrunk, table, cut, 0, v));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<std::string> out;
  for (const auto& [id, score] : scored) out.push_back(id);
  return out;
}

std::vector<PrefixPoint> prefix_sweep(const Valuation& v,
                                      const FormulaPtr& formula,
                                      const SignalStore& signals,
                                      const RankingDataset& ranking) {
  Eigen::Index max_len = 0;
  for (const auto& id : ranking.ordered) {
    auto it = signals.find(id);
    if (it == signals.end()) throw DataError("unknown signal id: " + id);
    max_len = std::max(max_len, it->second.length());
  }

  std::map<std::string, std::size_t> rank_of;
  for (std::size_t i = 0; i < ranking.ordered.size(); ++i)
    rank_of[ranking.ordered[i]] = i;

  std::vector<PrefixPoint> curve;
  for (int k = 1; k <= max_len; ++k) {
    auto predicted = prefix_prediction(v, formula, signals, ranking.ordered, k);
    long concordant = 0, total = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      for (std::size_t j = i + 1; j < predicted.size(); ++j) {
        ++total;
        if (rank_of.at(predicted[i]) < rank_of.at(predicted[j])) ++concordant;
      }
    }
    curve.push_back(
        {k, total > 0 ? static_cast<double>(concordant) / total : 0.0});
  }
  return curve;
}

}  // namespace wstl
