#pragma once

#include <string>
#include <vector>

#include "wstl/encode.hpp"

namespace wstl {

/// Pairwise scoring summary. `accuracy` is concordant / (concordant +
/// discordant); `kendall_tau_distance` is the discordant fraction (the
/// normalized Kendall-tau distance). Ties count as discordant. constant_pairs
/// counts comparisons whose outcome no valuation can change (mixed or zero
/// root signs); they are still judged.
struct EvalReport {
  long concordant = 0;
  long discordant = 0;
  long constant_pairs = 0;
  double accuracy = 0.0;
  double kendall_tau_distance = 0.0;

  long total() const { return concordant + discordant; }
};

/// Judge each pair by label * (r(left) - r(right)) > 0 under the valuation.
EvalReport pairwise_accuracy(const Valuation& v, const FormulaPtr& formula,
                             const ParameterTable& table,
                             const SignalStore& signals,
                             const std::vector<PreferencePair>& pairs);

/// Compare the ground-truth order against the order induced by weighted
/// robustness over all C(P,2) pairs.
EvalReport kendall_accuracy(const Valuation& v, const FormulaPtr& formula,
                            const ParameterTable& table,
                            const SignalStore& signals,
                            const RankingDataset& ranking);

/// Rank signals by weighted robustness after truncating them to their first
/// K samples and clamping every temporal interval endpoint to K-1. Returns
/// ids best first; ties broken by id for determinism.
std::vector<std::string> prefix_prediction(const Valuation& v,
                                           const FormulaPtr& formula,
                                           const SignalStore& signals,
                                           const std::vector<std::string>& ids,
                                           int k);

struct PrefixPoint {
  int k;
  double accuracy;
};

/// Accuracy-vs-K curve against a ground-truth ranking, K = 1..max length.
std::vector<PrefixPoint> prefix_sweep(const Valuation& v,
                                      const FormulaPtr& formula,
                                      const SignalStore& signals,
                                      const RankingDataset& ranking);

}  // namespace wstl
