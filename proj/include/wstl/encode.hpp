#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wstl/data.hpp"
#include "wstl/milp.hpp"
#include "wstl/pruning.hpp"

namespace wstl {

struct EncodeOptions {
  double v_bound = 3.0;    // log-weights live in [-v_bound, v_bound]
  double margin = 1e-4;    // log-domain margin for pair indicators
  double eps_pred = 1e-6;  // clamp for near-zero predicate magnitudes
};

/// Log-domain view of a pruned, sign-uniform tree: every surviving leaf is
/// assigned the constant log|h|. Leaves with magnitude below eps_pred are
/// clamped to eps_pred; +inf leaves (True, empty Until windows) get a finite
/// proxy large enough that they never win a min or lose a max under bounded
/// weights.
struct SignedLogTree {
  const RctNode* root = nullptr;  // view into the PrunedRct
  int sign = 0;                   // +1 or -1
  std::map<const RctNode*, double> leaf_log;
  double inf_proxy = 0.0;
  int depth = 0;
};

/// pre: pruned.root_sign != 0, caches populated.
SignedLogTree log_leaf_values(const PrunedRct& pruned, const Signal& sig,
                              const EncodeOptions& opts = {});

/// Numeric log-domain evaluation at fixed log-weights: min/max recursion over
/// (v_p + child) with operators swapped on negative-sign trees. The weighted
/// robustness is sign * exp of the result.
double eval_log_domain(const SignedLogTree& tree,
                       const std::map<ParamId, double>& log_weights);

struct NodeEncoding {
  const RctNode* node = nullptr;
  VarId value = -1;  // y_n
};

/// Selector binaries of one min/max gadget, parallel to the node's edges.
struct GadgetSelectors {
  const RctNode* node = nullptr;
  std::vector<VarId> deltas;
};

struct EncodeResult {
  LinExpr value;  // root value expression (a y variable, or a constant leaf)
  double lo = 0.0, hi = 0.0;
  std::vector<NodeEncoding> node_vars;
  std::vector<GadgetSelectors> gadgets;
};

/// Compile one signed log tree into the model. Every internal node gets a
/// value variable y tied to its children by a min- or max-gadget (y <= e_i,
/// y >= e_i - M(1-d_i), sum d_i = 1 for min; mirrored for max); single-child
/// nodes degenerate to an equality with no binaries. Negative-sign trees swap
/// min and max. Big-Ms come from interval arithmetic over each expression's
/// bounds. Log-weight variables are created on demand in `param_vars`.
EncodeResult encode_tree(const SignedLogTree& tree, MilpModel& model,
                         std::map<ParamId, VarId>& param_vars,
                         const EncodeOptions& opts);

struct PairOutcome {
  enum class Kind { ConstantSatisfied, ConstantViolated, Decision };
  Kind kind = Kind::Decision;
  VarId z = -1;                   // Decision only
  std::size_t left = 0, right = 0;  // indices into EncodedProblem::signals
  int label = 1;
};

/// Root value handle used by the pair encoder: sign, value expression, and
/// interval bounds of the expression.
struct RootHandle {
  int sign = 0;
  LinExpr value;
  double lo = 0.0, hi = 0.0;
};

/// Case analysis on root signs, oriented so the preferred signal must win.
/// Same-sign pairs get an indicator z with one big-M constraint (log order
/// reversed on the negative side); mixed or zero signs are decided by
/// soundness and contribute no variables.
std::optional<VarId> encode_pair(const RootHandle& first,
                                 const RootHandle& second, int label,
                                 MilpModel& model, const EncodeOptions& opts,
                                 PairOutcome::Kind& kind_out);

enum class Mode { Preferences, Ranking, Demonstrations };

Mode mode_of(FeedbackMode m);

/// The learning instance: a PNF formula with resolved intervals, its
/// parameter table, the signal store, and one dataset per mode.
struct LearningProblem {
  Mode mode = Mode::Preferences;
  FormulaPtr formula;
  ParameterTable table;
  const SignalStore* signals = nullptr;
  std::vector<PreferencePair> pairs;
  RankingDataset ranking;
  DemoDataset demos;

  /// Pairs actually learned from (ranking mode expands to all C(P,2) pairs).
  std::vector<PreferencePair> effective_pairs() const;
  const Signal& signal(const std::string& id) const;
};

/// Paper objective evaluated directly (no MILP): preferences/ranking count
/// pairs with label * (r1 - r2) > 0; demonstrations sum the weighted
/// robustness values.
double true_objective(const LearningProblem& problem, const Valuation& v);

/// Log-domain MILP objective recomputed at a valuation: pairs judged with the
/// indicator margin, demonstrations as sum of sign * log-domain values.
/// Matches the model objective at the completed assignment.
double surrogate_objective(const LearningProblem& problem,
                           const EncodeOptions& opts, const Valuation& v);

struct EncodedSignal {
  std::string id;
  PrunedRct pruned;
  SignedLogTree log_tree;  // empty when root_sign == 0
  RootHandle root;
  std::vector<NodeEncoding> node_vars;
  std::vector<GadgetSelectors> gadgets;
  std::size_t nodes_before = 0;  // tree size prior to pruning
  std::size_t nodes_after = 0;
};

struct EncodedProblem {
  MilpModel model;
  Mode mode = Mode::Preferences;
  EncodeOptions opts;
  std::vector<EncodedSignal> signals;
  std::map<std::string, std::size_t> signal_index;
  std::vector<PairOutcome> pairs;
  long constant_satisfied = 0;
  long constant_violated = 0;
  std::map<ParamId, VarId> param_vars;  // active parameters only
};

/// prune + log-transform every referenced signal, then assemble the MILP:
/// shared log-weight variables, per-node gadgets, pair indicators or the
/// demonstration objective. Throws EvalError on an empty dataset or a signal
/// shorter than the formula horizon.
EncodedProblem build_problem(const LearningProblem& problem,
                             const EncodeOptions& opts = {});

/// Feasible integral completion of the model at fixed log-weights: node
/// values from the log-domain recursion, selectors on the attaining child,
/// indicators on pairs that clear the margin. Used for warm starts and as a
/// rounding heuristic during branch and bound.
std::vector<double> complete_assignment(const EncodedProblem& encoded,
                                        const std::map<ParamId, double>& logw);

double model_objective(const MilpModel& model, const std::vector<double>& x);

/// Reusable log-domain objective for grid checks: trees are pruned once per
/// signal, then evaluated per valuation.
class LogDomainObjective {
public:
  LogDomainObjective(const LearningProblem& problem,
                     const EncodeOptions& opts = {});
  /// Margin-0 log-domain objective (pair count or demo sum).
  double operator()(const Valuation& v) const;

private:
  struct PerSignal {
    PrunedRct pruned;
    SignedLogTree tree;
  };
  const LearningProblem& problem_;
  EncodeOptions opts_;
  std::vector<PerSignal> per_signal_;
  std::map<std::string, std::size_t> index_;
  std::vector<PreferencePair> pairs_;
};

}  // namespace wstl
