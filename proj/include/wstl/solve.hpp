#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wstl/encode.hpp"
#include "wstl/milp.hpp"

namespace wstl {

enum class SolveStatus { Optimal, FeasibleTimeLimit, Infeasible, Unbounded };

std::string status_name(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> assignment;  // indexed by VarId
  double objective = 0.0;
  double wall_time = 0.0;  // seconds
  long nodes_explored = 0;
};

struct SamplerConfig {
  long samples = 10000;   // S
  std::uint64_t seed = 0;
  double v_min = -3.0, v_max = 3.0;
};

/// Random Sampling baseline and warm start: draw S valuations log-uniformly
/// inside the bounds, score each with the direct semantics (true_objective),
/// keep the best. Deterministic for a fixed seed.
std::pair<Valuation, double> random_search(const LearningProblem& problem,
                                           const SamplerConfig& config);

struct SolveOptions {
  double time_limit = 1e18;  // seconds
  /// Initial incumbent (must be feasible); its objective is recomputed.
  std::optional<std::vector<double>> warm_start;
  /// Optional rounding heuristic: given a node's LP point, propose a feasible
  /// integral assignment. Checked for feasibility before acceptance.
  std::function<std::optional<std::vector<double>>(
      const std::vector<double>&)> heuristic;
  double int_tol = 1e-6;
  double feas_tol = 1e-6;
};

/// Branch and bound over the binaries with the dense-simplex relaxation.
/// Most-fractional branching, best-bound node order, bound flooring when the
/// objective is integral. Single-threaded and deterministic.
Solution solve_internal(const MilpModel& model, const SolveOptions& opts = {});

/// CPLEX-LP-format text export (Maximize / Subject To / Bounds / Binaries /
/// End). A constant objective term rides on a variable fixed to 1 so external
/// optima match internal ones. Variable names are the stable tag+index names.
void export_lp(const MilpModel& model, const std::string& path);

/// Result-file import: plain "<varname> <value>" lines, '#' comments allowed.
/// Missing variables default to 0.
Solution import_result(const MilpModel& model, const std::string& path);

/// w_p = exp(v_p) for parameters present in the model; parameters pruned out
/// of every tree default to weight 1.
Valuation extract_valuation(const Solution& sol,
                            const std::map<ParamId, VarId>& param_vars,
                            const ParameterTable& table);

/// Initial incumbent assignment from a valuation (log-weights clamped to the
/// model bounds, everything else completed consistently).
std::vector<double> warm_start_from(const EncodedProblem& encoded,
                                    const Valuation& v);

/// Rounding heuristic for solve_internal: project a node's LP point onto its
/// log-weights and complete integrally. `encoded` must outlive the returned
/// callable.
std::function<std::optional<std::vector<double>>(const std::vector<double>&)>
make_rounding_heuristic(const EncodedProblem& encoded);

}  // namespace wstl
