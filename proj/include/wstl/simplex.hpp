#pragma once

#include <Eigen/Core>

#include <vector>

#include "wstl/milp.hpp"

namespace wstl {

/// Dense LP in bounded-variable form: maximize c'x + c0 subject to row
/// constraints and box bounds (infinities allowed on bounds).
struct LpProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd rhs;
  std::vector<Sense> sense;
  Eigen::VectorXd c;
  double c0 = 0.0;
  Eigen::VectorXd lb, ub;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;  // reduced-cost / pivot-element threshold
  double feas_tol = 1e-6;   // bound and row feasibility
  int max_iterations = 200000;
};

/// Two-phase primal simplex on the bounded-variable tableau. Dantzig pricing
/// with a Bland fallback once the objective stalls. Throws std::runtime_error
/// if the iteration cap is hit.
LpResult solve_lp(const LpProblem& lp, const SimplexOptions& opts = {});

/// Dense LP view of a MILP (bounds can then be tightened per node).
LpProblem to_lp(const MilpModel& model);

}  // namespace wstl
