#include "wstl/solve.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>

#include "wstl/simplex.hpp"

namespace wstl {

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleTimeLimit: return "feasible-time-limit";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// random sampling warm start / baseline

std::pair<Valuation, double> random_search(const LearningProblem& problem,
                                           const SamplerConfig& config) {
  if (config.samples < 1)
    throw std::invalid_argument("sample count must be >= 1");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> draw(config.v_min, config.v_max);

  Valuation best;
  double best_obj = -kInf;
  for (long s = 0; s < config.samples; ++s) {
    Valuation v;
    for (const auto& p : problem.table.params())
      v.set(p.id, std::exp(draw(rng)));
    double obj = true_objective(problem, v);
    if (obj > best_obj) {
      best_obj = obj;
      best = std::move(v);
    }
  }
  return {std::move(best), best_obj};
}

// ---------------------------------------------------------------------------
// branch and bound

namespace {

bool check_feasible(const MilpModel& model, const std::vector<double>& x,
                    double feas_tol, double int_tol) {
  if (x.size() != model.num_vars()) return false;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const VarDef& v = model.var(static_cast<VarId>(j));
    if (x[j] < v.lb - feas_tol || x[j] > v.ub + feas_tol) return false;
    if (v.kind == VarKind::Binary &&
        std::abs(x[j] - std::round(x[j])) > int_tol)
      return false;
  }
  for (const Constraint& c : model.constraints()) {
    double lhs = 0.0;
    for (const auto& [v, coef] : c.expr.terms()) lhs += coef * x[v];
    double slack = lhs - c.rhs;
    double tol = feas_tol * std::max(1.0, std::abs(c.rhs));
    switch (c.sense) {
      case Sense::LE:
        if (slack > tol) return false;
        break;
      case Sense::GE:
        if (slack < -tol) return false;
        break;
      case Sense::EQ:
        if (std::abs(slack) > tol) return false;
        break;
    }
  }
  return true;
}

struct Node {
  Eigen::VectorXd lb, ub;
  double bound = 0.0;
  long seq = 0;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // best bound first
    return a.seq > b.seq;
  }
};

}  // namespace

Solution solve_internal(const MilpModel& model, const SolveOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  Solution best;
  best.status = SolveStatus::Infeasible;
  bool have_incumbent = false;
  const bool integral = model.objective_is_integral();

  auto accept = [&](const std::vector<double>& x) {
    double obj = model_objective(model, x);
    if (!have_incumbent || obj > best.objective + 1e-9) {
      best.assignment = x;
      best.objective = obj;
      have_incumbent = true;
      return true;
    }
    return false;
  };

  if (opts.warm_start) {
    if (!check_feasible(model, *opts.warm_start, opts.feas_tol, opts.int_tol))
      throw std::invalid_argument("warm start is not feasible");
    accept(*opts.warm_start);
  }

  // cheapest valid upper bound: every objective term at its best bound
  double trivial_ub = model.objective.constant();
  for (const auto& [v, c] : model.objective.terms())
    trivial_ub += c > 0 ? c * model.var(v).ub : c * model.var(v).lb;
  if (integral) trivial_ub = std::floor(trivial_ub + 1e-9);
  if (have_incumbent && best.objective >= trivial_ub - 1e-9) {
    best.status = SolveStatus::Optimal;
    best.wall_time = elapsed();
    return best;
  }

  LpProblem base = to_lp(model);
  std::vector<VarId> binaries;
  for (std::size_t j = 0; j < model.num_vars(); ++j)
    if (model.var(static_cast<VarId>(j)).kind == VarKind::Binary)
      binaries.push_back(static_cast<VarId>(j));

  auto prunable = [&](double bound) {
    if (!have_incumbent) return false;
    double b = integral ? std::floor(bound + 1e-6) : bound;
    return b <= best.objective + 1e-9;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
  long seq = 0;
  queue.push({base.lb, base.ub, trivial_ub, seq++});

  bool timed_out = false;
  long explored = 0;
  while (!queue.empty()) {
    if (elapsed() > opts.time_limit) {
      timed_out = true;
      break;
    }
    Node node = queue.top();
    queue.pop();
    if (prunable(node.bound)) continue;

    LpProblem lp = base;
    lp.lb = node.lb;
    lp.ub = node.ub;
    LpResult rel = solve_lp(lp);
    ++explored;
    if (rel.status == LpStatus::Infeasible) continue;
    if (rel.status == LpStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      best.wall_time = elapsed();
      best.nodes_explored = explored;
      return best;
    }
    double bound = rel.objective;
    if (prunable(bound)) continue;

    std::vector<double> x(rel.x.data(), rel.x.data() + rel.x.size());

    if (opts.heuristic) {
      auto candidate = opts.heuristic(x);
      if (candidate &&
          check_feasible(model, *candidate, opts.feas_tol, opts.int_tol))
        accept(*candidate);
    }

    // most-fractional binary
    int branch_var = -1;
    double best_frac = opts.int_tol;
    for (VarId b : binaries) {
      double frac = std::abs(x[b] - std::round(x[b]));
      if (frac > best_frac) {
        best_frac = frac;
        branch_var = b;
      }
    }

    if (branch_var < 0) {
      for (VarId b : binaries) x[b] = std::round(x[b]);
      accept(x);
      continue;
    }
    if (prunable(bound)) continue;

    Node down{node.lb, node.ub, bound, seq++};
    down.ub[branch_var] = 0.0;
    Node up{std::move(node.lb), std::move(node.ub), bound, seq++};
    up.lb[branch_var] = 1.0;
    queue.push(std::move(down));
    queue.push(std::move(up));
  }

  best.wall_time = elapsed();
  best.nodes_explored = explored;
  if (!have_incumbent) {
    best.status = timed_out ? SolveStatus::FeasibleTimeLimit
                            : SolveStatus::Infeasible;
    return best;
  }
  best.status =
      timed_out ? SolveStatus::FeasibleTimeLimit : SolveStatus::Optimal;
  return best;
}

// ---------------------------------------------------------------------------
// LP file export / result import

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, end);
}

void write_expr_terms(std::ostream& os, const LinExpr& expr,
                      const MilpModel& model, bool& lead) {
  for (const auto& [v, c] : expr.terms()) {
    double a = c;
    if (lead) {
      if (a < 0) os << "- ";
      lead = false;
    } else {
      os << (a < 0 ? " - " : " + ");
    }
    a = std::abs(a);
    if (a != 1.0) os << fmt(a) << " ";
    os << model.var(v).name;
  }
}

}  // namespace

void export_lp(const MilpModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");

  os << "\\ generated by wstl\n";
  os << "Maximize\n obj: ";
  bool lead = true;
  write_expr_terms(os, model.objective, model, lead);
  if (model.objective.constant() != 0.0) {
    if (!lead) os << " + ";
    os << fmt(model.objective.constant()) << " __one";
  } else if (lead) {
    os << "0 __one";
  }
  os << "\n";

  if (!model.constraints().empty()) {
    os << "Subject To\n";
    int idx = 0;
    for (const Constraint& c : model.constraints()) {
      os << " c" << idx++ << ": ";
      bool first = true;
      write_expr_terms(os, c.expr, model, first);
      if (first) os << "0 __one";
      switch (c.sense) {
        case Sense::LE: os << " <= "; break;
        case Sense::GE: os << " >= "; break;
        case Sense::EQ: os << " = "; break;
      }
      os << fmt(c.rhs) << "\n";
    }
  }

  os << "Bounds\n";
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const VarDef& v = model.var(static_cast<VarId>(j));
    if (v.kind == VarKind::Binary) continue;
    if (v.lb == v.ub) {
      os << " " << v.name << " = " << fmt(v.lb) << "\n";
    } else {
      os << " " << fmt(v.lb) << " <= " << v.name << " <= " << fmt(v.ub)
         << "\n";
    }
  }
  os << " __one = 1\n";

  bool any_bin = model.num_binaries() > 0;
  if (any_bin) {
    os << "Binaries\n";
    for (std::size_t j = 0; j < model.num_vars(); ++j) {
      const VarDef& v = model.var(static_cast<VarId>(j));
      if (v.kind == VarKind::Binary) os << " " << v.name << "\n";
    }
  }
  os << "End\n";
  if (!os) throw DataError("write failure on " + path);
}

Solution import_result(const MilpModel& model, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path);

  std::map<std::string, VarId> by_name;
  for (std::size_t j = 0; j < model.num_vars(); ++j)
    by_name[model.var(static_cast<VarId>(j)).name] = static_cast<VarId>(j);

  Solution sol;
  sol.assignment.assign(model.num_vars(), 0.0);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string name;
    double value;
    if (!(ls >> name)) continue;
    if (name[0] == '#' || name[0] == '\\') continue;
    if (name == "__one") continue;
    if (!(ls >> value))
      throw DataError("malformed result line: " + line);
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw DataError("unknown variable in result file: " + name);
    sol.assignment[it->second] = value;
  }
  sol.status = SolveStatus::Optimal;
  sol.objective = model_objective(model, sol.assignment);
  return sol;
}

std::vector<double> warm_start_from(const EncodedProblem& encoded,
                                    const Valuation& v) {
  std::map<ParamId, double> logw;
  double b = encoded.opts.v_bound;
  for (const auto& [p, var] : encoded.param_vars)
    logw[p] = std::clamp(std::log(v.at(p)), -b, b);
  return complete_assignment(encoded, logw);
}

std::function<std::optional<std::vector<double>>(const std::vector<double>&)>
make_rounding_heuristic(const EncodedProblem& encoded) {
  return [&encoded](const std::vector<double>& x)
             -> std::optional<std::vector<double>> {
    std::map<ParamId, double> logw;
    for (const auto& [p, var] : encoded.param_vars)
      logw[p] = std::clamp(x[var], -encoded.opts.v_bound,
                           encoded.opts.v_bound);
    return complete_assignment(encoded, logw);
  };
}

Valuation extract_valuation(const Solution& sol,
                            const std::map<ParamId, VarId>& param_vars,
                            const ParameterTable& table) {
  if (sol.status != SolveStatus::Optimal &&
      sol.status != SolveStatus::FeasibleTimeLimit)
    throw std::invalid_argument("no solution to extract a valuation from");
  Valuation v;
  for (const auto& p : table.params()) {
    auto it = param_vars.find(p.id);
    if (it == param_vars.end()) {
      v.set(p.id, 1.0);  // pruned out of every tree
    } else {
      if (static_cast<std::size_t>(it->second) >= sol.assignment.size())
        throw std::invalid_argument("solution does not cover variable " +
                                    p.id);
      v.set(p.id, std::exp(sol.assignment[it->second]));
    }
  }
  return v;
}

}  // namespace wstl
