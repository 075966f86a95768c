#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "wstl/formula.hpp"
#include "wstl/signal.hpp"

namespace wstl {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_predicate(const Predicate& p, const Signal& sig, int t);

/// Aggregation performed at a tree node. Leaves carry predicate (or True)
/// values; Min/Max fold their children after per-edge weighting.
enum class RctOp { Leaf, Min, Max };

/// Distinguishes the Until gadget internals from plain formula nodes.
enum class RctRole { Formula, UntilOffset, UntilLeftWindow };

struct RctNode;

struct RctEdge {
  std::unique_ptr<RctNode> child;
  std::optional<ParamId> param;  // weighted edges only
};

/// One node of the robustness computation tree: a formula node instantiated
/// at an absolute time instant. `cached` holds the classical robustness of
/// the subtree once eval_robustness has run.
struct RctNode {
  const FormulaNode* source = nullptr;
  int time = 0;
  RctOp op = RctOp::Leaf;
  RctRole role = RctRole::Formula;
  int offset = -1;  // UntilOffset nodes: the t' this gadget covers
  std::vector<RctEdge> edges;
  std::optional<double> cached;

  bool is_leaf() const { return op == RctOp::Leaf; }
  std::size_t node_count() const;
  std::unique_ptr<RctNode> clone() const;
};

/// Unroll a PNF formula with resolved intervals at instant t against a signal
/// of length L. Until yields one min-gadget per offset: a left window node
/// (min over [t, t+t'), empty at t'=0) under the w1 edge and the right
/// operand at t+t' under the w2 edge. Throws EvalError when t + horizon > L.
std::unique_ptr<RctNode> build_rct(const FormulaPtr& f,
                                   const ParameterTable& table, int t, int L);

/// Classical robustness: every edge weight treated as 1. Populates `cached`
/// on every node and returns the root value. Min/max over an empty edge list
/// give +inf/-inf.
double eval_robustness(RctNode& rct, const Signal& sig);

/// Weighted robustness: each child value is multiplied by its edge weight
/// before the min/max fold. Pure; caches are left untouched.
double eval_weighted_robustness(const RctNode& rct, const Signal& sig,
                                const Valuation& v);

/// Direct recursive robustness on the AST (no tree materialization). Handles
/// every kind including Not and Implies; serves as the independent reference
/// for the tree path.
double robustness(const FormulaNode& f, const Signal& sig, int t);

/// Direct weighted robustness on a PNF AST; weight slots resolved through
/// the table.
double weighted_robustness(const FormulaNode& f, const ParameterTable& table,
                           const Signal& sig, int t, const Valuation& v);

int sign_of(double x);

}  // namespace wstl
