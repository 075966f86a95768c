#pragma once

#include <memory>
#include <set>

#include "wstl/rct.hpp"

namespace wstl {

/// Result of structural pruning: a copy of the tree in which every surviving
/// node's cached robustness has the root's sign, plus the set of weight
/// parameters still attached to some edge.
struct PrunedRct {
  std::unique_ptr<RctNode> root;
  int root_sign = 0;
  std::set<ParamId> active_params;

  /// Weight-invariant signal: robustness is 0 under every valuation, so any
  /// comparison against it is a fixed outcome.
  bool constant_zero() const { return root_sign == 0; }
};

/// Structural pruning. pre: the tree is fully evaluated (caches populated);
/// throws EvalError otherwise. Children whose cached sign differs from their
/// parent's are dropped; predicates are returned as-is. The input tree is not
/// modified.
PrunedRct prune(const RctNode& rct, const Signal& sig);

/// True when the cached root robustness is exactly 0 (see
/// PrunedRct::constant_zero). pre: root cache populated.
bool zero_sign_policy(const RctNode& rct);

}  // namespace wstl
