#include "wstl/pruning.hpp"

namespace wstl {

namespace {

double cached_or_throw(const RctNode& n) {
  if (!n.cached) throw EvalError("prune requires an evaluated tree");
  return *n.cached;
}

/// Children whose cached sign differs from the parent's cannot attain the
/// parent's min/max under any positive weighting (soundness fixes every
/// subtree's sign), so they are dropped.
std::unique_ptr<RctNode> prune_copy(const RctNode& n, int sign,
                                    std::set<ParamId>& active) {
  auto out = std::make_unique<RctNode>();
  out->source = n.source;
  out->time = n.time;
  out->op = n.op;
  out->role = n.role;
  out->offset = n.offset;
  out->cached = cached_or_throw(n);

  if (n.is_leaf()) return out;

  for (const auto& e : n.edges) {
    if (sign_of(cached_or_throw(*e.child)) != sign) continue;
    auto kept = prune_copy(*e.child, sign, active);
    if (e.param) active.insert(*e.param);
    out->edges.push_back({std::move(kept), e.param});
  }
  return out;
}

}  // namespace

PrunedRct prune(const RctNode& rct, const Signal& sig) {
  (void)sig;  // values are read from the caches the evaluation left behind
  PrunedRct out;
  out.root_sign = sign_of(cached_or_throw(rct));
  out.root = prune_copy(rct, out.root_sign, out.active_params);
  return out;
}

bool zero_sign_policy(const RctNode& rct) {
  return cached_or_throw(rct) == 0.0;
}

}  // namespace wstl
