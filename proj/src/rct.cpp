#include "wstl/rct.hpp"

#include <algorithm>
#include <stdexcept>

namespace wstl {

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

double eval_predicate(const Predicate& p, const Signal& sig, int t) {
  double h = p.constant;
  for (const auto& [ch, coef] : p.terms) h += coef * sig.sample(ch, t);
  return h;
}

std::size_t RctNode::node_count() const {
  std::size_t n = 1;
  for (const auto& e : edges) n += e.child->node_count();
  return n;
}

std::unique_ptr<RctNode> RctNode::clone() const {
  auto out = std::make_unique<RctNode>();
  out->source = source;
  out->time = time;
  out->op = op;
  out->role = role;
  out->offset = offset;
  out->cached = cached;
  out->edges.reserve(edges.size());
  for (const auto& e : edges) out->edges.push_back({e.child->clone(), e.param});
  return out;
}

// ---------------------------------------------------------------------------
// tree construction

namespace {

ParamId slot(const ParameterTable& table, const FormulaNode* node,
             ParamRole role, int offset) {
  const ParamInfo* info = table.lookup(node, role, offset);
  if (!info)
    throw std::invalid_argument(
        "parameter table does not match the formula (missing slot)");
  return info->id;
}

/// Effective upper offset at instant t: whole-signal operators shrink to the
/// remaining samples, bounded intervals are taken as-is.
int effective_hi(const Interval& iv, int t, int L, int child_horizon) {
  if (!iv.hi)
    throw std::invalid_argument("build_rct requires resolved intervals");
  if (!iv.whole) return *iv.hi;
  return std::min(*iv.hi, L - t - child_horizon);
}

std::unique_ptr<RctNode> build(const FormulaNode& f,
                               const ParameterTable& table, int t, int L) {
  auto node = std::make_unique<RctNode>();
  node->source = &f;
  node->time = t;

  switch (f.kind) {
    case Kind::True:
    case Kind::Pred:
      node->op = RctOp::Leaf;
      return node;

    case Kind::Not:
    case Kind::Implies:
      throw std::invalid_argument("build_rct requires positive normal form");

    case Kind::And:
    case Kind::Or:
      node->op = f.kind == Kind::And ? RctOp::Min : RctOp::Max;
      node->edges.push_back({build(*f.children[0], table, t, L),
                             slot(table, &f, ParamRole::ConjunctLeft, 0)});
      node->edges.push_back({build(*f.children[1], table, t, L),
                             slot(table, &f, ParamRole::ConjunctRight, 0)});
      return node;

    case Kind::Eventually:
    case Kind::Always: {
      node->op = f.kind == Kind::Eventually ? RctOp::Max : RctOp::Min;
      const FormulaNode& child = *f.children[0];
      int hi = effective_hi(f.interval, t, L, horizon(child));
      if (hi < f.interval.lo)
        throw EvalError("signal too short for temporal window");
      for (int off = f.interval.lo; off <= hi; ++off)
        node->edges.push_back(
            {build(child, table, t + off, L),
             slot(table, &f, ParamRole::TemporalOffset, off)});
      return node;
    }

    case Kind::Until: {
      node->op = RctOp::Max;
      const FormulaNode& left = *f.children[0];
      const FormulaNode& right = *f.children[1];
      int child_h = std::max(horizon(left), horizon(right));
      int hi = effective_hi(f.interval, t, L, child_h);
      if (hi < f.interval.lo)
        throw EvalError("signal too short for temporal window");
      for (int off = f.interval.lo; off <= hi; ++off) {
        auto gadget = std::make_unique<RctNode>();
        gadget->source = &f;
        gadget->time = t;
        gadget->op = RctOp::Min;
        gadget->role = RctRole::UntilOffset;
        gadget->offset = off;

        auto window = std::make_unique<RctNode>();
        window->source = &f;
        window->time = t;
        window->op = RctOp::Min;
        window->role = RctRole::UntilLeftWindow;
        window->offset = off;
        for (int k = 0; k < off; ++k)
          window->edges.push_back({build(left, table, t + k, L), std::nullopt});

        gadget->edges.push_back(
            {std::move(window), slot(table, &f, ParamRole::UntilLeft, off)});
        gadget->edges.push_back(
            {build(right, table, t + off, L),
             slot(table, &f, ParamRole::UntilRight, off)});
        node->edges.push_back({std::move(gadget), std::nullopt});
      }
      return node;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::unique_ptr<RctNode> build_rct(const FormulaPtr& f,
                                   const ParameterTable& table, int t,
                                   int L) {
  int h = horizon(*f);
  if (t + h > L)
    throw EvalError("signal too short: need " + std::to_string(t + h) +
                    " samples, have " + std::to_string(L));
  return build(*f, table, t, L);
}

// ---------------------------------------------------------------------------
// tree evaluation

namespace {

double fold(RctOp op, const std::vector<double>& vals) {
  if (op == RctOp::Min) {
    double m = kInf;
    for (double v : vals) m = std::min(m, v);
    return m;
  }
  double m = -kInf;
  for (double v : vals) m = std::max(m, v);
  return m;
}

double eval_cached(RctNode& n, const Signal& sig) {
  double value;
  if (n.is_leaf()) {
    value = n.source->kind == Kind::True
                ? kInf
                : eval_predicate(n.source->pred, sig, n.time);
  } else {
    std::vector<double> vals;
    vals.reserve(n.edges.size());
    for (auto& e : n.edges) vals.push_back(eval_cached(*e.child, sig));
    value = fold(n.op, vals);
  }
  n.cached = value;
  return value;
}

double eval_weighted(const RctNode& n, const Signal& sig, const Valuation& v) {
  if (n.is_leaf())
    return n.source->kind == Kind::True
               ? kInf
               : eval_predicate(n.source->pred, sig, n.time);
  std::vector<double> vals;
  vals.reserve(n.edges.size());
  for (const auto& e : n.edges) {
    double x = eval_weighted(*e.child, sig, v);
    if (e.param) x *= v.at(*e.param);
    vals.push_back(x);
  }
  return fold(n.op, vals);
}

}  // namespace

double eval_robustness(RctNode& rct, const Signal& sig) {
  return eval_cached(rct, sig);
}

double eval_weighted_robustness(const RctNode& rct, const Signal& sig,
                                const Valuation& v) {
  return eval_weighted(rct, sig, v);
}

// ---------------------------------------------------------------------------
// direct recursion on the AST (reference path, no tree)

namespace {

int whole_hi(const FormulaNode& f, int t, int L) {
  int child_h = horizon(*f.children[0]);
  if (f.kind == Kind::Until)
    child_h = std::max(child_h, horizon(*f.children[1]));
  int hi = f.interval.whole
               ? std::min(f.interval.hi ? *f.interval.hi : L, L - t - child_h)
               : *f.interval.hi;
  if (hi < f.interval.lo) throw EvalError("signal too short for temporal window");
  return hi;
}

}  // namespace

double robustness(const FormulaNode& f, const Signal& sig, int t) {
  switch (f.kind) {
    case Kind::True:
      return kInf;
    case Kind::Pred:
      return eval_predicate(f.pred, sig, t);
    case Kind::Not:
      return -robustness(*f.children[0], sig, t);
    case Kind::And:
      return std::min(robustness(*f.children[0], sig, t),
                      robustness(*f.children[1], sig, t));
    case Kind::Or:
      return std::max(robustness(*f.children[0], sig, t),
                      robustness(*f.children[1], sig, t));
    case Kind::Implies:
      return std::max(-robustness(*f.children[0], sig, t),
                      robustness(*f.children[1], sig, t));
    case Kind::Eventually:
    case Kind::Always: {
      int hi = whole_hi(f, t, static_cast<int>(sig.length()));
      double acc = f.kind == Kind::Eventually ? -kInf : kInf;
      for (int off = f.interval.lo; off <= hi; ++off) {
        double v = robustness(*f.children[0], sig, t + off);
        acc = f.kind == Kind::Eventually ? std::max(acc, v) : std::min(acc, v);
      }
      return acc;
    }
    case Kind::Until: {
      int hi = whole_hi(f, t, static_cast<int>(sig.length()));
      double best = -kInf;
      for (int off = f.interval.lo; off <= hi; ++off) {
        double window = kInf;  // min over [t, t+off), empty at off = 0
        for (int k = 0; k < off; ++k)
          window = std::min(window, robustness(*f.children[0], sig, t + k));
        double rhs = robustness(*f.children[1], sig, t + off);
        best = std::max(best, std::min(window, rhs));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable");
}

double weighted_robustness(const FormulaNode& f, const ParameterTable& table,
                           const Signal& sig, int t, const Valuation& v) {
  switch (f.kind) {
    case Kind::True:
      return kInf;
    case Kind::Pred:
      return eval_predicate(f.pred, sig, t);
    case Kind::Not:
      return -weighted_robustness(*f.children[0], table, sig, t, v);
    case Kind::Implies:
      throw std::invalid_argument(
          "weighted semantics require positive normal form");
    case Kind::And:
    case Kind::Or: {
      double a = v.at(slot(table, &f, ParamRole::ConjunctLeft, 0)) *
                 weighted_robustness(*f.children[0], table, sig, t, v);
      double b = v.at(slot(table, &f, ParamRole::ConjunctRight, 0)) *
                 weighted_robustness(*f.children[1], table, sig, t, v);
      return f.kind == Kind::And ? std::min(a, b) : std::max(a, b);
    }
    case Kind::Eventually:
    case Kind::Always: {
      int hi = whole_hi(f, t, static_cast<int>(sig.length()));
      double acc = f.kind == Kind::Eventually ? -kInf : kInf;
      for (int off = f.interval.lo; off <= hi; ++off) {
        double x = v.at(slot(table, &f, ParamRole::TemporalOffset, off)) *
                   weighted_robustness(*f.children[0], table, sig, t + off, v);
        acc = f.kind == Kind::Eventually ? std::max(acc, x) : std::min(acc, x);
      }
      return acc;
    }
    case Kind::Until: {
      int hi = whole_hi(f, t, static_cast<int>(sig.length()));
      double best = -kInf;
      for (int off = f.interval.lo; off <= hi; ++off) {
        double window = kInf;
        for (int k = 0; k < off; ++k)
          window = std::min(
              window, weighted_robustness(*f.children[0], table, sig, t + k, v));
        double lhs = v.at(slot(table, &f, ParamRole::UntilLeft, off)) * window;
        double rhs = v.at(slot(table, &f, ParamRole::UntilRight, off)) *
                     weighted_robustness(*f.children[1], table, sig, t + off, v);
        best = std::max(best, std::min(lhs, rhs));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace wstl
