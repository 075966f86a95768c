#include "wstl/formula.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wstl/signal.hpp"

namespace wstl {

namespace {

std::string fmt_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, end);
}

FormulaPtr node(Kind k) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  return n;
}

}  // namespace

Predicate Predicate::negated() const {
  Predicate out;
  out.terms.reserve(terms.size());
  for (const auto& [ch, coef] : terms) out.terms.emplace_back(ch, -coef);
  out.constant = -constant;
  return out;
}

bool is_temporal(Kind k) {
  return k == Kind::Eventually || k == Kind::Always || k == Kind::Until;
}

FormulaPtr make_true() { return node(Kind::True); }

FormulaPtr make_pred(Predicate p) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Pred;
  n->pred = std::move(p);
  return n;
}

FormulaPtr make_not(FormulaPtr f) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Not;
  n->children = {std::move(f)};
  return n;
}

namespace {
FormulaPtr binary(Kind k, FormulaPtr a, FormulaPtr b) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  n->children = {std::move(a), std::move(b)};
  return n;
}
}  // namespace

FormulaPtr make_and(FormulaPtr a, FormulaPtr b) {
  return binary(Kind::And, std::move(a), std::move(b));
}
FormulaPtr make_or(FormulaPtr a, FormulaPtr b) {
  return binary(Kind::Or, std::move(a), std::move(b));
}
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) {
  return binary(Kind::Implies, std::move(a), std::move(b));
}

namespace {
void check_interval(const Interval& iv) {
  if (iv.lo < 0) throw std::invalid_argument("negative interval bound");
  if (iv.hi && *iv.hi < iv.lo && !iv.whole)
    throw std::invalid_argument("reversed interval");
}
}  // namespace

FormulaPtr make_eventually(Interval iv, FormulaPtr f) {
  check_interval(iv);
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Eventually;
  n->interval = iv;
  n->children = {std::move(f)};
  return n;
}

FormulaPtr make_always(Interval iv, FormulaPtr f) {
  check_interval(iv);
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Always;
  n->interval = iv;
  n->children = {std::move(f)};
  return n;
}

FormulaPtr make_until(Interval iv, FormulaPtr a, FormulaPtr b) {
  check_interval(iv);
  auto n = std::make_shared<FormulaNode>();
  n->kind = Kind::Until;
  n->interval = iv;
  n->children = {std::move(a), std::move(b)};
  return n;
}

// ---------------------------------------------------------------------------
// printing

namespace {

std::string print_pred(const Predicate& p) {
  std::string out;
  bool first = true;
  for (const auto& [ch, coef] : p.terms) {
    if (first) {
      if (coef == 1.0)
        out += ch;
      else if (coef == -1.0)
        out += "-" + ch;
      else
        out += fmt_num(coef) + "*" + ch;
      first = false;
    } else {
      double a = coef;
      out += a < 0 ? " - " : " + ";
      a = std::abs(a);
      out += a == 1.0 ? ch : fmt_num(a) + "*" + ch;
    }
  }
  if (first) {
    out += fmt_num(p.constant);
  } else if (p.constant != 0.0) {
    out += p.constant < 0 ? " - " : " + ";
    out += fmt_num(std::abs(p.constant));
  }
  return out + " >= 0";
}

std::string print_interval(const Interval& iv) {
  if (iv.whole) return "";
  return "[" + std::to_string(iv.lo) + "," + std::to_string(*iv.hi) + "]";
}

}  // namespace

std::string print_formula(const FormulaNode& f) {
  switch (f.kind) {
    case Kind::True:
      return "true";
    case Kind::Pred:
      return print_pred(f.pred);
    case Kind::Not:
      return "!(" + print_formula(*f.children[0]) + ")";
    case Kind::And:
      return "(" + print_formula(*f.children[0]) + " & " +
             print_formula(*f.children[1]) + ")";
    case Kind::Or:
      return "(" + print_formula(*f.children[0]) + " | " +
             print_formula(*f.children[1]) + ")";
    case Kind::Implies:
      return "(" + print_formula(*f.children[0]) + " -> " +
             print_formula(*f.children[1]) + ")";
    case Kind::Eventually:
      return "F" + print_interval(f.interval) + " (" +
             print_formula(*f.children[0]) + ")";
    case Kind::Always:
      return "G" + print_interval(f.interval) + " (" +
             print_formula(*f.children[0]) + ")";
    case Kind::Until:
      return "(" + print_formula(*f.children[0]) + " U" +
             print_interval(f.interval) + " " +
             print_formula(*f.children[1]) + ")";
  }
  return "";
}

bool structurally_equal(const FormulaNode& a, const FormulaNode& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Kind::Pred) {
    if (a.pred.terms != b.pred.terms) return false;
    if (a.pred.constant != b.pred.constant) return false;
  }
  if (is_temporal(a.kind)) {
    if (a.interval.lo != b.interval.lo || a.interval.whole != b.interval.whole)
      return false;
    if (a.interval.hi.has_value() != b.interval.hi.has_value()) return false;
    if (a.interval.hi && *a.interval.hi != *b.interval.hi) return false;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// positive normal form

namespace {

FormulaPtr pnf(const FormulaNode& f, bool neg);

/// not (a U[lo,hi] b) has no Release form in this grammar; expand per offset:
///   min over t' of max( max_{t'' in [t,t+t')} -r(a,t''), -r(b,t+t') )
/// which is the conjunction over t' of (F[0,t'-1] !a | G[t',t'] !b), with the
/// t'=0 term reducing to G[0,0] !b.
FormulaPtr expand_negated_until(const FormulaNode& f) {
  if (!f.interval.hi)
    throw std::invalid_argument(
        "negated Until with a whole-signal interval: resolve intervals first");
  int lo = f.interval.lo, hi = *f.interval.hi;
  FormulaPtr acc;
  for (int off = lo; off <= hi; ++off) {
    FormulaPtr term;
    Interval at{off, off, false};
    if (off == 0) {
      term = make_always(at, pnf(*f.children[1], true));
    } else {
      Interval window{0, off - 1, false};
      term = make_or(make_eventually(window, pnf(*f.children[0], true)),
                     make_always(at, pnf(*f.children[1], true)));
    }
    acc = acc ? make_and(std::move(acc), std::move(term)) : std::move(term);
  }
  return acc;
}

FormulaPtr pnf(const FormulaNode& f, bool neg) {
  switch (f.kind) {
    case Kind::True:
      if (!neg) return make_true();
      // no False node: a predicate with constant -inf plays its role
      return make_pred(Predicate{{}, -std::numeric_limits<double>::infinity()});
    case Kind::Pred:
      return make_pred(neg ? f.pred.negated() : f.pred);
    case Kind::Not:
      return pnf(*f.children[0], !neg);
    case Kind::And:
      return neg ? make_or(pnf(*f.children[0], true), pnf(*f.children[1], true))
                 : make_and(pnf(*f.children[0], false),
                            pnf(*f.children[1], false));
    case Kind::Or:
      return neg ? make_and(pnf(*f.children[0], true),
                            pnf(*f.children[1], true))
                 : make_or(pnf(*f.children[0], false),
                           pnf(*f.children[1], false));
    case Kind::Implies:
      // a -> b == !a | b
      return neg ? make_and(pnf(*f.children[0], false),
                            pnf(*f.children[1], true))
                 : make_or(pnf(*f.children[0], true),
                           pnf(*f.children[1], false));
    case Kind::Eventually:
      return neg ? make_always(f.interval, pnf(*f.children[0], true))
                 : make_eventually(f.interval, pnf(*f.children[0], false));
    case Kind::Always:
      return neg ? make_eventually(f.interval, pnf(*f.children[0], true))
                 : make_always(f.interval, pnf(*f.children[0], false));
    case Kind::Until:
      if (!neg)
        return make_until(f.interval, pnf(*f.children[0], false),
                          pnf(*f.children[1], false));
      return expand_negated_until(f);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

FormulaPtr to_pnf(const FormulaNode& f) { return pnf(f, false); }
FormulaPtr to_pnf(const FormulaPtr& f) { return pnf(*f, false); }

// ---------------------------------------------------------------------------
// horizon / interval resolution

int horizon(const FormulaNode& f) {
  switch (f.kind) {
    case Kind::True:
    case Kind::Pred:
      return 1;
    case Kind::Not:
      return horizon(*f.children[0]);
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
      return std::max(horizon(*f.children[0]), horizon(*f.children[1]));
    case Kind::Eventually:
    case Kind::Always: {
      int b = f.interval.whole ? f.interval.lo : *f.interval.hi;
      return b + horizon(*f.children[0]);
    }
    case Kind::Until: {
      int b = f.interval.whole ? f.interval.lo : *f.interval.hi;
      return b + std::max(horizon(*f.children[0]), horizon(*f.children[1]));
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

FormulaPtr resolve(const FormulaPtr& f, int earliest, int length) {
  switch (f->kind) {
    case Kind::True:
    case Kind::Pred:
      return f;
    case Kind::Not:
      return make_not(resolve(f->children[0], earliest, length));
    case Kind::And:
    case Kind::Or:
    case Kind::Implies: {
      auto a = resolve(f->children[0], earliest, length);
      auto b = resolve(f->children[1], earliest, length);
      return binary(f->kind, std::move(a), std::move(b));
    }
    case Kind::Eventually:
    case Kind::Always: {
      Interval iv = f->interval;
      auto child = resolve(f->children[0], earliest + iv.lo, length);
      if (iv.whole) {
        int hi = length - earliest - horizon(*child);
        if (hi < iv.lo)
          throw EvalError("signal too short for whole-signal operator");
        iv.hi = hi;
      }
      auto n = std::make_shared<FormulaNode>();
      n->kind = f->kind;
      n->interval = iv;
      n->children = {std::move(child)};
      return n;
    }
    case Kind::Until: {
      Interval iv = f->interval;
      auto left = resolve(f->children[0], earliest, length);
      auto right = resolve(f->children[1], earliest + iv.lo, length);
      if (iv.whole) {
        int hi = length - earliest -
                 std::max(horizon(*left), horizon(*right));
        if (hi < iv.lo)
          throw EvalError("signal too short for whole-signal operator");
        iv.hi = hi;
      }
      auto n = std::make_shared<FormulaNode>();
      n->kind = Kind::Until;
      n->interval = iv;
      n->children = {std::move(left), std::move(right)};
      return n;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

FormulaPtr resolve_intervals(const FormulaPtr& f, int signal_length) {
  return resolve(f, 0, signal_length);
}

FormulaPtr clamp_intervals(const FormulaPtr& f, int max_time) {
  if (max_time < 0) throw std::invalid_argument("max_time must be >= 0");
  switch (f->kind) {
    case Kind::True:
    case Kind::Pred:
      return f;
    case Kind::Not:
      return make_not(clamp_intervals(f->children[0], max_time));
    case Kind::And:
    case Kind::Or:
    case Kind::Implies:
      return binary(f->kind, clamp_intervals(f->children[0], max_time),
                    clamp_intervals(f->children[1], max_time));
    default: {
      Interval iv = f->interval;
      iv.lo = std::min(iv.lo, max_time);
      if (iv.whole)
        iv.hi.reset();  // re-resolve against the truncated length
      else
        iv.hi = std::min(*iv.hi, max_time);
      auto n = std::make_shared<FormulaNode>();
      n->kind = f->kind;
      n->interval = iv;
      for (const auto& c : f->children)
        n->children.push_back(clamp_intervals(c, max_time));
      return n;
    }
  }
}

// ---------------------------------------------------------------------------
// parameter table

const ParamInfo& ParameterTable::at(const ParamId& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end())
    throw std::out_of_range("unknown parameter id: " + id);
  return params_[it->second];
}

const ParamInfo* ParameterTable::lookup(const FormulaNode* node,
                                        ParamRole role, int offset) const {
  auto it = by_slot_.find({node, static_cast<int>(role), offset});
  return it == by_slot_.end() ? nullptr : &params_[it->second];
}

void ParameterTable::add(ParamInfo info) {
  by_id_[info.id] = params_.size();
  by_slot_[{info.node, static_cast<int>(info.role), info.offset}] =
      params_.size();
  params_.push_back(std::move(info));
}

void ParameterTable::set_node_index(const FormulaNode* node, int index) {
  node_index_[node] = index;
}

int ParameterTable::node_index(const FormulaNode* node) const {
  auto it = node_index_.find(node);
  return it == node_index_.end() ? -1 : it->second;
}

namespace {

void collect(const FormulaNode& f, ParameterTable& table, int& counter) {
  if (table.node_index(&f) >= 0)
    throw std::invalid_argument(
        "formula is a DAG, not a tree: shared subformula node");
  int idx = counter++;
  table.set_node_index(&f, idx);
  std::string base = "n" + std::to_string(idx);

  switch (f.kind) {
    case Kind::True:
    case Kind::Pred:
      return;
    case Kind::Not:
    case Kind::Implies:
      throw std::invalid_argument(
          "collect_parameters requires positive normal form");
    case Kind::And:
    case Kind::Or:
      table.add({base + ".w1", &f, idx, ParamRole::ConjunctLeft, 0});
      table.add({base + ".w2", &f, idx, ParamRole::ConjunctRight, 0});
      break;
    case Kind::Eventually:
    case Kind::Always: {
      if (!f.interval.hi)
        throw std::invalid_argument(
            "collect_parameters requires resolved intervals");
      for (int off = f.interval.lo; off <= *f.interval.hi; ++off)
        table.add({base + ".t" + std::to_string(off), &f, idx,
                   ParamRole::TemporalOffset, off});
      break;
    }
    case Kind::Until: {
      if (!f.interval.hi)
        throw std::invalid_argument(
            "collect_parameters requires resolved intervals");
      for (int off = f.interval.lo; off <= *f.interval.hi; ++off) {
        std::string stem = base + ".u" + std::to_string(off);
        table.add({stem + ".w1", &f, idx, ParamRole::UntilLeft, off});
        table.add({stem + ".w2", &f, idx, ParamRole::UntilRight, off});
      }
      break;
    }
  }
  for (const auto& c : f.children) collect(*c, table, counter);
}

}  // namespace

ParameterTable collect_parameters(const FormulaPtr& f) {
  ParameterTable table;
  int counter = 0;
  collect(*f, table, counter);
  return table;
}

// ---------------------------------------------------------------------------
// valuation

Valuation::Valuation(std::map<ParamId, double> values)
    : values_(std::move(values)) {}

Valuation Valuation::identity(const ParameterTable& table) {
  Valuation v;
  for (const auto& p : table.params()) v.values_[p.id] = 1.0;
  return v;
}

void Valuation::set(const ParamId& id, double w) { values_[id] = w; }

double Valuation::at(const ParamId& id) const {
  auto it = values_.find(id);
  if (it == values_.end())
    throw EvalError("missing weight for parameter " + id);
  if (!(it->second > 0.0))
    throw EvalError("weight for parameter " + id + " must be positive");
  return it->second;
}

}  // namespace wstl
