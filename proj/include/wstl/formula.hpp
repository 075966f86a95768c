#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wstl {

class SyntaxError : public std::runtime_error {
public:
  SyntaxError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) +
                           ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Affine predicate h(s) = sum_i coef_i * channel_i + constant, interpreted
/// as h(s) >= 0. Comparisons in the concrete syntax are normalized into this
/// form before the AST is built.
struct Predicate {
  std::vector<std::pair<std::string, double>> terms;  // channel -> coefficient
  double constant = 0.0;

  Predicate negated() const;  // -h >= 0
};

enum class Kind {
  True,
  Pred,
  Not,
  And,
  Or,
  Implies,
  Eventually,
  Always,
  Until,
};

bool is_temporal(Kind k);

/// Discrete time interval attached to a temporal operator. `whole` marks an
/// omitted interval (the operator ranges over the remaining signal); it is
/// given a concrete `hi` by resolve_intervals and is then clamped per
/// evaluation instant during tree construction.
struct Interval {
  int lo = 0;
  std::optional<int> hi;
  bool whole = false;

  bool resolved() const { return hi.has_value(); }
};

struct FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  Kind kind;
  Predicate pred;                    // Kind::Pred only
  Interval interval;                 // temporal kinds only
  std::vector<FormulaPtr> children;  // And/Or/Implies/Until: 2, unary: 1
};

FormulaPtr make_true();
FormulaPtr make_pred(Predicate p);
FormulaPtr make_not(FormulaPtr f);
FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
FormulaPtr make_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr make_eventually(Interval iv, FormulaPtr f);
FormulaPtr make_always(Interval iv, FormulaPtr f);
FormulaPtr make_until(Interval iv, FormulaPtr a, FormulaPtr b);

/// Parse the concrete formula syntax. Grammar (loosest to tightest):
///   implies := or ('->' implies)?
///   or      := and ('|' and)*
///   and     := until ('&' until)*
///   until   := unary ('U' interval? until)?
///   unary   := '!' unary | 'F' interval? unary | 'G' interval? unary | atom
///   atom    := 'true' | '(' formula ')' | '(' id ',' id ')' 'in' box
///            | affine cmp affine
/// Comparisons <=, >=, <, > produce one predicate; '=' expands into a
/// conjunction of the two inequalities. Box membership expands into the
/// four-way conjunction of its side predicates.
FormulaPtr parse_formula(std::string_view text);

/// Canonical text form; parse(print(parse(s))) == parse(s).
std::string print_formula(const FormulaNode& f);

bool structurally_equal(const FormulaNode& a, const FormulaNode& b);

/// Positive normal form: Implies is rewritten, negations are pushed down and
/// folded into predicates by flipping the inequality, so the result contains
/// neither Not nor Implies. Negated Until is expanded per offset into an
/// And/Or/Eventually/Always combination with identical robustness (the
/// grammar has no Release operator).
FormulaPtr to_pnf(const FormulaNode& f);
FormulaPtr to_pnf(const FormulaPtr& f);

/// Minimal signal length L such that robustness at t=0 only touches samples
/// 0..L-1. Pred/True: 1; And/Or/Implies: max of children; Not: child;
/// F/G: hi + child; Until: hi + max of children. Whole-signal intervals
/// count as their lower bound (the operator shrinks to fit).
int horizon(const FormulaNode& f);

/// Replace whole-signal interval markers with concrete upper bounds against a
/// signal of the given length, using each node's earliest evaluation instant.
/// Bounded intervals are left untouched.
FormulaPtr resolve_intervals(const FormulaPtr& f, int signal_length);

/// Clamp every temporal interval endpoint to at most max_time (prefix
/// semantics for partially observed signals). Whole-signal markers are reset
/// for re-resolution against the truncated length.
FormulaPtr clamp_intervals(const FormulaPtr& f, int max_time);

enum class ParamRole {
  ConjunctLeft,    // And/Or, first operand
  ConjunctRight,   // And/Or, second operand
  TemporalOffset,  // Always/Eventually, one per offset
  UntilLeft,       // Until, w1 side, one per offset
  UntilRight,      // Until, w2 side, one per offset
};

using ParamId = std::string;

struct ParamInfo {
  ParamId id;
  const FormulaNode* node = nullptr;
  int node_index = -1;  // pre-order position in the formula
  ParamRole role;
  int offset = 0;  // temporal roles only
};

/// Weight-parameter table of a PNF formula with resolved intervals. Parameter
/// ids are deterministic (pre-order node index, offset ascending, w1 before
/// w2) and stable under interval shrinking, so a valuation learned on the
/// full formula covers every clamped variant.
class ParameterTable {
public:
  const std::vector<ParamInfo>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  bool contains(const ParamId& id) const { return by_id_.count(id) != 0; }
  const ParamInfo& at(const ParamId& id) const;

  /// Id for (node, role, offset); nullptr when the node carries no such slot.
  const ParamInfo* lookup(const FormulaNode* node, ParamRole role,
                          int offset) const;

  void add(ParamInfo info);
  void set_node_index(const FormulaNode* node, int index);
  int node_index(const FormulaNode* node) const;

private:
  std::vector<ParamInfo> params_;
  std::map<ParamId, std::size_t> by_id_;
  std::map<std::tuple<const FormulaNode*, int, int>, std::size_t> by_slot_;
  std::map<const FormulaNode*, int> node_index_;
};

/// pre: f in PNF with resolved intervals. Whole-marker nodes contribute one
/// parameter per offset of their maximal window; instants later than the
/// earliest one reuse the leading offsets.
ParameterTable collect_parameters(const FormulaPtr& f);

/// Strictly positive weight assignment, keyed by ParamId.
class Valuation {
public:
  Valuation() = default;
  explicit Valuation(std::map<ParamId, double> values);

  static Valuation identity(const ParameterTable& table);

  void set(const ParamId& id, double w);
  double at(const ParamId& id) const;  // throws EvalError when missing or <= 0
  bool contains(const ParamId& id) const { return values_.count(id) != 0; }
  const std::map<ParamId, double>& values() const { return values_; }

private:
  std::map<ParamId, double> values_;
};

}  // namespace wstl
