#include "wstl/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wstl {

LinExpr LinExpr::var(VarId v, double coef) {
  LinExpr e;
  e.add(v, coef);
  return e;
}

void LinExpr::add(VarId v, double coef) {
  if (coef == 0.0) return;
  auto it = std::lower_bound(
      terms_.begin(), terms_.end(), v,
      [](const auto& term, VarId id) { return term.first < id; });
  if (it != terms_.end() && it->first == v) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, {v, coef});
  }
}

void LinExpr::add(const LinExpr& other, double scale) {
  for (const auto& [v, c] : other.terms_) add(v, scale * c);
  constant_ += scale * other.constant_;
}

LinExpr LinExpr::operator-(const LinExpr& rhs) const {
  LinExpr out = *this;
  out.add(rhs, -1.0);
  return out;
}

LinExpr LinExpr::operator+(const LinExpr& rhs) const {
  LinExpr out = *this;
  out.add(rhs, 1.0);
  return out;
}

namespace {
const char* tag_prefix(VarTag tag) {
  switch (tag) {
    case VarTag::LogWeight: return "v";
    case VarTag::NodeValue: return "y";
    case VarTag::Selector: return "d";
    case VarTag::PairIndicator: return "z";
    case VarTag::Aux: return "x";
  }
  return "x";
}
}  // namespace

VarId MilpModel::add_var(VarKind kind, double lb, double ub, VarTag tag) {
  if (kind == VarKind::Binary) {
    lb = 0.0;
    ub = 1.0;
  }
  if (lb > ub) throw std::invalid_argument("variable bounds crossed");
  VarDef def;
  def.kind = kind;
  def.lb = lb;
  def.ub = ub;
  def.tag = tag;
  int idx = tag_counts_[static_cast<int>(tag)]++;
  def.name = std::string(tag_prefix(tag)) + std::to_string(idx);
  vars_.push_back(std::move(def));
  return static_cast<VarId>(vars_.size() - 1);
}

void MilpModel::add_constraint(LinExpr expr, Sense sense, double rhs) {
  Constraint c;
  // fold the expression constant into the right-hand side
  rhs -= expr.constant();
  expr.add_constant(-expr.constant());
  c.expr = std::move(expr);
  c.sense = sense;
  c.rhs = rhs;
  constraints_.push_back(std::move(c));
}

std::size_t MilpModel::num_binaries() const {
  std::size_t n = 0;
  for (const auto& v : vars_)
    if (v.kind == VarKind::Binary) ++n;
  return n;
}

bool MilpModel::objective_is_integral() const {
  if (objective.constant() != std::floor(objective.constant())) return false;
  for (const auto& [v, c] : objective.terms()) {
    if (vars_[v].kind != VarKind::Binary) return false;
    if (c != std::floor(c)) return false;
  }
  return true;
}

}  // namespace wstl
