#pragma once

#include <string>
#include <vector>

namespace wstl {

using VarId = int;

/// Sparse linear expression: sum of coefficient * variable plus a constant.
/// Terms are kept sorted by variable with no duplicates.
class LinExpr {
public:
  LinExpr() = default;
  explicit LinExpr(double constant) : constant_(constant) {}

  static LinExpr var(VarId v, double coef = 1.0);

  void add(VarId v, double coef);
  void add(const LinExpr& other, double scale = 1.0);
  void add_constant(double c) { constant_ += c; }

  double constant() const { return constant_; }
  const std::vector<std::pair<VarId, double>>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  LinExpr operator-(const LinExpr& rhs) const;
  LinExpr operator+(const LinExpr& rhs) const;

private:
  std::vector<std::pair<VarId, double>> terms_;
  double constant_ = 0.0;
};

enum class VarKind { Continuous, Binary };

/// What a variable stands for; also fixes its name prefix in LP exports.
enum class VarTag {
  LogWeight,      // v_p = log(w_p)
  NodeValue,      // y_n, log-domain value of a tree node
  Selector,       // min/max gadget chooser
  PairIndicator,  // z_i, preference pair satisfied
  Aux,
};

struct VarDef {
  VarKind kind = VarKind::Continuous;
  double lb = 0.0;
  double ub = 0.0;
  VarTag tag = VarTag::Aux;
  std::string name;
};

enum class Sense { LE, GE, EQ };

struct Constraint {
  LinExpr expr;
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

/// Mixed-integer linear model: maximize objective subject to the constraint
/// rows and variable bounds. Binaries have bounds [0, 1].
class MilpModel {
public:
  VarId add_var(VarKind kind, double lb, double ub, VarTag tag);
  void add_constraint(LinExpr expr, Sense sense, double rhs);

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_binaries() const;
  const std::vector<VarDef>& vars() const { return vars_; }
  const VarDef& var(VarId v) const { return vars_.at(v); }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  LinExpr objective;  // maximized
  double big_m_default = 1e4;

  /// True when every objective term is an integer coefficient on a binary
  /// variable (lets the solver round bounds down).
  bool objective_is_integral() const;

private:
  std::vector<VarDef> vars_;
  std::vector<Constraint> constraints_;
  int tag_counts_[5] = {0, 0, 0, 0, 0};
};

}  // namespace wstl
