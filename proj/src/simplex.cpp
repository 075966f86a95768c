#include "wstl/simplex.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wstl {

namespace {

constexpr double dinf = std::numeric_limits<double>::infinity();

enum class VStat : char { Basic, AtLower, AtUpper };

/// Bounded-variable primal simplex on a dense tableau. Variables live in
/// [lb, ub]; rows are LE (with slack) or EQ; infeasible starts get artificial
/// columns driven out by a phase-1 objective. Dantzig pricing, switching to
/// Bland's rule after a degenerate stretch; ratio-test ties break on the
/// lowest basis variable index, so runs are deterministic.
class BoundedSimplex {
public:
  BoundedSimplex(const LpProblem& lp, const SimplexOptions& opts)
      : opts_(opts) {
    const int m = static_cast<int>(lp.rows());
    const int n = static_cast<int>(lp.cols());
    m_ = m;
    n_struct_ = n;

    int n_slack = 0;
    for (int i = 0; i < m; ++i)
      if (lp.sense[i] != Sense::EQ) ++n_slack;
    art_begin_ = n + n_slack;
    N_ = art_begin_ + m;  // room for one artificial per row

    W_.setZero(m, N_);
    b_ = lp.rhs;
    lb_.setConstant(N_, 0.0);
    ub_.setConstant(N_, 0.0);
    stat_.assign(N_, VStat::AtLower);

    for (int j = 0; j < n; ++j) {
      lb_[j] = lp.lb[j];
      ub_[j] = lp.ub[j];
      if (std::isfinite(lb_[j]))
        stat_[j] = VStat::AtLower;
      else if (std::isfinite(ub_[j]))
        stat_[j] = VStat::AtUpper;
      else
        throw std::invalid_argument("free variables are not supported");
    }

    // normalize GE rows to LE, add slack columns
    int slack = n;
    slack_of_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
      double scale = lp.sense[i] == Sense::GE ? -1.0 : 1.0;
      W_.row(i).head(n) = scale * lp.A.row(i);
      b_[i] *= scale;
      if (lp.sense[i] != Sense::EQ) {
        W_(i, slack) = 1.0;
        lb_[slack] = 0.0;
        ub_[slack] = dinf;
        slack_of_[i] = slack;
        ++slack;
      }
    }

    // initial point: nonbasic structurals at a finite bound
    Eigen::VectorXd x0(N_);
    for (int j = 0; j < N_; ++j)
      x0[j] = stat_[j] == VStat::AtUpper ? ub_[j] : lb_[j];
    Eigen::VectorXd resid = b_ - W_.leftCols(art_begin_) *
                                     x0.head(art_begin_);

    basis_.assign(m, -1);
    T_.setZero(m, N_);
    beta_.setZero(m);
    for (int i = 0; i < m; ++i) {
      double val = resid[i];
      if (slack_of_[i] >= 0 && val >= 0.0) {
        basis_[i] = slack_of_[i];
        stat_[slack_of_[i]] = VStat::Basic;
        T_.row(i) = W_.row(i);
        beta_[i] = val;
      } else {
        int a = art_begin_ + i;
        double s = val >= 0.0 ? 1.0 : -1.0;
        W_(i, a) = s;
        lb_[a] = 0.0;
        ub_[a] = dinf;
        basis_[i] = a;
        stat_[a] = VStat::Basic;
        T_.row(i) = s * W_.row(i);
        beta_[i] = s * val;
      }
    }

    cost_.setZero(N_);
    struct_cost_ = lp.c;
    c0_ = lp.c0;
  }

  LpResult run() {
    LpResult out;

    // phase 1: drive artificial infeasibility to zero
    bool have_art = false;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= art_begin_) have_art = true;
    if (have_art) {
      cost_.setZero();
      for (int j = art_begin_; j < N_; ++j) cost_[j] = -1.0;
      if (optimize() == LpStatus::Unbounded)
        throw std::runtime_error("phase-1 objective cannot be unbounded");
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i)
        if (basis_[i] >= art_begin_) infeas += beta_[i];
      if (infeas > opts_.feas_tol) {
        out.status = LpStatus::Infeasible;
        out.iterations = total_iters_;
        return out;
      }
      expel_artificials();
    }
    for (int j = art_begin_; j < N_; ++j) ub_[j] = 0.0;  // pin at zero

    cost_.setZero();
    cost_.head(n_struct_) = struct_cost_;
    LpStatus status = optimize();
    out.status = status;
    out.iterations = total_iters_;
    if (status != LpStatus::Optimal) return out;

    refine();
    Eigen::VectorXd x(N_);
    for (int j = 0; j < N_; ++j)
      x[j] = stat_[j] == VStat::AtUpper ? ub_[j] : lb_[j];
    for (int i = 0; i < m_; ++i) x[basis_[i]] = beta_[i];
    for (int j = 0; j < n_struct_; ++j)
      x[j] = std::min(std::max(x[j], lb_[j]), ub_[j]);

    out.x = x.head(n_struct_);
    out.objective = struct_cost_.dot(out.x) + c0_;
    return out;
  }

private:
  LpStatus optimize() {
    bool bland = false;
    int degenerate_run = 0;
    for (int iter = 0;; ++iter, ++total_iters_) {
      if (total_iters_ > opts_.max_iterations)
        throw std::runtime_error("simplex iteration limit exceeded");

      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      Eigen::RowVectorXd d = cost_.transpose() - cb.transpose() * T_;

      int e = -1;
      double best = opts_.pivot_tol;
      for (int j = 0; j < art_begin_; ++j) {
        if (stat_[j] == VStat::Basic) continue;
        if (ub_[j] - lb_[j] <= 1e-12) continue;  // fixed
        double dj = d[j];
        bool improving = (stat_[j] == VStat::AtLower && dj > opts_.pivot_tol) ||
                         (stat_[j] == VStat::AtUpper && dj < -opts_.pivot_tol);
        if (!improving) continue;
        if (bland) {
          e = j;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          e = j;
        }
      }
      if (e < 0) return LpStatus::Optimal;

      double dir = stat_[e] == VStat::AtLower ? 1.0 : -1.0;
      double theta_flip =
          std::isfinite(ub_[e]) && std::isfinite(lb_[e]) ? ub_[e] - lb_[e]
                                                         : dinf;

      double row_theta = dinf;
      int leave_row = -1;
      bool to_upper = false;
      for (int i = 0; i < m_; ++i) {
        double coef = -dir * T_(i, e);  // beta_i moves by coef * theta
        int bv = basis_[i];
        double t;
        bool upper_hit;
        if (coef < -opts_.pivot_tol) {
          if (!std::isfinite(lb_[bv])) continue;
          t = (beta_[i] - lb_[bv]) / (-coef);
          upper_hit = false;
        } else if (coef > opts_.pivot_tol) {
          if (!std::isfinite(ub_[bv])) continue;
          t = (ub_[bv] - beta_[i]) / coef;
          upper_hit = true;
        } else {
          continue;
        }
        if (t < 0.0) t = 0.0;
        if (t < row_theta - 1e-12 ||
            (t < row_theta + 1e-12 && leave_row >= 0 &&
             bv < basis_[leave_row])) {
          row_theta = std::min(row_theta, t);
          leave_row = i;
          to_upper = upper_hit;
        }
      }

      if (theta_flip <= row_theta) {
        if (std::isinf(theta_flip)) return LpStatus::Unbounded;
        beta_ -= T_.col(e) * (dir * theta_flip);
        stat_[e] = stat_[e] == VStat::AtLower ? VStat::AtUpper : VStat::AtLower;
        degenerate_run = theta_flip <= 1e-12 ? degenerate_run + 1 : 0;
        if (degenerate_run > 500) bland = true;
        continue;
      }
      if (leave_row < 0) return LpStatus::Unbounded;

      double theta = row_theta;
      beta_ -= T_.col(e) * (dir * theta);
      double entering_value =
          stat_[e] == VStat::AtLower ? lb_[e] + theta : ub_[e] - theta;

      int lv = basis_[leave_row];
      stat_[lv] = to_upper ? VStat::AtUpper : VStat::AtLower;

      double p = T_(leave_row, e);
      T_.row(leave_row) /= p;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        double f = T_(i, e);
        if (f != 0.0) T_.row(i) -= f * T_.row(leave_row);
      }
      basis_[leave_row] = e;
      stat_[e] = VStat::Basic;
      beta_[leave_row] = entering_value;

      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
      if (degenerate_run > 500) bland = true;
    }
  }

  /// Swap zero-valued basic artificials for structural columns; rows where no
  /// pivot exists are redundant and keep their artificial pinned at zero.
  void expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < art_begin_) continue;
      int e = -1;
      for (int j = 0; j < art_begin_; ++j) {
        if (stat_[j] == VStat::Basic) continue;
        if (std::abs(T_(r, j)) > opts_.pivot_tol) {
          e = j;
          break;
        }
      }
      if (e < 0) continue;
      int lv = basis_[r];
      stat_[lv] = VStat::AtLower;
      double entering_value = stat_[e] == VStat::AtUpper ? ub_[e] : lb_[e];
      double p = T_(r, e);
      T_.row(r) /= p;
      for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double f = T_(i, e);
        if (f != 0.0) T_.row(i) -= f * T_.row(r);
      }
      basis_[r] = e;
      stat_[e] = VStat::Basic;
      beta_[r] = entering_value;
    }
  }

  /// Recompute basic values from a fresh factorization to shed the drift the
  /// rank-one tableau updates accumulate.
  void refine() {
    Eigen::MatrixXd B(m_, m_);
    for (int i = 0; i < m_; ++i) B.col(i) = W_.col(basis_[i]);
    Eigen::VectorXd rhs = b_;
    for (int j = 0; j < N_; ++j) {
      if (stat_[j] == VStat::Basic) continue;
      double xj = stat_[j] == VStat::AtUpper ? ub_[j] : lb_[j];
      if (xj != 0.0) rhs -= W_.col(j) * xj;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    Eigen::VectorXd z = lu.solve(rhs);
    if ((B * z - rhs).cwiseAbs().maxCoeff() < 1e-7) beta_ = z;
  }

  SimplexOptions opts_;
  int m_ = 0, N_ = 0, n_struct_ = 0, art_begin_ = 0;
  Eigen::MatrixXd W_, T_;
  Eigen::VectorXd b_, beta_, lb_, ub_, cost_, struct_cost_;
  double c0_ = 0.0;
  std::vector<int> basis_, slack_of_;
  std::vector<VStat> stat_;
  int total_iters_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp, const SimplexOptions& opts) {
  BoundedSimplex simplex(lp, opts);
  return simplex.run();
}

LpProblem to_lp(const MilpModel& model) {
  const int n = static_cast<int>(model.num_vars());
  const int m = static_cast<int>(model.constraints().size());
  LpProblem lp;
  lp.A.setZero(m, n);
  lp.rhs.setZero(m);
  lp.sense.resize(m);
  lp.c.setZero(n);
  lp.c0 = model.objective.constant();
  lp.lb.setZero(n);
  lp.ub.setZero(n);

  for (int j = 0; j < n; ++j) {
    lp.lb[j] = model.var(j).lb;
    lp.ub[j] = model.var(j).ub;
  }
  for (const auto& [v, c] : model.objective.terms()) lp.c[v] = c;
  for (int i = 0; i < m; ++i) {
    const Constraint& row = model.constraints()[i];
    for (const auto& [v, c] : row.expr.terms()) lp.A(i, v) = c;
    lp.rhs[i] = row.rhs;
    lp.sense[i] = row.sense;
  }
  return lp;
}

}  // namespace wstl
