#include "edlab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edlab/errors.hpp"

namespace edlab::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VStat : char { Basic, AtLower, AtUpper };

// Dense two-phase bounded-variable primal simplex on the standardized form
// A x = b, l <= x <= u. Dantzig pricing with index tie-breaks, switching to
// Bland's rule after a run of degenerate pivots.
class Simplex {
 public:
  Simplex(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c,
          Eigen::VectorXd l, Eigen::VectorXd u)
      : a_(std::move(a)),
        b_(std::move(b)),
        cost_(std::move(c)),
        lo_(std::move(l)),
        up_(std::move(u)),
        m_(static_cast<int>(a_.rows())),
        n_(static_cast<int>(a_.cols())) {}

  LpStatus run() {
    init_basis();
    if (m_ > 0) {
      Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n_ + m_);
      phase1_cost.tail(m_).setConstant(1.0);
      if (!iterate(phase1_cost, /*phase1=*/true)) return LpStatus::Unbounded;
      const double feas_tol = 1e-8 * std::max(1.0, b_.cwiseAbs().maxCoeff());
      if (artificial_mass() > feas_tol) return LpStatus::Infeasible;
      drive_out_artificials();
      up_.tail(m_).setZero();  // lock artificials at zero for phase 2
    }
    Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n_ + m_);
    phase2_cost.head(cost_.size()) = cost_;
    if (!iterate(phase2_cost, /*phase1=*/false)) return LpStatus::Unbounded;
    return LpStatus::Optimal;
  }

  double value_of(int j) const {
    if (vstat_[j] == VStat::AtLower) return lo_[j];
    if (vstat_[j] == VStat::AtUpper) return up_[j];
    for (int i = 0; i < m_; ++i)
      if (basis_[i] == j) return xb_[i];
    return 0.0;
  }

  Eigen::VectorXd primal(int n_struct) const {
    Eigen::VectorXd x(n_struct);
    std::vector<double> val(n_ + m_);
    for (int j = 0; j < n_ + m_; ++j)
      val[j] = vstat_[j] == VStat::AtLower ? lo_[j]
               : vstat_[j] == VStat::AtUpper ? up_[j] : 0.0;
    for (int i = 0; i < m_; ++i) val[basis_[i]] = xb_[i];
    for (int j = 0; j < n_struct; ++j) x[j] = val[j];
    return x;
  }

  // Row multipliers from B^T y = c_B over the original columns.
  Eigen::VectorXd duals() const {
    if (m_ == 0) return Eigen::VectorXd::Zero(0);
    Eigen::MatrixXd basis_cols(m_, m_);
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < n_) {
        basis_cols.col(i) = a_.col(j);
        cb[i] = j < cost_.size() ? cost_[j] : 0.0;
      } else {
        basis_cols.col(i) = Eigen::VectorXd::Unit(m_, j - n_) * art_sign_[j - n_];
        cb[i] = 0.0;
      }
    }
    return basis_cols.transpose().fullPivLu().solve(cb);
  }

  int iterations() const { return iterations_; }

  void check_feasible(double tol) const {
    Eigen::VectorXd x(n_ + m_);
    for (int j = 0; j < n_ + m_; ++j)
      x[j] = vstat_[j] == VStat::AtLower ? lo_[j]
             : vstat_[j] == VStat::AtUpper ? up_[j] : 0.0;
    for (int i = 0; i < m_; ++i) x[basis_[i]] = xb_[i];
    for (int j = 0; j < n_ + m_; ++j) {
      if (x[j] < lo_[j] - tol || x[j] > up_[j] + tol)
        throw NumericalFailure("simplex: bound violated at optimum");
    }
    Eigen::MatrixXd full(m_, n_ + m_);
    full.leftCols(n_) = a_;
    full.rightCols(m_).setZero();
    for (int i = 0; i < m_; ++i) full(i, n_ + i) = art_sign_[i];
    if (m_ > 0 && (full * x - b_).cwiseAbs().maxCoeff() > tol)
      throw NumericalFailure("simplex: row activity violated at optimum");
  }

 private:
  void init_basis() {
    const int total = n_ + m_;
    vstat_.assign(total, VStat::AtLower);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        vstat_[j] = VStat::AtLower;
      } else if (std::isfinite(up_[j])) {
        vstat_[j] = VStat::AtUpper;
      } else {
        throw NumericalFailure("simplex: free variables are not supported");
      }
    }
    lo_.conservativeResize(total);
    up_.conservativeResize(total);
    lo_.tail(m_).setZero();
    up_.tail(m_).setConstant(kInf);

    Eigen::VectorXd residual = b_;
    for (int j = 0; j < n_; ++j) {
      const double v = vstat_[j] == VStat::AtLower ? lo_[j] : up_[j];
      if (v != 0.0) residual -= a_.col(j) * v;
    }

    // One artificial per row; the initial basis is the (sign-scaled)
    // identity, so the starting tableau is diag(sign) * A.
    basis_.resize(m_);
    xb_.resize(m_);
    art_sign_.assign(m_, 1.0);
    tableau_.resize(m_, total);
    tableau_.leftCols(n_) = a_;
    tableau_.rightCols(m_).setZero();
    for (int i = 0; i < m_; ++i) {
      art_sign_[i] = residual[i] >= 0.0 ? 1.0 : -1.0;
      if (art_sign_[i] < 0.0) tableau_.row(i).head(n_) *= -1.0;
      tableau_(i, n_ + i) = 1.0;
      basis_[i] = n_ + i;
      xb_[i] = std::abs(residual[i]);
      vstat_[n_ + i] = VStat::Basic;
    }
  }

  double artificial_mass() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_) s += xb_[i];
    return s;
  }

  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      int enter = -1;
      for (int j = 0; j < n_; ++j) {
        if (vstat_[j] == VStat::Basic) continue;
        if (std::abs(tableau_(r, j)) > 1e-7) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) pivot(r, enter, 0.0, +1, true);
      // Otherwise the row is redundant; the artificial stays basic at zero
      // and its locked bounds keep it there.
    }
  }

  // Returns false on unboundedness.
  bool iterate(const Eigen::VectorXd& c, bool phase1) {
    const int total = n_ + m_;
    const double cost_scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    const double tol_d = 1e-9 * cost_scale;

    Eigen::VectorXd d = reduced_costs(c);
    bool bland = false;
    int degenerate_run = 0;
    const long max_iter = 20000 + 200L * (m_ + total);

    for (long it = 0;; ++it) {
      if (it > max_iter) throw NumericalFailure("simplex: iteration limit hit");
      if (it > 0 && it % 64 == 0) d = reduced_costs(c);  // control drift

      int enter = -1;
      double best = tol_d;
      for (int j = 0; j < n_; ++j) {  // artificials never enter
        if (vstat_[j] == VStat::Basic) continue;
        double viol = 0.0;
        if (vstat_[j] == VStat::AtLower && d[j] < -tol_d) viol = -d[j];
        if (vstat_[j] == VStat::AtUpper && d[j] > tol_d) viol = d[j];
        if (viol <= 0.0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (viol > best) {
          best = viol;
          enter = j;
        }
      }
      if (enter < 0) return true;

      const int dir = vstat_[enter] == VStat::AtLower ? +1 : -1;
      double t_best = up_[enter] - lo_[enter];  // bound-flip distance
      int leave_row = -1;
      int leave_to_lower = 1;
      double leave_mag = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double w = tableau_(i, enter);
        const double delta = -dir * w;
        double t_i;
        int to_lower;
        if (delta > 1e-11) {
          const double head = up_[basis_[i]] - xb_[i];
          if (!std::isfinite(head)) continue;
          t_i = std::max(0.0, head) / delta;
          to_lower = 0;
        } else if (delta < -1e-11) {
          t_i = std::max(0.0, xb_[i] - lo_[basis_[i]]) / (-delta);
          to_lower = 1;
        } else {
          continue;
        }
        bool take;
        if (t_i < t_best - 1e-12) {
          take = true;
        } else if (t_i <= t_best + 1e-12 && leave_row >= 0) {
          take = bland ? basis_[i] < basis_[leave_row] : std::abs(w) > leave_mag;
        } else if (t_i <= t_best && leave_row < 0 && !std::isfinite(t_best)) {
          take = true;
        } else {
          take = false;
        }
        if (take) {
          t_best = std::min(t_best, t_i);
          leave_row = i;
          leave_to_lower = to_lower;
          leave_mag = std::abs(w);
        }
      }

      if (!std::isfinite(t_best)) {
        if (phase1) throw NumericalFailure("simplex: unbounded phase-1 ray");
        return false;
      }
      const double t = std::max(0.0, t_best);
      degenerate_run = t <= 1e-12 ? degenerate_run + 1 : 0;
      if (degenerate_run > 40) bland = true;
      if (t > 1e-12) bland = false;

      if (leave_row < 0) {
        // Entering variable runs to its opposite bound; basis unchanged.
        for (int i = 0; i < m_; ++i)
          xb_[i] += t * (-dir * tableau_(i, enter));
        vstat_[enter] = dir > 0 ? VStat::AtUpper : VStat::AtLower;
        continue;
      }

      pivot(leave_row, enter, t, dir, leave_to_lower != 0);
      const double d_enter = d[enter];
      d -= d_enter * tableau_.row(leave_row).transpose();
      d[enter] = 0.0;
      ++iterations_;
    }
  }

  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& c) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = c[basis_[i]];
    Eigen::VectorXd d = c;
    d.noalias() -= tableau_.transpose() * cb;
    for (int i = 0; i < m_; ++i) d[basis_[i]] = 0.0;
    return d;
  }

  void pivot(int r, int enter, double t, int dir, bool leaving_to_lower) {
    const double piv = tableau_(r, enter);
    if (std::abs(piv) < 1e-12)
      throw NumericalFailure("simplex: pivot element vanished");

    const double enter_start =
        vstat_[enter] == VStat::AtLower ? lo_[enter] : up_[enter];
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      xb_[i] += t * (-dir * tableau_(i, enter));
    }
    const int leaving = basis_[r];
    vstat_[leaving] = leaving_to_lower ? VStat::AtLower : VStat::AtUpper;
    vstat_[enter] = VStat::Basic;
    basis_[r] = enter;
    xb_[r] = enter_start + dir * t;

    tableau_.row(r) /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = tableau_(i, enter);
      if (f != 0.0) tableau_.row(i) -= f * tableau_.row(r);
    }
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd cost_;
  Eigen::VectorXd lo_, up_;
  int m_, n_;

  Eigen::MatrixXd tableau_;
  std::vector<int> basis_;
  Eigen::VectorXd xb_;
  std::vector<double> art_sign_;
  std::vector<VStat> vstat_;
  int iterations_ = 0;
};

struct Standardized {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd l, u;
  int n_struct = 0;
  int eq_row = -1;  // row index of the equality, -1 if absent
};

// Split two-sided rows into <= rows, one slack each; the equality row gets
// no slack.
Standardized standardize(const LpProblem& p) {
  const int n = static_cast<int>(p.cost.size());
  if (p.lower.size() != n || p.upper.size() != n)
    throw DimensionMismatch("lp: bound vectors do not match cost length");
  for (int j = 0; j < n; ++j) {
    if (!(std::isfinite(p.lower[j]) && std::isfinite(p.upper[j])))
      throw InvalidParams("lp: variable boxes must be finite");
    if (p.lower[j] > p.upper[j] + 1e-15)
      throw InvalidParams("lp: lower bound exceeds upper bound");
  }

  struct OneSided {
    const Eigen::VectorXd* coeffs;
    double rhs;
    double sign;  // +1 keeps row direction, -1 negates
  };
  std::vector<OneSided> ineqs;
  for (const auto& r : p.rows) {
    if (r.coeffs.size() != n)
      throw DimensionMismatch("lp: row coefficient length mismatch");
    if (std::isfinite(r.upper)) ineqs.push_back({&r.coeffs, r.upper, +1.0});
    if (std::isfinite(r.lower)) ineqs.push_back({&r.coeffs, -r.lower, -1.0});
  }
  const bool has_eq = p.eq.has_value();
  if (has_eq && p.eq->coeffs.size() != n)
    throw DimensionMismatch("lp: equality coefficient length mismatch");

  const int m = static_cast<int>(ineqs.size()) + (has_eq ? 1 : 0);
  const int total = n + static_cast<int>(ineqs.size());

  Standardized s;
  s.n_struct = n;
  s.a = Eigen::MatrixXd::Zero(m, total);
  s.b = Eigen::VectorXd::Zero(m);
  s.l = Eigen::VectorXd::Zero(total);
  s.u = Eigen::VectorXd::Constant(total, kInf);
  s.l.head(n) = p.lower;
  s.u.head(n) = p.upper;

  for (std::size_t i = 0; i < ineqs.size(); ++i) {
    const int row = static_cast<int>(i);
    s.a.row(row).head(n) = ineqs[i].sign * ineqs[i].coeffs->transpose();
    s.a(row, n + row) = 1.0;
    s.b[row] = ineqs[i].rhs;
  }
  if (has_eq) {
    s.eq_row = m - 1;
    s.a.row(s.eq_row).head(n) = p.eq->coeffs.transpose();
    s.b[s.eq_row] = p.eq->target;
  }
  return s;
}

}  // namespace

LpSolution solve(const LpProblem& problem) {
  Standardized s = standardize(problem);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(s.a.cols());
  c.head(problem.cost.size()) = problem.cost;

  Simplex simplex(s.a, s.b, c, s.l, s.u);
  LpSolution sol;
  sol.status = simplex.run();
  sol.iterations = simplex.iterations();
  if (sol.status != LpStatus::Optimal) return sol;

  const double scale =
      std::max(1.0, s.b.size() > 0 ? s.b.cwiseAbs().maxCoeff() : 0.0);
  simplex.check_feasible(1e-7 * scale);

  sol.x = simplex.primal(s.n_struct);
  sol.objective = problem.cost.dot(sol.x);
  if (s.eq_row >= 0) {
    Eigen::VectorXd y = simplex.duals();
    sol.eq_dual = y[s.eq_row];
  }
  return sol;
}

LpProblem dispatch_problem(const grid::Network& net,
                           const Eigen::VectorXd& nodal_demand, double g_target) {
  if (nodal_demand.size() != net.n_load())
    throw DimensionMismatch("dispatch_problem: demand length != load count");
  LpProblem p;
  p.cost = net.generator_costs();
  p.lower = Eigen::VectorXd::Zero(net.n_gen());
  p.upper = net.generator_capacities();
  if (net.n_line() > 0) {
    const Eigen::VectorXd shifted = net.Hd() * nodal_demand;
    const Eigen::VectorXd caps = net.line_capacities();
    for (int l = 0; l < net.n_line(); ++l) {
      RowBound row;
      row.coeffs = net.Hg().row(l).transpose();
      row.lower = shifted[l] - caps[l];
      row.upper = shifted[l] + caps[l];
      p.rows.push_back(std::move(row));
    }
  }
  p.eq = EqRow{Eigen::VectorXd::Ones(net.n_gen()), g_target};
  return p;
}

std::pair<double, double> feasible_range(const grid::Network& net,
                                         const Eigen::VectorXd& nodal_demand) {
  LpProblem p = dispatch_problem(net, nodal_demand, 0.0);
  p.eq.reset();

  p.cost = Eigen::VectorXd::Ones(net.n_gen());
  LpSolution lo = solve(p);
  if (lo.status != LpStatus::Optimal)
    throw Infeasible("line limits unsatisfiable by any dispatch");
  p.cost = -Eigen::VectorXd::Ones(net.n_gen());
  LpSolution hi = solve(p);
  if (hi.status != LpStatus::Optimal)
    throw Infeasible("line limits unsatisfiable by any dispatch");

  double g_min = lo.objective;
  double g_max = -hi.objective;
  if (g_min > g_max) g_min = g_max;  // guard against rounding inversion
  return {g_min, g_max};
}

}  // namespace edlab::lp
