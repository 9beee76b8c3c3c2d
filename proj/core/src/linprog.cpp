#include "prefelicit/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace prefelicit {

namespace {

class Tableau {
 public:
  // Row 0..m-1 are constraints, the last row is the reduced-cost row.
  // Column `cols_` (the last) is the right-hand side.
  Tableau(Eigen::Index rows, Eigen::Index cols)
      : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)), basis_(rows, -1), cols_(cols) {}

  double& at(Eigen::Index r, Eigen::Index c) { return t_(r, c); }
  double rhs(Eigen::Index r) const { return t_(r, cols_); }
  double& rhs(Eigen::Index r) { return t_(r, cols_); }
  Eigen::Index rows() const { return static_cast<Eigen::Index>(basis_.size()); }
  Eigen::Index obj_row() const { return rows(); }
  std::vector<Eigen::Index>& basis() { return basis_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Prices out the basic columns so the objective row holds reduced costs.
  void set_objective(const Eigen::VectorXd& cost) {
    t_.row(obj_row()).setZero();
    t_.row(obj_row()).head(cost.size()) = cost.transpose();
    for (Eigen::Index r = 0; r < rows(); ++r) {
      const double f = t_(obj_row(), basis_[r]);
      if (f != 0.0) t_.row(obj_row()) -= f * t_.row(r);
    }
  }

  // Minimises over columns [0, active). Returns false when unbounded.
  bool optimize(Eigen::Index active, double tol) {
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index c = 0; c < active; ++c) {
        if (t_(obj_row(), c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows(); ++r) {
        const double a = t_(r, enter);
        if (a > tol) {
          const double ratio = rhs(r) / a;
          if (ratio < best - tol || (ratio <= best + tol && leave >= 0 && basis_[r] < basis_[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  double objective() const { return -t_(obj_row(), cols_); }

  void drop_row(Eigen::Index r) {
    const Eigen::Index last = t_.rows() - 1;
    Eigen::MatrixXd next(t_.rows() - 1, t_.cols());
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i <= last; ++i) {
      if (i != r) next.row(k++) = t_.row(i);
    }
    t_ = std::move(next);
    basis_.erase(basis_.begin() + r);
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index cols_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const Eigen::Index n = lp.c.size();
  const Eigen::Index m_ub = lp.a_ub.rows();
  const Eigen::Index m_eq = lp.a_eq.rows();
  if ((m_ub > 0 && (lp.a_ub.cols() != n || lp.b_ub.size() != m_ub)) ||
      (m_eq > 0 && (lp.a_eq.cols() != n || lp.b_eq.size() != m_eq))) {
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  }
  const Eigen::Index m = m_ub + m_eq;
  // Columns: original | slacks | artificials.
  const Eigen::Index n_struct = n + m_ub;
  const Eigen::Index n_total = n_struct + m;
  Tableau tab(m, n_total);

  for (Eigen::Index r = 0; r < m; ++r) {
    const bool ub = r < m_ub;
    const Eigen::Index src = ub ? r : r - m_ub;
    double b = ub ? lp.b_ub[src] : lp.b_eq[src];
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      tab.at(r, c) = sign * (ub ? lp.a_ub(src, c) : lp.a_eq(src, c));
    }
    if (ub) tab.at(r, n + r) = sign;
    tab.at(r, n_struct + r) = 1.0;
    tab.rhs(r) = sign * b;
    tab.basis()[r] = n_struct + r;
  }

  LpResult result;
  if (m > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_total);
    phase1.tail(m).setOnes();
    tab.set_objective(phase1);
    tab.optimize(n_total, tol);
    if (tab.objective() > 1e-7) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis or drop redundant rows.
    for (Eigen::Index r = tab.rows() - 1; r >= 0; --r) {
      if (tab.basis()[r] < n_struct) continue;
      Eigen::Index col = -1;
      for (Eigen::Index c = 0; c < n_struct; ++c) {
        if (std::abs(tab.at(r, c)) > tol) {
          col = c;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(r, col);
      } else {
        tab.drop_row(r);
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n_total);
  phase2.head(n) = lp.c;
  tab.set_objective(phase2);
  if (!tab.optimize(n_struct, tol)) {
    result.status = LpStatus::unbounded;
    return result;
  }
  result.status = LpStatus::optimal;
  result.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    if (tab.basis()[r] < n) result.x[tab.basis()[r]] = tab.rhs(r);
  }
  result.objective = lp.c.dot(result.x);
  return result;
}

}  // namespace prefelicit
