#pragma once

#include <Eigen/Core>

namespace prefelicit {

/// minimize c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
/// Either constraint block may have zero rows.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule. Meant for the small
/// programs built from preference sets (tens of rows and columns).
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9);

}  // namespace prefelicit
