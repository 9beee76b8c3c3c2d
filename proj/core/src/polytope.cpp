#include "prefelicit/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prefelicit/linprog.hpp"

namespace prefelicit {

PolytopeSpec PolytopeSpec::simplex(int dimension) {
  if (dimension < 1) throw std::invalid_argument("PolytopeSpec: dimension must be positive");
  PolytopeSpec p;
  p.dimension = dimension;
  p.a = Eigen::MatrixXd::Identity(dimension, dimension);
  p.b = Eigen::VectorXd::Zero(dimension);
  return p;
}

void PolytopeSpec::add_constraint(const Eigen::VectorXd& row, double rhs) {
  if (row.size() != dimension) throw std::invalid_argument("PolytopeSpec: constraint dimension mismatch");
  a.conservativeResize(a.rows() + 1, dimension);
  b.conservativeResize(b.size() + 1);
  a.row(a.rows() - 1) = row.transpose();
  b[b.size() - 1] = rhs;
}

double PolytopeSpec::max_violation(const Eigen::VectorXd& u) const {
  if (a.rows() == 0) return 0.0;
  return std::max(0.0, (b - a * u).maxCoeff());
}

PolytopeSpec preference_polytope(const PerformanceTable& table, const PreferenceSet& q,
                                 double delta) {
  PolytopeSpec p = PolytopeSpec::simplex(table.dimension());
  const Eigen::MatrixXd d = statement_differences(table, q);
  for (Eigen::Index r = 0; r < d.rows(); ++r) p.add_constraint(d.row(r).transpose(), delta);
  return p;
}

std::optional<InteriorPoint> chebyshev_center(const PolytopeSpec& poly) {
  const int g = poly.dimension;
  const Eigen::Index rows = poly.a.rows();
  // Variables (u, r): maximise r subject to a_i.u - |P a_i| r >= b_i, where
  // P projects onto the simplex's tangent space, and sum(u) = 1.
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(g + 1);
  lp.c[g] = -1.0;
  lp.a_ub = Eigen::MatrixXd::Zero(rows + 1, g + 1);
  lp.b_ub = Eigen::VectorXd::Zero(rows + 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::VectorXd ai = poly.a.row(i).transpose();
    const double norm = (ai.array() - ai.mean()).matrix().norm();
    lp.a_ub.row(i).head(g) = -ai.transpose();
    lp.a_ub(i, g) = norm;
    lp.b_ub[i] = -poly.b[i];
  }
  // The simplex is bounded, but a cap keeps the program bounded when g = 1.
  lp.a_ub(rows, g) = 1.0;
  lp.b_ub[rows] = 1.0;
  lp.a_eq = Eigen::MatrixXd::Zero(1, g + 1);
  lp.a_eq.row(0).head(g).setOnes();
  lp.b_eq = Eigen::VectorXd::Ones(1);

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::optimal) return std::nullopt;
  InteriorPoint out;
  out.point = res.x.head(g);
  out.point /= out.point.sum();
  out.radius = g == 1 ? 0.0 : res.x[g];
  if (poly.max_violation(out.point) > 1e-9) return std::nullopt;
  return out;
}

bool is_feasible(const PolytopeSpec& poly) { return chebyshev_center(poly).has_value(); }

Eigen::MatrixXd hit_and_run(const PolytopeSpec& poly, int samples, Rng& rng,
                            const HitAndRunOptions& options) {
  if (samples < 1) throw std::invalid_argument("hit_and_run: samples must be positive");
  if (options.burn_in < 0 || options.thinning < 1) {
    throw std::invalid_argument("hit_and_run: burn_in >= 0 and thinning >= 1 required");
  }
  const auto center = chebyshev_center(poly);
  if (!center) throw InfeasibleError("hit_and_run: polytope is empty");

  const int g = poly.dimension;
  Eigen::MatrixXd out(samples, g);
  Eigen::VectorXd x = center->point;
  if (g == 1 || center->radius <= 0.0) {
    for (int w = 0; w < samples; ++w) out.row(w) = x.transpose();
    return out;
  }

  std::normal_distribution<double> normal;
  Eigen::VectorXd slack = poly.a * x - poly.b;
  Eigen::VectorXd dir(g);
  Eigen::VectorXd rate(poly.a.rows());
  const long total = static_cast<long>(options.burn_in) + static_cast<long>(samples) * options.thinning;
  int kept = 0;
  for (long step = 0; step < total; ++step) {
    for (int k = 0; k < g; ++k) dir[k] = normal(rng);
    dir.array() -= dir.mean();
    dir.normalize();
    rate.noalias() = poly.a * dir;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      const double s = std::max(slack[i], 0.0);
      if (rate[i] > 1e-14) {
        lo = std::max(lo, -s / rate[i]);
      } else if (rate[i] < -1e-14) {
        hi = std::min(hi, -s / rate[i]);
      }
    }
    if (lo < hi) {
      const double t = lo + (hi - lo) * uniform01(rng);
      x.noalias() += t * dir;
      slack.noalias() += t * rate;
    }
    if (step >= options.burn_in && (step - options.burn_in) % options.thinning == options.thinning - 1) {
      out.row(kept++) = x.transpose();
    }
  }
  return out;
}

}  // namespace prefelicit
