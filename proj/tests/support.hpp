#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "prefelicit/inference.hpp"
#include "prefelicit/model.hpp"

namespace support {

using prefelicit::PerformanceTable;
using prefelicit::PreferenceSet;

/// Table with one criterion per column on [0, 1] and the given sub-interval
/// counts (default 1 each); ids a1..an.
inline PerformanceTable unit_table(const std::vector<std::vector<double>>& rows,
                                   std::vector<int> subintervals = {}) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.front().size());
  if (subintervals.empty()) subintervals.assign(static_cast<std::size_t>(m), 1);
  Eigen::MatrixXd perf(n, m);
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    ids.push_back("a" + std::to_string(i + 1));
    for (Eigen::Index j = 0; j < m; ++j) perf(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  std::vector<prefelicit::Criterion> criteria;
  for (Eigen::Index j = 0; j < m; ++j) {
    criteria.push_back({"g" + std::to_string(j + 1), 0.0, 1.0, subintervals[static_cast<std::size_t>(j)]});
  }
  return PerformanceTable(std::move(ids), std::move(criteria), std::move(perf));
}

/// Brute-force posterior on the 1-simplex u = (t, 1 - t): trapezoid weights
/// over `points` equally spaced t, proportional to prior x Bradley-Terry
/// likelihood, evaluated straight from the definitions.
struct GridPosterior {
  std::vector<double> t;
  std::vector<double> weight;  // sums to 1
};

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Rows of `differences` are V(preferred) - V(other) on the first two
/// coordinates; repeated rows are allowed.
inline GridPosterior grid_posterior_from_differences(const Eigen::MatrixXd& differences,
                                                     double alpha1 = 1.0, double alpha2 = 1.0,
                                                     int points = 201) {
  GridPosterior g;
  double total = 0.0;
  for (int k = 0; k < points; ++k) {
    const double t = static_cast<double>(k) / (points - 1);
    double density = std::pow(t, alpha1 - 1.0) * std::pow(1.0 - t, alpha2 - 1.0);
    if (!std::isfinite(density)) density = 0.0;
    for (Eigen::Index r = 0; r < differences.rows(); ++r) {
      density *= logistic(t * differences(r, 0) + (1 - t) * differences(r, 1));
    }
    const double trap = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    g.t.push_back(t);
    g.weight.push_back(density * trap);
    total += density * trap;
  }
  for (double& w : g.weight) w /= total;
  return g;
}

inline GridPosterior grid_posterior(const PerformanceTable& table, const PreferenceSet& q,
                                    double alpha1 = 1.0, double alpha2 = 1.0, int points = 201) {
  const Eigen::MatrixXd& v = table.characteristics();
  Eigen::MatrixXd d(static_cast<Eigen::Index>(q.size()), 2);
  for (std::size_t r = 0; r < q.size(); ++r) {
    for (int c = 0; c < 2; ++c) d(static_cast<Eigen::Index>(r), c) = v(q[r].preferred, c) - v(q[r].other, c);
  }
  return grid_posterior_from_differences(d, alpha1, alpha2, points);
}

/// P(U(a_i) > U(a_j)) under the grid posterior, ties split evenly.
inline double grid_predictive(const GridPosterior& g, const PerformanceTable& table, int i, int j) {
  const Eigen::MatrixXd& v = table.characteristics();
  double p = 0.0;
  for (std::size_t k = 0; k < g.t.size(); ++k) {
    const double t = g.t[k];
    const double ui = t * v(i, 0) + (1 - t) * v(i, 1);
    const double uj = t * v(j, 0) + (1 - t) * v(j, 1);
    p += g.weight[k] * (ui > uj ? 1.0 : (ui == uj ? 0.5 : 0.0));
  }
  return p;
}

/// Dirichlet variance trace written out per coordinate.
inline double dirichlet_trace_variance(const Eigen::VectorXd& theta) {
  const double t0 = theta.sum();
  double v = 0.0;
  for (Eigen::Index k = 0; k < theta.size(); ++k) v += theta[k] * (t0 - theta[k]) / (t0 * t0 * (t0 + 1.0));
  return v;
}

/// log Dir(u | a) straight from the density formula.
inline double log_dir(const Eigen::VectorXd& u, const Eigen::VectorXd& a) {
  double out = std::lgamma(a.sum());
  for (Eigen::Index k = 0; k < a.size(); ++k) out += (a[k] - 1.0) * std::log(u[k]) - std::lgamma(a[k]);
  return out;
}

/// Bradley-Terry log-likelihood summed over the statements.
inline double bt_loglik(const Eigen::MatrixXd& v, const PreferenceSet& q, const Eigen::VectorXd& u) {
  double out = 0.0;
  for (const auto& s : q) {
    const double a = u.dot(v.row(s.preferred));
    const double b = u.dot(v.row(s.other));
    out += a - std::log(std::exp(a) + std::exp(b));
  }
  return out;
}

/// Softmax-Gaussian transform written out from its definition.
inline Eigen::VectorXd transform_oracle(const Eigen::VectorXd& phi, const Eigen::VectorXd& eps) {
  const auto g = phi.size();
  const double dim = static_cast<double>(g);
  const Eigen::VectorXd theta = phi.cwiseAbs2();
  double mean_log = 0.0;
  double inv_sum = 0.0;
  for (Eigen::Index i = 0; i < g; ++i) {
    mean_log += std::log(theta[i]) / dim;
    inv_sum += 1.0 / theta[i];
  }
  Eigen::VectorXd z(g);
  for (Eigen::Index k = 0; k < g; ++k) {
    const double sigma = (1.0 / theta[k]) * (1.0 - 2.0 / dim) + inv_sum / (dim * dim);
    z[k] = std::log(theta[k]) - mean_log + std::sqrt(sigma) * eps[k];
  }
  const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace support
