#include "prefelicit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace prefelicit {

namespace {

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

void require_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw std::invalid_argument(std::string(what) + ": expected a square matrix with n >= 2");
  }
}

}  // namespace

Eigen::MatrixXd compute_pwi(const Eigen::MatrixXd& values) {
  const Eigen::Index w = values.rows();
  const Eigen::Index n = values.cols();
  if (w < 1) throw std::invalid_argument("compute_pwi: no samples");
  Eigen::MatrixXd pwi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double wins = 0.0;
      for (Eigen::Index s = 0; s < w; ++s) {
        const double a = values(s, i);
        const double b = values(s, j);
        wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
      }
      pwi(i, j) = wins / static_cast<double>(w);
      pwi(j, i) = 1.0 - pwi(i, j);
    }
  }
  return pwi;
}

Eigen::MatrixXd compute_pwi(const PosteriorSamples& samples, const PerformanceTable& table) {
  return compute_pwi(samples.values(table));
}

Eigen::MatrixXd compute_rai(const Eigen::MatrixXd& values) {
  const Eigen::Index w = values.rows();
  const Eigen::Index n = values.cols();
  if (w < 1) throw std::invalid_argument("compute_rai: no samples");
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (Eigen::Index s = 0; s < w; ++s) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values(s, a) > values(s, b); });
    for (Eigen::Index k = 0; k < n; ++k) counts(order[k], k) += 1.0;
  }
  return counts / static_cast<double>(w);
}

Eigen::MatrixXd compute_rai(const PosteriorSamples& samples, const PerformanceTable& table) {
  return compute_rai(samples.values(table));
}

Eigen::MatrixXd compute_poi(const Eigen::MatrixXd& values) {
  const Eigen::Index w = values.rows();
  const Eigen::Index n = values.cols();
  if (w < 1) throw std::invalid_argument("compute_poi: no samples");
  Eigen::MatrixXd poi = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double ij = 0.0;
      double ji = 0.0;
      for (Eigen::Index s = 0; s < w; ++s) {
        if (values(s, i) >= values(s, j)) ij += 1.0;
        if (values(s, j) >= values(s, i)) ji += 1.0;
      }
      poi(i, j) = ij / static_cast<double>(w);
      poi(j, i) = ji / static_cast<double>(w);
    }
  }
  return poi;
}

double asp(const Eigen::MatrixXd& poi, const Eigen::VectorXd& true_values) {
  require_square(poi, "asp");
  const Eigen::Index n = poi.rows();
  if (true_values.size() != n) throw std::invalid_argument("asp: true value count mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && true_values[i] >= true_values[j]) total += poi(i, j);
    }
  }
  return 2.0 * total / static_cast<double>(n * (n - 1));
}

double f_var(const DirichletParams& theta) { return posterior_variance(theta); }

double f_pwi(const Eigen::MatrixXd& pwi) {
  require_square(pwi, "f_pwi");
  const Eigen::Index n = pwi.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) total += plogp(pwi(i, j));
    }
  }
  return total / static_cast<double>(n * (n - 1));
}

double f_rai(const Eigen::MatrixXd& rai) {
  require_square(rai, "f_rai");
  double total = 0.0;
  for (Eigen::Index i = 0; i < rai.rows(); ++i) {
    for (Eigen::Index k = 0; k < rai.cols(); ++k) total += plogp(rai(i, k));
  }
  return total / static_cast<double>(rai.rows());
}

UncertaintySummary summarize_uncertainty(const DirichletParams& theta,
                                         const PosteriorSamples& samples,
                                         const PerformanceTable& table) {
  const Eigen::MatrixXd values = samples.values(table);
  return {f_var(theta), f_pwi(compute_pwi(values)), f_rai(compute_rai(values))};
}

}  // namespace prefelicit
