#pragma once

#include <Eigen/Core>

#include "prefelicit/inference.hpp"
#include "prefelicit/model.hpp"

namespace prefelicit {

/// n x n pairwise winning indices; entry (i, j) is the share of samples with
/// U(a_i) > U(a_j), exact ties split evenly. The diagonal is 0.
Eigen::MatrixXd compute_pwi(const Eigen::MatrixXd& values);
Eigen::MatrixXd compute_pwi(const PosteriorSamples& samples, const PerformanceTable& table);

/// n x n rank acceptability indices; entry (i, k) is the share of samples
/// ranking a_i at position k (0 = best). Ties are broken by lower index.
Eigen::MatrixXd compute_rai(const Eigen::MatrixXd& values);
Eigen::MatrixXd compute_rai(const PosteriorSamples& samples, const PerformanceTable& table);

/// Share of samples with U(a_i) >= U(a_j); diagonal 1.
Eigen::MatrixXd compute_poi(const Eigen::MatrixXd& values);

/// Average support of the outranking indices for the true weak order.
double asp(const Eigen::MatrixXd& poi, const Eigen::VectorXd& true_values);

double f_var(const DirichletParams& theta);
double f_pwi(const Eigen::MatrixXd& pwi);
double f_rai(const Eigen::MatrixXd& rai);

struct UncertaintySummary {
  double f_var = 0.0;
  double f_pwi = 0.0;
  double f_rai = 0.0;
};

/// All three metrics from one set of posterior draws.
UncertaintySummary summarize_uncertainty(const DirichletParams& theta,
                                         const PosteriorSamples& samples,
                                         const PerformanceTable& table);

}  // namespace prefelicit
