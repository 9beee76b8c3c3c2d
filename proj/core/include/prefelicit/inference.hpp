#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "prefelicit/model.hpp"
#include "prefelicit/random.hpp"

namespace prefelicit {

/// Strictly positive Dirichlet parameter vector (prior alpha or variational
/// theta).
class DirichletParams {
 public:
  DirichletParams() = default;
  explicit DirichletParams(Eigen::VectorXd values);

  static DirichletParams uniform(int dimension) {
    return DirichletParams(Eigen::VectorXd::Ones(dimension));
  }

  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int k) const { return values_[k]; }
  double concentration() const { return values_.sum(); }
  Eigen::VectorXd mean() const { return values_ / concentration(); }

 private:
  Eigen::VectorXd values_;
};

/// Unconstrained optimisation variable with theta = phi^2.
struct PhiVector {
  Eigen::VectorXd values;

  static PhiVector from_theta(const DirichletParams& theta) {
    return {theta.values().cwiseSqrt()};
  }
  DirichletParams theta() const { return DirichletParams(values.cwiseAbs2()); }
};

struct OptimizerConfig {
  int max_iters = 500;
  int grad_samples = 10000;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t rng_seed = 0;

  /// Reduced budget used for hypothetical refits inside question selection.
  static OptimizerConfig rollout() {
    OptimizerConfig c;
    c.max_iters = 100;
    c.grad_samples = 1000;
    return c;
  }

  void validate() const;
};

enum class Estimator { score, reparam };

Estimator parse_estimator(std::string_view name);
std::string_view to_string(Estimator e);

/// Samples whose coordinates fall below this floor are lifted to it and
/// renormalised before any log-density evaluation.
inline constexpr double kSimplexFloor = 1e-12;

/// Bradley-Terry likelihood of a preference set. Stores the characteristic
/// vectors of the alternatives that appear in the set plus index pairs, so a
/// sample costs one dot product per referenced alternative.
class PreferenceLikelihood {
 public:
  /// Reusable buffers for the per-sample hot path.
  struct Scratch {
    Eigen::VectorXd values;
    Eigen::VectorXd coeff;
  };

  PreferenceLikelihood() = default;
  PreferenceLikelihood(const PerformanceTable& table, const PreferenceSet& q);
  /// Each row is a difference V(preferred) - V(other).
  explicit PreferenceLikelihood(const Eigen::MatrixXd& differences);

  int dimension() const { return static_cast<int>(rows_.cols()); }
  int size() const { return static_cast<int>(preferred_.size()); }

  double log_likelihood(const Eigen::VectorXd& u) const;
  /// Adds d/du log p(Q | u) to grad.
  void accumulate_gradient(const Eigen::VectorXd& u, Eigen::Ref<Eigen::VectorXd> grad) const;

  /// Hot-path variants. accumulate() adds the gradient to grad and returns the
  /// log-likelihood when want_value is set (0 otherwise).
  double log_likelihood(const Eigen::VectorXd& u, Scratch& scratch) const;
  double accumulate(const Eigen::VectorXd& u, Eigen::VectorXd& grad, Scratch& scratch,
                    bool want_value) const;

 private:
  Eigen::MatrixXd rows_;
  std::vector<int> preferred_;
  std::vector<int> other_;  // -1 means the zero vector
};

/// Numerically stable log(sigmoid(x)).
double log_sigmoid(double x);

double log_dirichlet_density(const Eigen::VectorXd& u, const Eigen::VectorXd& params);

/// How log_prior treats a point on the simplex boundary.
enum class BoundaryPolicy { sentinel, raise };

double log_prior(const Eigen::VectorXd& u, const DirichletParams& alpha,
                 BoundaryPolicy policy = BoundaryPolicy::sentinel);

double log_likelihood(const PreferenceSet& q, const Eigen::VectorXd& u,
                      const PerformanceTable& table);

/// Lifts tiny coordinates to kSimplexFloor and renormalises in place.
void clamp_to_interior(Eigen::Ref<Eigen::VectorXd> u);

/// Monte Carlo ELBO with W exact Dirichlet(theta) draws.
double elbo_estimate(const DirichletParams& theta, const PreferenceLikelihood& lik,
                     const DirichletParams& alpha, int samples, Rng& rng);

/// Score-function gradient w.r.t. theta, averaged over the given draws
/// (one draw per column).
Eigen::VectorXd score_gradient_from_samples(const DirichletParams& theta,
                                            const PreferenceLikelihood& lik,
                                            const DirichletParams& alpha,
                                            const Eigen::MatrixXd& draws);

Eigen::VectorXd score_gradient(const DirichletParams& theta, const PreferenceLikelihood& lik,
                               const DirichletParams& alpha, int samples, Rng& rng);

/// Softmax-Gaussian reparameterisation u = softmax(mu + sqrt(Sigma) * eps).
Eigen::VectorXd rt_transform(const PhiVector& phi, const Eigen::VectorXd& noise);

/// Analytic Jacobian du/dphi (row k = u_k, column i = phi_i).
Eigen::MatrixXd rt_jacobian(const PhiVector& phi, const Eigen::VectorXd& noise);

/// Pathwise gradient w.r.t. phi averaged over noise columns: the gradient of
/// log p(Q,u|alpha) - log q(u|theta) flows through u = rt_transform(phi, eps)
/// only, with the density parameter of log q held at the current theta.
Eigen::VectorXd rt_gradient_from_noise(const PhiVector& phi, const PreferenceLikelihood& lik,
                                       const DirichletParams& alpha,
                                       const Eigen::MatrixXd& noise);

Eigen::VectorXd rt_gradient(const PhiVector& phi, const PreferenceLikelihood& lik,
                            const DirichletParams& alpha, int samples, Rng& rng);

struct FitResult {
  DirichletParams theta;
  /// Per-iteration Monte Carlo ELBO estimate from the first (up to 256)
  /// gradient draws of that iteration.
  std::vector<double> elbo_trace;
};

/// Adam ascent on phi. Starts from phi = 1 unless a warm start is given.
/// Throws std::runtime_error on a non-finite gradient.
FitResult fit_posterior(const PreferenceLikelihood& lik, const DirichletParams& alpha,
                        const OptimizerConfig& config, Estimator estimator,
                        const DirichletParams* warm_start = nullptr);

FitResult fit_posterior(const PerformanceTable& table, const PreferenceSet& q,
                        const DirichletParams& alpha, const OptimizerConfig& config,
                        Estimator estimator, const DirichletParams* warm_start = nullptr);

/// W x gamma matrix of Dirichlet draws, one simplex point per row.
struct PosteriorSamples {
  Eigen::MatrixXd samples;
  DirichletParams source;

  int count() const { return static_cast<int>(samples.rows()); }
  /// W x n matrix of comprehensive values U^(w)(a_i).
  Eigen::MatrixXd values(const PerformanceTable& table) const;
};

PosteriorSamples sample_posterior(const DirichletParams& theta, int samples, Rng& rng);

/// Fraction of samples with U(a_i) > U(a_j); exact ties count one half.
double posterior_predictive(const PosteriorSamples& samples, const PerformanceTable& table,
                            int a_i, int a_j);

double posterior_predictive(const DirichletParams& theta, const PerformanceTable& table,
                            int a_i, int a_j, int samples, Rng& rng);

/// Trace of the Dirichlet covariance.
double posterior_variance(const DirichletParams& theta);

}  // namespace prefelicit
