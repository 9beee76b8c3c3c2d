#include "prefelicit/inference.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "prefelicit/adam.hpp"

namespace prefelicit {

namespace {

constexpr double kPhiFloor = 1e-3;

double log_dirichlet_normalizer(const Eigen::VectorXd& params) {
  double out = std::lgamma(params.sum());
  for (Eigen::Index k = 0; k < params.size(); ++k) out -= std::lgamma(params[k]);
  return out;
}

// Per-iteration constants of the softmax-Gaussian transform, plus the
// per-sample pathwise gradient.
class ReparamEvaluator {
 public:
  ReparamEvaluator(const PhiVector& phi, const PreferenceLikelihood& lik,
                   const DirichletParams& alpha)
      : phi_(phi.values), lik_(lik), alpha_(alpha.values()) {
    const auto g = phi_.size();
    dim_ = static_cast<double>(g);
    theta_ = phi_.cwiseAbs2();
    const Eigen::VectorXd log_theta = theta_.array().log();
    mu_ = log_theta.array() - log_theta.mean();
    const double inv_sum = theta_.cwiseInverse().sum();
    scale_.resize(g);
    for (Eigen::Index k = 0; k < g; ++k) {
      const double var = (1.0 / theta_[k]) * (1.0 - 2.0 / dim_) + inv_sum / (dim_ * dim_);
      scale_[k] = std::sqrt(std::max(var, 0.0));
    }
    prior_minus_q_ = alpha_ - theta_;
    log_norm_q_ = log_dirichlet_normalizer(theta_);
    log_norm_p_ = log_dirichlet_normalizer(alpha_);
    u_.resize(g);
    grad_u_.resize(g);
    grad_z_.resize(g);
  }

  void transform(const Eigen::VectorXd& noise, Eigen::VectorXd& u) const {
    const auto g = mu_.size();
    u.resize(g);
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < g; ++k) {
      u[k] = mu_[k] + scale_[k] * noise[k];
      top = std::max(top, u[k]);
    }
    double total = 0.0;
    for (Eigen::Index k = 0; k < g; ++k) {
      u[k] = std::exp(u[k] - top);
      total += u[k];
    }
    u /= total;
  }

  // Adds this draw's phi-gradient to grad. Returns the ELBO integrand when
  // want_value is set, 0 otherwise.
  double accumulate(const Eigen::VectorXd& noise, Eigen::VectorXd& grad, bool want_value) {
    const auto g = phi_.size();
    transform(noise, u_);
    clamp_to_interior(u_);
    grad_u_.setZero();
    double f = lik_.accumulate(u_, grad_u_, scratch_, want_value);
    if (want_value) {
      double log_ratio = log_norm_p_ - log_norm_q_;
      for (Eigen::Index k = 0; k < g; ++k) log_ratio += prior_minus_q_[k] * std::log(u_[k]);
      f += log_ratio;
    }
    if (g == 1) return f;

    double inner = 0.0;
    for (Eigen::Index k = 0; k < g; ++k) {
      grad_u_[k] += prior_minus_q_[k] / u_[k];
      inner += u_[k] * grad_u_[k];
    }
    double mean_gz = 0.0;
    double cross = 0.0;
    for (Eigen::Index k = 0; k < g; ++k) {
      grad_z_[k] = u_[k] * (grad_u_[k] - inner);
      mean_gz += grad_z_[k];
      if (scale_[k] > 0.0) cross += grad_z_[k] * noise[k] / scale_[k];
    }
    mean_gz /= dim_;
    const double diag_coef = 1.0 - 2.0 / dim_;
    const double cross_coef = cross / (dim_ * dim_);
    for (Eigen::Index i = 0; i < g; ++i) {
      const double p = phi_[i];
      const double own = scale_[i] > 0.0 ? grad_z_[i] * noise[i] / scale_[i] : 0.0;
      grad[i] += (2.0 / p) * (grad_z_[i] - mean_gz) - (diag_coef * own + cross_coef) / (p * p * p);
    }
    return f;
  }

 private:
  Eigen::VectorXd phi_;
  const PreferenceLikelihood& lik_;
  Eigen::VectorXd alpha_;
  double dim_ = 0.0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd scale_;
  Eigen::VectorXd prior_minus_q_;
  double log_norm_q_ = 0.0;
  double log_norm_p_ = 0.0;
  Eigen::VectorXd u_;
  Eigen::VectorXd grad_u_;
  Eigen::VectorXd grad_z_;
  PreferenceLikelihood::Scratch scratch_;
};

class ScoreEvaluator {
 public:
  ScoreEvaluator(const DirichletParams& theta, const PreferenceLikelihood& lik,
                 const DirichletParams& alpha)
      : theta_(theta.values()), lik_(lik), alpha_(alpha.values()) {
    prior_minus_q_ = alpha_ - theta_;
    log_norm_ratio_ = log_dirichlet_normalizer(alpha_) - log_dirichlet_normalizer(theta_);
    digamma_shift_.resize(theta_.size());
    log_u_.resize(theta_.size());
    const double d0 = boost::math::digamma(theta_.sum());
    for (Eigen::Index k = 0; k < theta_.size(); ++k) {
      digamma_shift_[k] = d0 - boost::math::digamma(theta_[k]);
    }
  }

  // The draw is clamped to the interior in place. Returns the ELBO integrand.
  double accumulate(Eigen::VectorXd& u, Eigen::VectorXd& grad) {
    clamp_to_interior(u);
    const auto g = u.size();
    double f = lik_.log_likelihood(u, scratch_) + log_norm_ratio_;
    for (Eigen::Index k = 0; k < g; ++k) {
      log_u_[k] = std::log(u[k]);
      f += prior_minus_q_[k] * log_u_[k];
    }
    for (Eigen::Index k = 0; k < g; ++k) grad[k] += f * (digamma_shift_[k] + log_u_[k]);
    return f;
  }

 private:
  Eigen::VectorXd theta_;
  const PreferenceLikelihood& lik_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd prior_minus_q_;
  double log_norm_ratio_ = 0.0;
  Eigen::VectorXd digamma_shift_;
  Eigen::VectorXd log_u_;
  PreferenceLikelihood::Scratch scratch_;
};

// ELBO trace entries use at most this many of an iteration's draws.
constexpr int kTraceSamples = 256;

void check_dims(const PreferenceLikelihood& lik, Eigen::Index params, Eigen::Index alpha) {
  if (params != alpha || (lik.size() > 0 && lik.dimension() != params)) {
    throw std::invalid_argument("inference: dimension mismatch");
  }
}

}  // namespace

DirichletParams::DirichletParams(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("DirichletParams: empty");
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) {
      throw std::invalid_argument("DirichletParams: entries must be positive and finite");
    }
  }
}

void OptimizerConfig::validate() const {
  if (max_iters < 1 || grad_samples < 1) throw std::invalid_argument("optimizer: iterations and samples must be positive");
  if (!(learning_rate > 0.0) || !(eps > 0.0)) throw std::invalid_argument("optimizer: learning rate and eps must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("optimizer: beta1 and beta2 must lie in (0, 1)");
  }
}

Estimator parse_estimator(std::string_view name) {
  if (name == "rt" || name == "reparam") return Estimator::reparam;
  if (name == "score" || name == "no-rt" || name == "nort") return Estimator::score;
  throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

std::string_view to_string(Estimator e) { return e == Estimator::reparam ? "rt" : "score"; }

PreferenceLikelihood::PreferenceLikelihood(const PerformanceTable& table, const PreferenceSet& q) {
  q.validate(table.size());
  std::vector<int> slot(static_cast<std::size_t>(table.size()), -1);
  std::vector<int> used;
  auto index_for = [&](int alt) {
    if (slot[alt] < 0) {
      slot[alt] = static_cast<int>(used.size());
      used.push_back(alt);
    }
    return slot[alt];
  };
  for (const auto& s : q) {
    preferred_.push_back(index_for(s.preferred));
    other_.push_back(index_for(s.other));
  }
  rows_.resize(static_cast<Eigen::Index>(used.size()), table.dimension());
  for (std::size_t r = 0; r < used.size(); ++r) {
    rows_.row(static_cast<Eigen::Index>(r)) = table.characteristics().row(used[r]);
  }
}

PreferenceLikelihood::PreferenceLikelihood(const Eigen::MatrixXd& differences)
    : rows_(differences) {
  for (Eigen::Index d = 0; d < differences.rows(); ++d) {
    preferred_.push_back(static_cast<int>(d));
    other_.push_back(-1);
  }
}

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double PreferenceLikelihood::log_likelihood(const Eigen::VectorXd& u) const {
  Scratch scratch;
  return log_likelihood(u, scratch);
}

void PreferenceLikelihood::accumulate_gradient(const Eigen::VectorXd& u,
                                               Eigen::Ref<Eigen::VectorXd> grad) const {
  Scratch scratch;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
  accumulate(u, g, scratch, false);
  grad += g;
}

double PreferenceLikelihood::log_likelihood(const Eigen::VectorXd& u, Scratch& scratch) const {
  if (preferred_.empty()) return 0.0;
  scratch.values.noalias() = rows_ * u;
  double out = 0.0;
  for (std::size_t d = 0; d < preferred_.size(); ++d) {
    const double delta =
        scratch.values[preferred_[d]] - (other_[d] >= 0 ? scratch.values[other_[d]] : 0.0);
    out += log_sigmoid(delta);
  }
  return out;
}

double PreferenceLikelihood::accumulate(const Eigen::VectorXd& u, Eigen::VectorXd& grad,
                                        Scratch& scratch, bool want_value) const {
  if (preferred_.empty()) return 0.0;
  scratch.values.noalias() = rows_ * u;
  scratch.coeff.setZero(rows_.rows());
  double out = 0.0;
  for (std::size_t d = 0; d < preferred_.size(); ++d) {
    const int p = preferred_[d];
    const int o = other_[d];
    const double delta = scratch.values[p] - (o >= 0 ? scratch.values[o] : 0.0);
    const double e = std::exp(-std::abs(delta));
    // d/dx log sigmoid(x) = sigmoid(-x)
    const double w = delta >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
    if (want_value) out += delta >= 0.0 ? -std::log1p(e) : delta - std::log1p(e);
    scratch.coeff[p] += w;
    if (o >= 0) scratch.coeff[o] -= w;
  }
  grad.noalias() += rows_.transpose() * scratch.coeff;
  return out;
}

double log_dirichlet_density(const Eigen::VectorXd& u, const Eigen::VectorXd& params) {
  if (u.size() != params.size()) throw std::invalid_argument("log_dirichlet_density: dimension mismatch");
  double out = log_dirichlet_normalizer(params);
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    if (params[k] != 1.0) out += (params[k] - 1.0) * std::log(u[k]);
  }
  return out;
}

double log_prior(const Eigen::VectorXd& u, const DirichletParams& alpha, BoundaryPolicy policy) {
  if (u.size() != alpha.size()) throw std::invalid_argument("log_prior: dimension mismatch");
  if ((u.array() <= 0.0).any()) {
    if (policy == BoundaryPolicy::raise) throw std::domain_error("log_prior: point on the simplex boundary");
    return -std::numeric_limits<double>::infinity();
  }
  return log_dirichlet_density(u, alpha.values());
}

double log_likelihood(const PreferenceSet& q, const Eigen::VectorXd& u,
                      const PerformanceTable& table) {
  if (q.empty()) return 0.0;
  return PreferenceLikelihood(table, q).log_likelihood(u);
}

void clamp_to_interior(Eigen::Ref<Eigen::VectorXd> u) {
  if ((u.array() < kSimplexFloor).any()) {
    u = u.cwiseMax(kSimplexFloor);
    u /= u.sum();
  }
}

double elbo_estimate(const DirichletParams& theta, const PreferenceLikelihood& lik,
                     const DirichletParams& alpha, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("elbo_estimate: need at least one sample");
  check_dims(lik, theta.size(), alpha.size());
  const double norm_q = log_dirichlet_normalizer(theta.values());
  const double norm_p = log_dirichlet_normalizer(alpha.values());
  Eigen::VectorXd u(theta.size());
  double total = 0.0;
  for (int w = 0; w < samples; ++w) {
    sample_dirichlet(theta.values(), rng, u);
    clamp_to_interior(u);
    const Eigen::ArrayXd log_u = u.array().log();
    total += lik.log_likelihood(u) + norm_p + ((alpha.values().array() - 1.0) * log_u).sum() -
             norm_q - ((theta.values().array() - 1.0) * log_u).sum();
  }
  return total / samples;
}

Eigen::VectorXd score_gradient_from_samples(const DirichletParams& theta,
                                            const PreferenceLikelihood& lik,
                                            const DirichletParams& alpha,
                                            const Eigen::MatrixXd& draws) {
  check_dims(lik, theta.size(), alpha.size());
  if (draws.rows() != theta.size() || draws.cols() < 1) {
    throw std::invalid_argument("score_gradient: draws must be gamma x W");
  }
  ScoreEvaluator eval(theta, lik, alpha);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd u(theta.size());
  for (Eigen::Index w = 0; w < draws.cols(); ++w) {
    u = draws.col(w);
    eval.accumulate(u, grad);
  }
  return grad / static_cast<double>(draws.cols());
}

Eigen::VectorXd score_gradient(const DirichletParams& theta, const PreferenceLikelihood& lik,
                               const DirichletParams& alpha, int samples, Rng& rng) {
  if (samples < 2) throw std::invalid_argument("score_gradient: need at least two samples");
  Eigen::MatrixXd draws(theta.size(), samples);
  for (int w = 0; w < samples; ++w) sample_dirichlet(theta.values(), rng, draws.col(w));
  return score_gradient_from_samples(theta, lik, alpha, draws);
}

Eigen::VectorXd rt_transform(const PhiVector& phi, const Eigen::VectorXd& noise) {
  if (noise.size() != phi.values.size()) throw std::invalid_argument("rt_transform: dimension mismatch");
  const PreferenceLikelihood none;
  const DirichletParams flat = DirichletParams::uniform(static_cast<int>(phi.values.size()));
  ReparamEvaluator eval(phi, none, flat);
  Eigen::VectorXd u;
  eval.transform(noise, u);
  return u;
}

Eigen::MatrixXd rt_jacobian(const PhiVector& phi, const Eigen::VectorXd& noise) {
  const auto g = phi.values.size();
  const double dim = static_cast<double>(g);
  const Eigen::VectorXd u = rt_transform(phi, noise);
  const Eigen::VectorXd theta = phi.values.cwiseAbs2();
  const double inv_sum = theta.cwiseInverse().sum();
  // dz_k/dphi_i
  Eigen::MatrixXd dz(g, g);
  for (Eigen::Index k = 0; k < g; ++k) {
    const double var = (1.0 / theta[k]) * (1.0 - 2.0 / dim) + inv_sum / (dim * dim);
    const double s = std::sqrt(std::max(var, 0.0));
    for (Eigen::Index i = 0; i < g; ++i) {
      const double p = phi.values[i];
      const double dmu = (2.0 / p) * ((k == i ? 1.0 : 0.0) - 1.0 / dim);
      const double dvar = -2.0 / (p * p * p) * ((k == i ? 1.0 - 2.0 / dim : 0.0) + 1.0 / (dim * dim));
      const double ds = s > 0.0 ? dvar / (2.0 * s) : 0.0;
      dz(k, i) = dmu + noise[k] * ds;
    }
  }
  const Eigen::MatrixXd dsoftmax = Eigen::MatrixXd(u.asDiagonal()) - u * u.transpose();
  return dsoftmax * dz;
}

Eigen::VectorXd rt_gradient_from_noise(const PhiVector& phi, const PreferenceLikelihood& lik,
                                       const DirichletParams& alpha,
                                       const Eigen::MatrixXd& noise) {
  check_dims(lik, phi.values.size(), alpha.size());
  if (noise.rows() != phi.values.size() || noise.cols() < 1) {
    throw std::invalid_argument("rt_gradient: noise must be gamma x W");
  }
  ReparamEvaluator eval(phi, lik, alpha);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(phi.values.size());
  Eigen::VectorXd eps(phi.values.size());
  for (Eigen::Index w = 0; w < noise.cols(); ++w) {
    eps = noise.col(w);
    eval.accumulate(eps, grad, false);
  }
  return grad / static_cast<double>(noise.cols());
}

Eigen::VectorXd rt_gradient(const PhiVector& phi, const PreferenceLikelihood& lik,
                            const DirichletParams& alpha, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("rt_gradient: need at least one sample");
  const auto g = phi.values.size();
  Eigen::MatrixXd noise(g, samples);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int w = 0; w < samples; ++w) {
    for (Eigen::Index k = 0; k < g; ++k) noise(k, w) = normal(rng);
  }
  return rt_gradient_from_noise(phi, lik, alpha, noise);
}

FitResult fit_posterior(const PreferenceLikelihood& lik, const DirichletParams& alpha,
                        const OptimizerConfig& config, Estimator estimator,
                        const DirichletParams* warm_start) {
  config.validate();
  const int g = alpha.size();
  check_dims(lik, g, alpha.size());
  if (warm_start != nullptr && warm_start->size() != g) {
    throw std::invalid_argument("fit_posterior: warm start has the wrong dimension");
  }

  Eigen::VectorXd phi = warm_start ? warm_start->values().cwiseSqrt().eval()
                                   : Eigen::VectorXd::Ones(g).eval();
  FitResult result;
  result.elbo_trace.reserve(static_cast<std::size_t>(config.max_iters));
  if (g == 1) {
    result.theta = DirichletParams(phi.cwiseAbs2());
    result.elbo_trace.assign(static_cast<std::size_t>(config.max_iters), 0.0);
    return result;
  }

  Rng rng(config.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  AdamAscent adam(g, config.learning_rate, config.beta1, config.beta2, config.eps);
  Eigen::VectorXd grad(g);
  Eigen::VectorXd draw(g);
  const double inv_w = 1.0 / config.grad_samples;
  const int trace_samples = std::min(config.grad_samples, kTraceSamples);

  for (int it = 0; it < config.max_iters; ++it) {
    grad.setZero();
    double elbo = 0.0;
    if (estimator == Estimator::reparam) {
      ReparamEvaluator eval(PhiVector{phi}, lik, alpha);
      for (int w = 0; w < config.grad_samples; ++w) {
        for (int k = 0; k < g; ++k) draw[k] = normal(rng);
        elbo += eval.accumulate(draw, grad, w < trace_samples);
      }
      grad *= inv_w;
    } else {
      const DirichletParams theta(phi.cwiseAbs2());
      ScoreEvaluator eval(theta, lik, alpha);
      for (int w = 0; w < config.grad_samples; ++w) {
        sample_dirichlet(theta.values(), rng, draw);
        const double f = eval.accumulate(draw, grad);
        if (w < trace_samples) elbo += f;
      }
      // chain rule: dtheta/dphi = 2 phi
      grad = 2.0 * phi.cwiseProduct(grad) * inv_w;
    }
    if (!grad.allFinite()) {
      std::ostringstream os;
      os << "fit_posterior: non-finite gradient at iteration " << it << " (estimator "
         << to_string(estimator) << ", phi = [" << phi.transpose() << "])";
      throw std::runtime_error(os.str());
    }
    result.elbo_trace.push_back(elbo / trace_samples);
    adam.step(grad, phi);
    for (int k = 0; k < g; ++k) {
      if (std::abs(phi[k]) < kPhiFloor) phi[k] = phi[k] < 0.0 ? -kPhiFloor : kPhiFloor;
    }
  }
  result.theta = DirichletParams(phi.cwiseAbs2());
  return result;
}

FitResult fit_posterior(const PerformanceTable& table, const PreferenceSet& q,
                        const DirichletParams& alpha, const OptimizerConfig& config,
                        Estimator estimator, const DirichletParams* warm_start) {
  return fit_posterior(PreferenceLikelihood(table, q), alpha, config, estimator, warm_start);
}

Eigen::MatrixXd PosteriorSamples::values(const PerformanceTable& table) const {
  return samples * table.characteristics().transpose();
}

PosteriorSamples sample_posterior(const DirichletParams& theta, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("sample_posterior: need at least one sample");
  PosteriorSamples out{Eigen::MatrixXd(samples, theta.size()), theta};
  Eigen::VectorXd u(theta.size());
  for (int w = 0; w < samples; ++w) {
    sample_dirichlet(theta.values(), rng, u);
    out.samples.row(w) = u.transpose();
  }
  return out;
}

double posterior_predictive(const PosteriorSamples& samples, const PerformanceTable& table,
                            int a_i, int a_j) {
  if (a_i == a_j) throw std::invalid_argument("posterior_predictive: identical alternatives");
  const Eigen::VectorXd diff =
      (table.characteristics().row(a_i) - table.characteristics().row(a_j)).transpose();
  const Eigen::VectorXd delta = samples.samples * diff;
  double wins = 0.0;
  for (Eigen::Index w = 0; w < delta.size(); ++w) {
    if (delta[w] > 0.0) {
      wins += 1.0;
    } else if (delta[w] == 0.0) {
      wins += 0.5;
    }
  }
  return wins / static_cast<double>(delta.size());
}

double posterior_predictive(const DirichletParams& theta, const PerformanceTable& table,
                            int a_i, int a_j, int samples, Rng& rng) {
  return posterior_predictive(sample_posterior(theta, samples, rng), table, a_i, a_j);
}

double posterior_variance(const DirichletParams& theta) {
  const double total = theta.concentration();
  double out = 0.0;
  for (int k = 0; k < theta.size(); ++k) out += theta[k] * (total - theta[k]);
  return out / (total * total * (total + 1.0));
}

}  // namespace prefelicit
