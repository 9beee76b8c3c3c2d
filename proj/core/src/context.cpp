#include "prefelicit/context.hpp"

#include <stdexcept>

#include "prefelicit/random.hpp"

namespace prefelicit {

namespace {

constexpr std::uint64_t kRefitTag = hash_tag("refit");
constexpr std::uint64_t kDrawTag = hash_tag("posterior-draws");

}  // namespace

DirichletParams InferenceSettings::prior(int dimension) const {
  if (alpha.size() == 0) return DirichletParams::uniform(dimension);
  if (alpha.size() != dimension) throw std::invalid_argument("prior dimension mismatch");
  return DirichletParams(alpha);
}

PosteriorContext::PosteriorContext(const PerformanceTable& table, PreferenceSet q,
                                   DirichletParams theta, InferenceSettings settings,
                                   std::uint64_t seed)
    : table_(&table),
      q_(std::move(q)),
      theta_(std::move(theta)),
      settings_(std::move(settings)),
      alpha_(settings_.prior(table.dimension())),
      seed_(seed) {
  if (theta_.size() != table.dimension()) throw std::invalid_argument("PosteriorContext: theta dimension mismatch");
  if (settings_.predictive_samples < 1) throw std::invalid_argument("PosteriorContext: predictive_samples must be positive");
  q_.validate(table.size());
  root_variance_ = posterior_variance(theta_);
  pwi_ = compute_pwi(sample_values(theta_));
}

std::vector<Question> PosteriorContext::candidates() const {
  return candidate_questions(table_->size(), q_);
}

DirichletParams PosteriorContext::refit(const PreferenceSet& q) const {
  std::vector<std::pair<int, int>> key;
  key.reserve(q.size());
  for (const auto& s : q) key.emplace_back(s.preferred, s.other);
  {
    std::lock_guard lock(cache_->mu);
    if (const auto it = cache_->fits.find(key); it != cache_->fits.end()) return it->second;
  }
  OptimizerConfig cfg = settings_.refit;
  cfg.rng_seed = derive_seed(seed_, {kRefitTag});
  DirichletParams fit = fit_posterior(*table_, q, alpha_, cfg, settings_.estimator, &theta_).theta;
  std::lock_guard lock(cache_->mu);
  cache_->fits.emplace(std::move(key), fit);
  return fit;
}

Eigen::MatrixXd PosteriorContext::sample_values(const DirichletParams& theta) const {
  Rng rng(derive_seed(seed_, {kDrawTag}));
  return sample_posterior(theta, settings_.predictive_samples, rng).values(*table_);
}

PosteriorContext PosteriorContext::child(PreferenceSet q, DirichletParams theta) const {
  return PosteriorContext(*table_, std::move(q), std::move(theta), settings_, seed_);
}

}  // namespace prefelicit
