#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "prefelicit/inference.hpp"
#include "prefelicit/metrics.hpp"
#include "prefelicit/model.hpp"

namespace prefelicit {

struct InferenceSettings {
  /// Empty means the flat prior alpha = 1.
  Eigen::VectorXd alpha;
  /// Budget for hypothetical refits during question selection.
  OptimizerConfig refit = OptimizerConfig::rollout();
  Estimator estimator = Estimator::reparam;
  /// Draws used for predictive probabilities and PWI/RAI estimates.
  int predictive_samples = 4000;

  DirichletParams prior(int dimension) const;
};

/// Root state of a question-selection call: the current preference set, its
/// fitted posterior, and the quantities every policy derives from it.
///
/// Hypothetical refits share one seed (common random numbers), are
/// warm-started from the root posterior and use settings.refit. Posterior
/// draws for metrics likewise share one seed across states.
class PosteriorContext {
 public:
  PosteriorContext(const PerformanceTable& table, PreferenceSet q, DirichletParams theta,
                   InferenceSettings settings, std::uint64_t seed);

  const PerformanceTable& table() const { return *table_; }
  const PreferenceSet& preferences() const { return q_; }
  const DirichletParams& theta() const { return theta_; }
  const DirichletParams& alpha() const { return alpha_; }
  const InferenceSettings& settings() const { return settings_; }
  std::uint64_t seed() const { return seed_; }

  double root_variance() const { return root_variance_; }
  /// PWI of the root posterior; entry (i, j) = p(a_i > a_j | Q).
  const Eigen::MatrixXd& pwi() const { return pwi_; }
  double predictive(int i, int j) const { return pwi_(i, j); }

  /// Unasked unordered pairs in lexicographic order.
  std::vector<Question> candidates() const;

  /// Rollout-grade posterior for q (any superset of the root set). A refit
  /// is a pure function of the ordered statements, so results are memoised.
  DirichletParams refit(const PreferenceSet& q) const;

  /// W x n comprehensive values under theta, drawn with the shared seed.
  Eigen::MatrixXd sample_values(const DirichletParams& theta) const;

  /// Context rooted at q with posterior theta (same table, settings, seed).
  PosteriorContext child(PreferenceSet q, DirichletParams theta) const;

 private:
  const PerformanceTable* table_;
  PreferenceSet q_;
  DirichletParams theta_;
  InferenceSettings settings_;
  DirichletParams alpha_;
  std::uint64_t seed_;
  double root_variance_ = 0.0;
  Eigen::MatrixXd pwi_;

  struct RefitCache {
    std::mutex mu;
    std::map<std::vector<std::pair<int, int>>, DirichletParams> fits;
  };
  std::shared_ptr<RefitCache> cache_ = std::make_shared<RefitCache>();
};

}  // namespace prefelicit
