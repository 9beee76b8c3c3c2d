#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "prefelicit/model.hpp"
#include "prefelicit/random.hpp"

namespace prefelicit {

enum class Shape { linear, concave, convex };
enum class ShapeSetting { linear, concave, convex, mixture };

Shape parse_shape(std::string_view name);
ShapeSetting parse_shape_setting(std::string_view name);
std::string_view to_string(Shape s);
std::string_view to_string(ShapeSetting s);

/// Additive exponential-marginal decision maker.
struct TrueModel {
  Eigen::VectorXd weights;
  Eigen::VectorXd curvatures;  // 0 for linear criteria
  std::vector<Shape> shapes;

  int num_criteria() const { return static_cast<int>(weights.size()); }
  /// Marginal value of criterion j at normalised performance x in [0, 1].
  double marginal(int j, double x) const;
  void validate() const;
};

TrueModel gen_true_model(int m, ShapeSetting setting, Rng& rng);

double true_value(const TrueModel& model, const PerformanceTable& table, int alt);
Eigen::VectorXd true_values(const TrueModel& model, const PerformanceTable& table);

/// n x m iid Uniform[0,1] performances on [0,1] scales with ids a1..an.
PerformanceTable gen_performance_table(int n, int m, Rng& rng, int subintervals = 2);

/// Distinct uniformly drawn pairs, each oriented by the true values.
/// Throws std::invalid_argument when fewer than `count` non-tied pairs exist.
PreferenceSet gen_comparisons(const TrueModel& model, const PerformanceTable& table, int count,
                              Rng& rng);

/// Flips the floor(proportion * |Q|) statements with the smallest true value
/// gaps (stable with respect to the original order).
PreferenceSet inject_bias(const PreferenceSet& q, const TrueModel& model,
                          const PerformanceTable& table, double proportion);

enum class AnswerMode { deterministic, bradley_terry };

struct SimulatedAnswer {
  PreferenceStatement statement;
  /// Set when a deterministic answer had to break an exact value tie.
  bool tie_broken = false;
};

SimulatedAnswer simulated_answer(const TrueModel& model, const PerformanceTable& table,
                                 Question pair, Rng& rng,
                                 AnswerMode mode = AnswerMode::deterministic);

nlohmann::json to_json(const TrueModel& model);
TrueModel true_model_from_json(const nlohmann::json& j);

}  // namespace prefelicit
