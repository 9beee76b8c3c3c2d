#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefelicit/baselines.hpp"
#include "prefelicit/context.hpp"
#include "prefelicit/inference.hpp"
#include "prefelicit/mcts.hpp"
#include "prefelicit/simulation.hpp"

namespace prefelicit {

// ---- preference-inference study -------------------------------------------

enum class InferenceMethod { rt, score, sor };

InferenceMethod parse_inference_method(std::string_view name);
std::string_view to_string(InferenceMethod m);

struct InferenceStudyPlan {
  std::vector<ShapeSetting> shapes{ShapeSetting::linear};
  std::vector<int> comparisons{20, 40};      // F2
  std::vector<double> biases{0.0, 0.3};      // F3
  std::vector<InferenceMethod> methods{InferenceMethod::rt, InferenceMethod::score,
                                       InferenceMethod::sor};
  int repetitions = 5;
  int alternatives = 14;
  int criteria = 5;
  int subintervals = 2;
  std::uint64_t base_seed = 0;
  OptimizerConfig fit;                 // full budget by default
  int posterior_samples = 10000;       // draws for PWI
  SorOptions sor;

  /// Table-3 grid: all shapes, F2 in {20,40,60,80}, F3 in {0,.1,.2,.3}, 20 DMs.
  static InferenceStudyPlan full();
  /// Fields missing from j keep their values from base.
  static InferenceStudyPlan from_json(const nlohmann::json& j, InferenceStudyPlan base);
  static InferenceStudyPlan from_json(const nlohmann::json& j) { return from_json(j, InferenceStudyPlan{}); }
  nlohmann::json to_json() const;
  void validate() const;
};

struct InferenceRecord {
  std::string instance_id;
  std::uint64_t seed = 0;
  std::string method;
  std::string shape;
  int comparisons = 0;
  double bias = 0.0;
  int repetition = 0;
  int statements_used = 0;  // after inconsistency resolution for SOR
  std::optional<double> asp;
  std::string status = "ok";
};

/// One record per (cell, repetition, method). Cells run on `workers`
/// threads; output order and content do not depend on the worker count.
std::vector<InferenceRecord> run_inference_study(const InferenceStudyPlan& plan, int workers = 1);

void write_csv(std::ostream& out, const std::vector<InferenceRecord>& records);

// ---- questioning-policy study ---------------------------------------------

enum class PolicyKind { mcts, h_pwi, h_rai, h_pwi2, h_rai2, h_dvf, h_rand };

PolicyKind parse_policy(std::string_view name);
std::string_view to_string(PolicyKind p);

struct PolicyStudyPlan {
  /// (n, m) problem sizes.
  std::vector<std::pair<int, int>> sizes{{6, 3}};
  int instances = 20;
  int horizon = 8;
  std::vector<int> checkpoints{2, 4, 6, 8};
  std::vector<PolicyKind> policies{PolicyKind::mcts, PolicyKind::h_pwi, PolicyKind::h_rai,
                                   PolicyKind::h_dvf, PolicyKind::h_rand};
  int subintervals = 2;
  ShapeSetting shape = ShapeSetting::linear;
  std::uint64_t base_seed = 0;
  int mcts_budget = 100;
  double exploration = 1.0 / 1.4142135623730951;
  InferenceSettings selection;                        // refits inside policies
  OptimizerConfig posterior_fit = OptimizerConfig::rollout();  // after each answer
  int metric_samples = 10000;

  /// Appendix-H grids (n = 6..10 with m = 3; m = 2..5 with n = 8), budget
  /// 300, all policies, full-budget round posteriors.
  static PolicyStudyPlan full();
  /// Fields missing from j keep their values from base.
  static PolicyStudyPlan from_json(const nlohmann::json& j, PolicyStudyPlan base);
  static PolicyStudyPlan from_json(const nlohmann::json& j) { return from_json(j, PolicyStudyPlan{}); }
  nlohmann::json to_json() const;
  void validate() const;
};

struct PolicyRecord {
  std::string instance_id;
  std::uint64_t seed = 0;
  int alternatives = 0;
  int criteria = 0;
  std::string policy;
  int round = 0;
  std::string question;  // last asked pair as "i-j"
  std::optional<double> f_var;
  std::optional<double> f_pwi;
  std::optional<double> f_rai;
  std::string status = "ok";
};

/// Picks the next question for `policy` at 1-based round t.
Question choose_question(PolicyKind policy, const PosteriorContext& ctx, const PolicyConfig& mcts,
                         int round, Rng& rng);

std::vector<PolicyRecord> run_policy_study(const PolicyStudyPlan& plan, int workers = 1);

void write_csv(std::ostream& out, const std::vector<PolicyRecord>& records);

// ---- gradient-variance study ----------------------------------------------

struct GradVarPlan {
  int configurations = 10;
  int alternatives = 14;
  int criteria = 5;
  int subintervals = 2;   // gamma = criteria * subintervals
  int statements = 20;
  int grad_samples = 1000;
  int repeats = 100;
  double theta_min = 0.5;  // phi^2 drawn uniformly in [theta_min, theta_max]
  double theta_max = 3.0;
  std::uint64_t base_seed = 0;

  /// Fields missing from j keep their values from base.
  static GradVarPlan from_json(const nlohmann::json& j, GradVarPlan base);
  static GradVarPlan from_json(const nlohmann::json& j) { return from_json(j, GradVarPlan{}); }
  nlohmann::json to_json() const;
  void validate() const;
};

/// Both gradients are taken with respect to phi (score gradients are mapped
/// through d theta / d phi = 2 phi), i.e. the quantity the optimiser uses.
struct GradVarRecord {
  int config_id = 0;
  std::uint64_t seed = 0;
  int gamma = 0;
  int statements = 0;
  double rt_mean_variance = 0.0;
  double score_mean_variance = 0.0;
  double median_ratio = 0.0;  // median over coordinates of var_rt / var_score
  std::vector<double> ratios;
};

std::vector<GradVarRecord> run_gradient_variance_study(const GradVarPlan& plan, int workers = 1);

/// Median of every per-coordinate ratio across configurations.
double overall_median_ratio(const std::vector<GradVarRecord>& records);

void write_csv(std::ostream& out, const std::vector<GradVarRecord>& records);

// ---- shared ---------------------------------------------------------------

/// {study, plan, base_seed, records, version, ...extra}.
nlohmann::json run_manifest(std::string_view study, const nlohmann::json& plan,
                            std::uint64_t base_seed, std::size_t records,
                            const nlohmann::json& extra = {});

/// Runs jobs[0..count) on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& job);

}  // namespace prefelicit
