#include <benchmark/benchmark.h>

#include "prefelicit/context.hpp"
#include "prefelicit/inference.hpp"
#include "prefelicit/mcts.hpp"
#include "prefelicit/polytope.hpp"
#include "prefelicit/simulation.hpp"

using namespace prefelicit;

namespace {

struct Instance {
  PerformanceTable table;
  PreferenceSet q;
};

Instance make_instance(int n, int m, int statements, std::uint64_t seed) {
  Rng rng(seed);
  auto table = gen_performance_table(n, m, rng);
  const auto model = gen_true_model(m, ShapeSetting::linear, rng);
  auto q = gen_comparisons(model, table, statements, rng);
  return {std::move(table), std::move(q)};
}

// args: statements, estimator (0 = RT, 1 = score), rollout-grade (0/1)
void BM_FitPosterior(benchmark::State& state) {
  const auto inst = make_instance(14, 5, static_cast<int>(state.range(0)), 1);
  const auto estimator = state.range(1) == 0 ? Estimator::reparam : Estimator::score;
  OptimizerConfig config = state.range(2) ? OptimizerConfig::rollout() : OptimizerConfig{};
  const auto alpha = DirichletParams::uniform(inst.table.dimension());
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_posterior(inst.table, inst.q, alpha, config, estimator));
  }
}
BENCHMARK(BM_FitPosterior)
    ->Args({20, 0, 1})
    ->Args({20, 1, 1})
    ->Args({40, 0, 1})
    ->Args({20, 0, 0})
    ->Unit(benchmark::kMillisecond);

void BM_SelectQuestion(benchmark::State& state) {
  const auto inst = make_instance(6, 3, 2, 2);
  InferenceSettings settings;
  const auto alpha = settings.prior(inst.table.dimension());
  const auto fit = fit_posterior(inst.table, inst.q, alpha, OptimizerConfig::rollout(), Estimator::reparam);
  const PosteriorContext ctx(inst.table, inst.q, fit.theta, settings, 3);
  PolicyConfig config;
  config.budget = static_cast<int>(state.range(0));
  config.horizon = 8;
  for (auto _ : state) benchmark::DoNotOptimize(select_question(ctx, config, 3));
}
BENCHMARK(BM_SelectQuestion)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_HitAndRun(benchmark::State& state) {
  const auto poly = PolytopeSpec::simplex(static_cast<int>(state.range(0)));
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(hit_and_run(poly, 10000, rng));
}
BENCHMARK(BM_HitAndRun)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
