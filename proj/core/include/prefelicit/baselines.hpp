#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "prefelicit/context.hpp"
#include "prefelicit/model.hpp"
#include "prefelicit/polytope.hpp"
#include "prefelicit/random.hpp"

namespace prefelicit {

enum class UncertaintyMetric { pwi, rai };

/// f_PWI or f_RAI of the posterior theta, from the context's shared draws.
double uncertainty_of(const PosteriorContext& ctx, const DirichletParams& theta,
                      UncertaintyMetric metric);

/// PWI-weighted expected metric reduction of asking `pair` (H_X score).
double h_myopic_value(const PosteriorContext& ctx, Question pair, UncertaintyMetric metric);

/// Argmax of h_myopic_value over unasked pairs; ties go to the lowest pair.
Question h_myopic(const PosteriorContext& ctx, UncertaintyMetric metric);

/// v(Q, f, d) of the depth-d recursion; v(Q, f, 0) = -f(Q). `excluded`
/// holds questions already chosen higher up the recursion.
double lookahead_value(const PosteriorContext& ctx, UncertaintyMetric metric, int depth,
                       const std::vector<Question>& excluded = {});

/// Depth-d heuristic H_X-d. Depth 1 selects the same pair as h_myopic.
Question h_lookahead(const PosteriorContext& ctx, UncertaintyMetric metric, int depth);

inline Question h_depth2(const PosteriorContext& ctx, UncertaintyMetric metric) {
  return h_lookahead(ctx, metric, 2);
}

/// Maximin PWI pair.
Question h_dvf(const PosteriorContext& ctx);

/// Uniform draw among the pairs of n alternatives not yet in q.
Question h_rand(int n, const PreferenceSet& q, Rng& rng);

struct SorOptions {
  double delta = 1e-4;
  int samples = 10000;
  HitAndRunOptions sampler;
};

/// Consistent subset of q for the strict polytope: repeatedly drops the
/// statement with the largest slack in a min-total-slack LP, then greedily
/// re-adds dropped statements (in their original order) while feasible, so
/// the result is inclusion-maximal. Order of q is preserved.
PreferenceSet resolve_inconsistency(const PerformanceTable& table, const PreferenceSet& q,
                                    double delta = 1e-4);

/// POI matrix from hit-and-run draws over the polytope of q. Throws
/// InfeasibleError when q is inconsistent.
Eigen::MatrixXd sor_poi(const PerformanceTable& table, const PreferenceSet& q, Rng& rng,
                        const SorOptions& options = {});

struct SorResult {
  PreferenceSet kept;
  Eigen::MatrixXd poi;
};

/// resolve_inconsistency followed by sor_poi.
SorResult run_sor(const PerformanceTable& table, const PreferenceSet& q, Rng& rng,
                  const SorOptions& options = {});

/// CSV with a header row of ids and one row per alternative.
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& ids,
                      const Eigen::MatrixXd& m);

}  // namespace prefelicit
