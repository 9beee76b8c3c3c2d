#include "prefelicit/baselines.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "prefelicit/linprog.hpp"
#include "prefelicit/metrics.hpp"

namespace prefelicit {

namespace {

std::vector<Question> require_candidates(const PosteriorContext& ctx,
                                         const std::vector<Question>& excluded = {}) {
  auto c = candidate_questions(ctx.table().size(), ctx.preferences(), excluded);
  if (c.empty()) throw std::runtime_error("no candidate questions remain");
  return c;
}

double branch_weight(const Eigen::MatrixXd& pwi, int i, int j) {
  const double total = pwi(i, j) + pwi(j, i);
  return total > 0.0 ? pwi(i, j) / total : 0.5;
}

// Minimum total slack needed to satisfy every statement of q with margin delta.
LpResult min_slack_lp(const Eigen::MatrixXd& diffs, double delta) {
  const Eigen::Index g = diffs.cols();
  const Eigen::Index d = diffs.rows();
  // Variables (u, s): minimise sum(s) s.t. -D u - s <= -delta, sum(u) = 1.
  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(g + d);
  lp.c.tail(d).setOnes();
  lp.a_ub = Eigen::MatrixXd::Zero(d, g + d);
  lp.a_ub.leftCols(g) = -diffs;
  lp.a_ub.rightCols(d) = -Eigen::MatrixXd::Identity(d, d);
  lp.b_ub = Eigen::VectorXd::Constant(d, -delta);
  lp.a_eq = Eigen::MatrixXd::Zero(1, g + d);
  lp.a_eq.row(0).head(g).setOnes();
  lp.b_eq = Eigen::VectorXd::Ones(1);
  return solve_lp(lp);
}

bool consistent(const PerformanceTable& table, const PreferenceSet& q, double delta) {
  return is_feasible(preference_polytope(table, q, delta));
}

}  // namespace

double uncertainty_of(const PosteriorContext& ctx, const DirichletParams& theta,
                      UncertaintyMetric metric) {
  const Eigen::MatrixXd values = ctx.sample_values(theta);
  return metric == UncertaintyMetric::pwi ? f_pwi(compute_pwi(values)) : f_rai(compute_rai(values));
}

double h_myopic_value(const PosteriorContext& ctx, Question pair, UncertaintyMetric metric) {
  const double f0 = uncertainty_of(ctx, ctx.theta(), metric);
  const PreferenceStatement ij{pair.first, pair.second};
  const PreferenceSet& q = ctx.preferences();
  const double f_ij = uncertainty_of(ctx, ctx.refit(q.with(ij)), metric);
  const double f_ji = uncertainty_of(ctx, ctx.refit(q.with(ij.flipped())), metric);
  return branch_weight(ctx.pwi(), pair.first, pair.second) * (f0 - f_ij) +
         branch_weight(ctx.pwi(), pair.second, pair.first) * (f0 - f_ji);
}

Question h_myopic(const PosteriorContext& ctx, UncertaintyMetric metric) {
  const auto candidates = require_candidates(ctx);
  Question best = candidates.front();
  double best_value = -std::numeric_limits<double>::infinity();
  for (const Question& c : candidates) {
    const double v = h_myopic_value(ctx, c, metric);
    if (v > best_value) {
      best_value = v;
      best = c;
    }
  }
  return best;
}

namespace {

// Weighted two-answer value of asking `pair` next, recursing to depth-1.
double pair_lookahead(const PosteriorContext& ctx, Question pair, UncertaintyMetric metric,
                      int depth, std::vector<Question>& excluded) {
  excluded.push_back(pair);
  double total = 0.0;
  for (const PreferenceStatement s :
       {PreferenceStatement{pair.first, pair.second}, PreferenceStatement{pair.second, pair.first}}) {
    const double w = branch_weight(ctx.pwi(), s.preferred, s.other);
    PreferenceSet q = ctx.preferences().with(s);
    DirichletParams theta = ctx.refit(q);
    double v = 0.0;
    if (depth - 1 == 0) {
      v = -uncertainty_of(ctx, theta, metric);
    } else {
      const PosteriorContext next = ctx.child(std::move(q), std::move(theta));
      v = lookahead_value(next, metric, depth - 1, excluded);
    }
    total += w * v;
  }
  excluded.pop_back();
  return total;
}

}  // namespace

double lookahead_value(const PosteriorContext& ctx, UncertaintyMetric metric, int depth,
                       const std::vector<Question>& excluded) {
  if (depth <= 0) return -uncertainty_of(ctx, ctx.theta(), metric);
  const auto candidates = candidate_questions(ctx.table().size(), ctx.preferences(), excluded);
  if (candidates.empty()) return -uncertainty_of(ctx, ctx.theta(), metric);
  std::vector<Question> path = excluded;
  double best = -std::numeric_limits<double>::infinity();
  for (const Question& c : candidates) best = std::max(best, pair_lookahead(ctx, c, metric, depth, path));
  return best;
}

Question h_lookahead(const PosteriorContext& ctx, UncertaintyMetric metric, int depth) {
  if (depth < 1) throw std::invalid_argument("h_lookahead: depth must be at least 1");
  const auto candidates = require_candidates(ctx);
  const int effective = std::min(depth, static_cast<int>(candidates.size()));
  Question best = candidates.front();
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<Question> path;
  for (const Question& c : candidates) {
    const double v = pair_lookahead(ctx, c, metric, effective, path);
    if (v > best_value) {
      best_value = v;
      best = c;
    }
  }
  return best;
}

Question h_dvf(const PosteriorContext& ctx) {
  const auto candidates = require_candidates(ctx);
  Question best = candidates.front();
  double best_value = -1.0;
  for (const Question& c : candidates) {
    const double v = std::min(ctx.pwi()(c.first, c.second), ctx.pwi()(c.second, c.first));
    if (v > best_value) {
      best_value = v;
      best = c;
    }
  }
  return best;
}

Question h_rand(int n, const PreferenceSet& q, Rng& rng) {
  const auto candidates = candidate_questions(n, q);
  if (candidates.empty()) throw std::runtime_error("no candidate questions remain");
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  return candidates[pick(rng)];
}

PreferenceSet resolve_inconsistency(const PerformanceTable& table, const PreferenceSet& q,
                                    double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("resolve_inconsistency: delta must be positive");
  if (consistent(table, q, delta)) return q;

  const Eigen::MatrixXd diffs = statement_differences(table, q);
  std::vector<bool> keep(q.size(), true);
  std::vector<std::size_t> dropped;
  auto kept_set = [&] {
    std::vector<PreferenceStatement> s;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (keep[k]) s.push_back(q[k]);
    }
    return PreferenceSet(std::move(s));
  };
  for (;;) {
    std::vector<Eigen::Index> rows;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (keep[k]) rows.push_back(static_cast<Eigen::Index>(k));
    }
    if (rows.empty()) break;
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), diffs.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = diffs.row(rows[r]);
    const LpResult res = min_slack_lp(sub, delta);
    if (res.status != LpStatus::optimal) throw std::runtime_error("resolve_inconsistency: slack LP failed");
    if (res.objective <= 1e-9) break;
    const Eigen::VectorXd slack = res.x.tail(sub.rows());
    Eigen::Index worst = 0;
    slack.maxCoeff(&worst);
    keep[static_cast<std::size_t>(rows[static_cast<std::size_t>(worst)])] = false;
    dropped.push_back(static_cast<std::size_t>(rows[static_cast<std::size_t>(worst)]));
    if (consistent(table, kept_set(), delta)) break;
  }
  std::sort(dropped.begin(), dropped.end());
  for (std::size_t k : dropped) {
    keep[k] = true;
    if (!consistent(table, kept_set(), delta)) keep[k] = false;
  }
  return kept_set();
}

Eigen::MatrixXd sor_poi(const PerformanceTable& table, const PreferenceSet& q, Rng& rng,
                        const SorOptions& options) {
  const PolytopeSpec poly = preference_polytope(table, q, options.delta);
  const Eigen::MatrixXd draws = hit_and_run(poly, options.samples, rng, options.sampler);
  return compute_poi(draws * table.characteristics().transpose());
}

SorResult run_sor(const PerformanceTable& table, const PreferenceSet& q, Rng& rng,
                  const SorOptions& options) {
  SorResult out;
  out.kept = resolve_inconsistency(table, q, options.delta);
  out.poi = sor_poi(table, out.kept, rng, options);
  return out;
}

void write_matrix_csv(std::ostream& out, const std::vector<std::string>& ids,
                      const Eigen::MatrixXd& m) {
  if (static_cast<Eigen::Index>(ids.size()) != m.rows() || m.rows() != m.cols()) {
    throw std::invalid_argument("write_matrix_csv: ids do not match the matrix");
  }
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n' << std::setprecision(10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
    out << '\n';
  }
}

}  // namespace prefelicit
