#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

#include "prefelicit/inference.hpp"
#include "prefelicit/simulation.hpp"
#include "support.hpp"

using namespace prefelicit;
using support::bt_loglik;
using support::log_dir;
using support::transform_oracle;

namespace {

double dirichlet_kl(const Eigen::VectorXd& t, const Eigen::VectorXd& a) {
  using boost::math::digamma;
  double kl = std::lgamma(t.sum()) - std::lgamma(a.sum());
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    kl += std::lgamma(a[k]) - std::lgamma(t[k]) + (t[k] - a[k]) * (digamma(t[k]) - digamma(t.sum()));
  }
  return kl;
}

double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / want.norm();
}

// Two-criterion table with gamma = 3 (2 + 1 sub-intervals).
PerformanceTable gamma3_table() {
  return support::unit_table({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.5}, {0.3, 0.3}}, {2, 1});
}

PerformanceTable gamma2_table() {
  return support::unit_table({{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.5}, {0.3, 0.35}});
}

PreferenceSet toy_statements() {
  PreferenceSet q;
  q.add({0, 1});
  q.add({2, 3});
  q.add({2, 1});
  return q;
}

}  // namespace

TEST(LogSigmoid, StableAcrossRange) {
  for (double x : {-30.0, -3.0, -0.5, 0.0, 0.5, 3.0, 30.0}) {
    EXPECT_NEAR(log_sigmoid(x), -std::log1p(std::exp(-x)), 1e-12);
  }
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-800.0)));
  EXPECT_EQ(log_sigmoid(800.0), 0.0);
}

TEST(LogPrior, FlatPriorIsLogGammaOfDimension) {
  Rng rng(1);
  for (int g : {2, 3, 5}) {
    const auto alpha = DirichletParams::uniform(g);
    const Eigen::VectorXd u = sample_dirichlet(Eigen::VectorXd::Ones(g), rng);
    EXPECT_NEAR(log_prior(u, alpha), std::lgamma(g), 1e-12);
  }
}

TEST(LogPrior, ClosedFormAndFlatness) {
  EXPECT_NEAR(log_prior(Eigen::Vector2d(0.5, 0.5), DirichletParams(Eigen::Vector2d(2, 2))), std::log(1.5), 1e-12);
  const auto flat = DirichletParams::uniform(2);
  EXPECT_DOUBLE_EQ(log_prior(Eigen::Vector2d(0.3, 0.7), flat), log_prior(Eigen::Vector2d(0.9, 0.1), flat));
  Rng rng(4);
  const Eigen::Vector3d a(0.7, 2.5, 4.0);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd u = sample_dirichlet(Eigen::Vector3d::Ones(), rng);
    EXPECT_NEAR(log_dirichlet_density(u, a), log_dir(u, a), 1e-10);
  }
}

TEST(LogPrior, BoundaryPolicy) {
  const DirichletParams a(Eigen::Vector2d(2, 2));
  const double sentinel = log_prior(Eigen::Vector2d(1.0, 0.0), a);
  EXPECT_TRUE(sentinel < -1e300 || std::isinf(sentinel));
  EXPECT_THROW(log_prior(Eigen::Vector2d(1.0, 0.0), a, BoundaryPolicy::raise), std::domain_error);
}

TEST(LogLikelihood, Examples) {
  const auto t = support::unit_table({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}});
  const Eigen::Vector2d u(0.5, 0.5);
  EXPECT_EQ(log_likelihood(PreferenceSet{}, u, t), 0.0);
  PreferenceSet tie;
  tie.add({0, 1});
  EXPECT_NEAR(log_likelihood(tie, u, t), std::log(0.5), 1e-12);
  PreferenceSet unit_gap;
  unit_gap.add({2, 3});
  EXPECT_NEAR(log_likelihood(unit_gap, u, t), -0.31326168751822286, 1e-12);
}

TEST(LogLikelihood, MatchesDirectSumAndGradient) {
  const auto t = gamma3_table();
  const auto q = toy_statements();
  const PreferenceLikelihood lik(t, q);
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd u = sample_dirichlet(Eigen::Vector3d::Ones(), rng);
    EXPECT_NEAR(lik.log_likelihood(u), bt_loglik(t.characteristics(), q, u), 1e-12);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
    lik.accumulate_gradient(u, grad);
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd up = u, dn = u;
      up[k] += 1e-6;
      dn[k] -= 1e-6;
      const double fd = (bt_loglik(t.characteristics(), q, up) - bt_loglik(t.characteristics(), q, dn)) / 2e-6;
      EXPECT_NEAR(grad[k], fd, 1e-7);
    }
  }
}

TEST(Elbo, IdenticalPriorAndPosteriorGivesZero) {
  const PreferenceLikelihood none;
  const auto alpha = DirichletParams(Eigen::Vector3d(2, 3, 1.5));
  Rng rng(7);
  EXPECT_NEAR(elbo_estimate(alpha, none, alpha, 1000, rng), 0.0, 1e-9);
}

TEST(Elbo, MatchesNegativeClosedFormKl) {
  const PreferenceLikelihood none;
  const Eigen::Vector3d theta(3.0, 1.5, 0.8);
  const Eigen::Vector3d alpha(1.0, 1.0, 1.0);
  Rng rng(8);
  const int w = 200000;
  const double est = elbo_estimate(DirichletParams(theta), none, DirichletParams(alpha), w, rng);
  EXPECT_NEAR(est, -dirichlet_kl(theta, alpha), 0.02);
}

TEST(Elbo, BoundedByQuadratureEvidence) {
  const auto t = gamma2_table();
  const auto q = toy_statements();
  const PreferenceLikelihood lik(t, q);
  // log p(Q) = log int p(Q|u) p(u) du on u = (s, 1 - s), flat prior density 1.
  double evidence = 0.0;
  const int points = 4001;
  for (int k = 0; k < points; ++k) {
    const double s = static_cast<double>(k) / (points - 1);
    const double trap = (k == 0 || k == points - 1) ? 0.5 : 1.0;
    evidence += trap * std::exp(bt_loglik(t.characteristics(), q, Eigen::Vector2d(s, 1 - s)));
  }
  const double log_evidence = std::log(evidence / (points - 1));
  Rng rng(9);
  for (const Eigen::Vector2d theta : {Eigen::Vector2d(1, 1), Eigen::Vector2d(3, 2), Eigen::Vector2d(0.7, 4)}) {
    const double elbo = elbo_estimate(DirichletParams(theta), lik, DirichletParams::uniform(2), 100000, rng);
    EXPECT_LE(elbo, log_evidence + 0.01);
  }
}

TEST(ScoreGradient, MatchesFiniteDifferenceOfSurrogate) {
  // With the draws held fixed, the estimator is the exact gradient at theta' = theta of
  // S(theta') = mean_w log Dir(u_w | theta') * f(u_w), f evaluated at the current theta.
  for (const auto& [table, theta_v] :
       {std::pair{gamma2_table(), Eigen::VectorXd(Eigen::Vector2d(1.7, 2.4))},
        std::pair{gamma3_table(), Eigen::VectorXd(Eigen::Vector3d(1.3, 2.1, 3.2))}}) {
    const auto q = toy_statements();
    const PreferenceLikelihood lik(table, q);
    const auto g = theta_v.size();
    const Eigen::VectorXd alpha = Eigen::VectorXd::Ones(g);
    Rng rng(10);
    Eigen::MatrixXd draws(g, 4000);
    for (Eigen::Index w = 0; w < draws.cols(); ++w) draws.col(w) = sample_dirichlet(theta_v, rng);
    const Eigen::VectorXd got = score_gradient_from_samples(DirichletParams(theta_v), lik, DirichletParams(alpha), draws);

    std::vector<double> f(static_cast<std::size_t>(draws.cols()));
    for (Eigen::Index w = 0; w < draws.cols(); ++w) {
      const Eigen::VectorXd u = draws.col(w);
      f[static_cast<std::size_t>(w)] = bt_loglik(table.characteristics(), q, u) + log_dir(u, alpha) - log_dir(u, theta_v);
    }
    auto surrogate = [&](const Eigen::VectorXd& th) {
      double s = 0.0;
      for (Eigen::Index w = 0; w < draws.cols(); ++w) s += log_dir(draws.col(w), th) * f[static_cast<std::size_t>(w)];
      return s / static_cast<double>(draws.cols());
    };
    Eigen::VectorXd fd(g);
    for (Eigen::Index k = 0; k < g; ++k) {
      Eigen::VectorXd up = theta_v, dn = theta_v;
      up[k] += 1e-5;
      dn[k] -= 1e-5;
      fd[k] = (surrogate(up) - surrogate(dn)) / 2e-5;
    }
    EXPECT_LT(relative_error(got, fd), 1e-3) << "gamma " << g;
  }
}

TEST(ScoreGradient, ZeroMeanAtPrior) {
  const PreferenceLikelihood none;
  const DirichletParams alpha(Eigen::Vector2d(2.0, 3.0));
  Rng rng(12);
  const int repeats = 200;
  Eigen::MatrixXd grads(2, repeats);
  for (int r = 0; r < repeats; ++r) grads.col(r) = score_gradient(alpha, none, alpha, 50, rng);
  // The integrand is identically zero when q = p and Q is empty.
  EXPECT_LT(grads.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(RtTransform, Examples) {
  const Eigen::VectorXd u = rt_transform(PhiVector{Eigen::Vector3d::Constant(1.7)}, Eigen::Vector3d::Zero());
  EXPECT_TRUE(u.isApprox(Eigen::Vector3d::Constant(1.0 / 3.0), 1e-12));
  const Eigen::VectorXd h = rt_transform(PhiVector{Eigen::Vector2d(1, 1)}, Eigen::Vector2d(1, -1));
  EXPECT_NEAR(h[0], 0.8044, 1e-4);
  EXPECT_NEAR(h[1], 0.1956, 1e-4);
}

TEST(RtTransform, MatchesDefinitionAndStaysOnSimplex) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int g = 2 + trial % 5;
    Eigen::VectorXd phi(g);
    for (int k = 0; k < g; ++k) phi[k] = 0.3 + 3.0 * uniform01(rng);
    const Eigen::VectorXd eps = standard_normal(g, rng);
    const Eigen::VectorXd u = rt_transform(PhiVector{phi}, eps);
    EXPECT_NEAR(u.sum(), 1.0, 1e-9);
    EXPECT_GE(u.minCoeff(), 0.0);
    EXPECT_LT((u - transform_oracle(phi, eps)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RtTransform, MomentsApproximateDirichlet) {
  const PhiVector phi{Eigen::Vector3d(std::sqrt(3.0), std::sqrt(2.0), 1.0)};
  Rng rng(14);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  const int w = 100000;
  for (int i = 0; i < w; ++i) mean += rt_transform(phi, standard_normal(3, rng));
  mean /= w;
  EXPECT_NEAR(mean[0], 1.0 / 2.0, 0.02);
  EXPECT_NEAR(mean[1], 1.0 / 3.0, 0.02);
  EXPECT_NEAR(mean[2], 1.0 / 6.0, 0.02);
}

TEST(RtTransform, JacobianMatchesFiniteDifferences) {
  Rng rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const int g = 2 + trial % 4;
    Eigen::VectorXd phi(g);
    for (int k = 0; k < g; ++k) phi[k] = (0.4 + 2.0 * uniform01(rng)) * (trial % 3 == 0 ? -1.0 : 1.0);
    const Eigen::VectorXd eps = standard_normal(g, rng);
    const Eigen::MatrixXd jac = rt_jacobian(PhiVector{phi}, eps);
    for (int i = 0; i < g; ++i) {
      Eigen::VectorXd up = phi, dn = phi;
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      const Eigen::VectorXd fd = (transform_oracle(up, eps) - transform_oracle(dn, eps)) / 2e-6;
      EXPECT_LT((jac.col(i) - fd).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
}

TEST(RtGradient, MatchesFiniteDifferenceOfReparameterisedObjective) {
  // R(phi') = mean_w [log p(Q | u) + log Dir(u | alpha) - log Dir(u | theta)], u = g_phi'(eps_w),
  // with theta = phi^2 held at the evaluation point.
  for (const auto& [table, phi_v] :
       {std::pair{gamma2_table(), Eigen::VectorXd(Eigen::Vector2d(1.2, 0.9))},
        std::pair{gamma3_table(), Eigen::VectorXd(Eigen::Vector3d(1.1, 1.6, 0.8))}}) {
    const auto q = toy_statements();
    const PreferenceLikelihood lik(table, q);
    const auto g = phi_v.size();
    const Eigen::VectorXd alpha(Eigen::VectorXd::LinSpaced(g, 1.0, 2.0));
    const Eigen::VectorXd theta = phi_v.cwiseAbs2();
    Rng rng(16);
    Eigen::MatrixXd noise(g, 2000);
    for (Eigen::Index w = 0; w < noise.cols(); ++w) noise.col(w) = standard_normal(g, rng);
    const Eigen::VectorXd got = rt_gradient_from_noise(PhiVector{phi_v}, lik, DirichletParams(alpha), noise);
    auto objective = [&](const Eigen::VectorXd& phi) {
      double s = 0.0;
      for (Eigen::Index w = 0; w < noise.cols(); ++w) {
        const Eigen::VectorXd u = transform_oracle(phi, noise.col(w));
        s += bt_loglik(table.characteristics(), q, u) + log_dir(u, alpha) - log_dir(u, theta);
      }
      return s / static_cast<double>(noise.cols());
    };
    Eigen::VectorXd fd(g);
    for (Eigen::Index k = 0; k < g; ++k) {
      Eigen::VectorXd up = phi_v, dn = phi_v;
      up[k] += 1e-5;
      dn[k] -= 1e-5;
      fd[k] = (objective(up) - objective(dn)) / 2e-5;
    }
    EXPECT_LT(relative_error(got, fd), 1e-3) << "gamma " << g;
  }
}

TEST(RtGradient, NearZeroAtPriorWithoutStatements) {
  const PreferenceLikelihood none;
  const DirichletParams alpha(Eigen::Vector3d(1.0, 2.0, 3.0));
  const PhiVector phi{alpha.values().cwiseSqrt()};
  Rng rng(17);
  const Eigen::VectorXd grad = rt_gradient(phi, none, alpha, 200000, rng);
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), 0.02);
}

TEST(RtGradient, LowerVarianceThanScore) {
  const auto t = gamma3_table();
  const PreferenceLikelihood lik(t, toy_statements());
  const auto alpha = DirichletParams::uniform(3);
  const PhiVector phi{Eigen::Vector3d(1.3, 0.9, 1.1)};
  const DirichletParams theta = phi.theta();
  Rng rng(18);
  const int repeats = 100;
  Eigen::MatrixXd rt(3, repeats), sc(3, repeats);
  for (int r = 0; r < repeats; ++r) {
    rt.col(r) = rt_gradient(phi, lik, alpha, 100, rng);
    // Score gradient expressed in phi space: dtheta/dphi = 2 phi.
    sc.col(r) = 2.0 * phi.values.cwiseProduct(score_gradient(theta, lik, alpha, 100, rng));
  }
  for (int k = 0; k < 3; ++k) {
    const double vr = (rt.row(k).array() - rt.row(k).mean()).square().sum() / (repeats - 1);
    const double vs = (sc.row(k).array() - sc.row(k).mean()).square().sum() / (repeats - 1);
    EXPECT_LT(10.0 * vr, vs) << "coordinate " << k;
  }
}

TEST(FitPosterior, EmptyStatementsStayAtPrior) {
  OptimizerConfig cfg;
  cfg.rng_seed = 3;
  for (auto est : {Estimator::reparam, Estimator::score}) {
    const auto fit = fit_posterior(PreferenceLikelihood{}, DirichletParams::uniform(3), cfg, est);
    EXPECT_LT((fit.theta.values().array() - 1.0).abs().maxCoeff(), 0.1) << to_string(est);
    EXPECT_EQ(fit.elbo_trace.size(), 500u);
  }
}

TEST(FitPosterior, StrongEvidenceMovesMeanTowardFirstCoordinate) {
  // a1 = (1, 0) beats a2 = (0, 1): every statement rewards u_1.
  const auto t = support::unit_table({{1.0, 0.0}, {0.0, 1.0}});
  Eigen::MatrixXd diffs(20, 2);
  diffs.rowwise() = (characteristic_vector(t, 0) - characteristic_vector(t, 1)).transpose();
  OptimizerConfig cfg;
  cfg.rng_seed = 5;
  for (auto est : {Estimator::reparam, Estimator::score}) {
    const auto fit = fit_posterior(PreferenceLikelihood(diffs), DirichletParams::uniform(2), cfg, est);
    EXPECT_GT(fit.theta.mean()[0], 0.5) << to_string(est);
  }
}

TEST(FitPosterior, PredictiveMatchesGridPosterior) {
  const auto t = gamma2_table();
  const auto q = toy_statements();
  OptimizerConfig cfg;
  cfg.rng_seed = 21;
  const auto fit = fit_posterior(t, q, DirichletParams::uniform(2), cfg, Estimator::reparam);
  const auto grid = support::grid_posterior(t, q);
  Rng rng(22);
  const auto samples = sample_posterior(fit.theta, 100000, rng);
  for (int i = 0; i < t.size(); ++i) {
    for (int j = i + 1; j < t.size(); ++j) {
      EXPECT_NEAR(posterior_predictive(samples, t, i, j), support::grid_predictive(grid, t, i, j), 0.05)
          << i << " vs " << j;
    }
  }
}

TEST(FitPosterior, BitReproducibleAndWarmStartable) {
  const auto t = gamma3_table();
  const auto q = toy_statements();
  OptimizerConfig cfg = OptimizerConfig::rollout();
  cfg.rng_seed = 99;
  for (auto est : {Estimator::reparam, Estimator::score}) {
    const auto a = fit_posterior(t, q, DirichletParams::uniform(3), cfg, est);
    const auto b = fit_posterior(t, q, DirichletParams::uniform(3), cfg, est);
    EXPECT_EQ(a.theta.values(), b.theta.values());
    EXPECT_EQ(a.elbo_trace, b.elbo_trace);
    const auto warm = fit_posterior(t, q, DirichletParams::uniform(3), cfg, est, &a.theta);
    EXPECT_TRUE(warm.theta.values().allFinite());
  }
  EXPECT_THROW(fit_posterior(t, q, DirichletParams::uniform(2), cfg, Estimator::reparam), std::invalid_argument);
}

TEST(FitPosterior, VarianceShrinksWithMoreConsistentStatements) {
  OptimizerConfig cfg;
  cfg.grad_samples = 1000;
  const std::vector<int> sizes{5, 10, 20, 40};
  std::vector<double> mean_variance(sizes.size(), 0.0);
  const int repeats = 10;
  for (int r = 0; r < repeats; ++r) {
    Rng rng(derive_seed(77, {static_cast<std::uint64_t>(r)}));
    const auto model = gen_true_model(3, ShapeSetting::linear, rng);
    const auto table = gen_performance_table(12, 3, rng);
    const auto all = gen_comparisons(model, table, sizes.back(), rng);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const PreferenceSet q(std::vector<PreferenceStatement>(all.statements().begin(),
                                                             all.statements().begin() + sizes[s]));
      cfg.rng_seed = derive_seed(78, {static_cast<std::uint64_t>(r), s});
      const auto fit = fit_posterior(table, q, DirichletParams::uniform(table.dimension()), cfg, Estimator::reparam);
      mean_variance[s] += posterior_variance(fit.theta) / repeats;
    }
  }
  for (std::size_t s = 1; s < sizes.size(); ++s) EXPECT_LE(mean_variance[s], mean_variance[s - 1]) << sizes[s];
}

TEST(SamplePosterior, MomentsMatchDirichlet) {
  Rng rng(30);
  const auto flat = sample_posterior(DirichletParams::uniform(2), 100000, rng);
  EXPECT_NEAR(flat.samples.col(0).mean(), 0.5, 0.005);
  EXPECT_NEAR(flat.samples.col(1).mean(), 0.5, 0.005);
  EXPECT_LT((flat.samples.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
  EXPECT_GE(flat.samples.minCoeff(), 0.0);

  const auto s = sample_posterior(DirichletParams(Eigen::Vector3d(4, 2, 2)), 100000, rng);
  EXPECT_NEAR(s.samples.col(0).mean(), 0.5, 0.01);
  EXPECT_NEAR(s.samples.col(1).mean(), 0.25, 0.01);
  EXPECT_NEAR(s.samples.col(2).mean(), 0.25, 0.01);

  const auto tight = sample_posterior(DirichletParams(Eigen::Vector2d(1000, 1000)), 100000, rng);
  const double want = 1000.0 * 1000.0 / (2000.0 * 2000.0 * 2001.0);
  const Eigen::ArrayXd c = tight.samples.col(0).array() - tight.samples.col(0).mean();
  const double var = c.square().sum() / (c.size() - 1);
  EXPECT_NEAR(var / want, 1.0, 0.2);
}

TEST(Predictive, DominanceTiesAndComplement) {
  const auto t = support::unit_table({{0.9, 0.8}, {0.4, 0.8}, {0.9, 0.8}, {0.1, 0.95}}, {2, 2});
  Rng rng(31);
  const auto s = sample_posterior(DirichletParams::uniform(4), 20000, rng);
  EXPECT_EQ(posterior_predictive(s, t, 0, 1), 1.0);
  EXPECT_EQ(posterior_predictive(s, t, 0, 2), 0.5);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) EXPECT_EQ(posterior_predictive(s, t, i, j) + posterior_predictive(s, t, j, i), 1.0);
    }
  }
}

TEST(Predictive, FlatPosteriorMatchesQuadrature) {
  const auto t = gamma2_table();
  const auto grid = support::grid_posterior(t, PreferenceSet{});
  Rng rng(32);
  for (int i = 0; i < t.size(); ++i) {
    for (int j = 0; j < t.size(); ++j) {
      if (i == j) continue;
      EXPECT_NEAR(posterior_predictive(DirichletParams::uniform(2), t, i, j, 50000, rng),
                  support::grid_predictive(grid, t, i, j), 0.03);
    }
  }
}

TEST(PosteriorVariance, Examples) {
  EXPECT_NEAR(posterior_variance(DirichletParams::uniform(2)), 1.0 / 6.0, 1e-15);
  EXPECT_LT(posterior_variance(DirichletParams(Eigen::Vector3d::Constant(1e9))), 1e-9);
  const Eigen::Vector4d th(0.5, 2.0, 7.0, 1.5);
  const Eigen::Vector4d perm(7.0, 0.5, 1.5, 2.0);
  EXPECT_DOUBLE_EQ(posterior_variance(DirichletParams(th)), posterior_variance(DirichletParams(perm)));
  EXPECT_NEAR(posterior_variance(DirichletParams(th)), support::dirichlet_trace_variance(th), 1e-15);
}

TEST(Estimators, ParseAndValidate) {
  EXPECT_EQ(parse_estimator("rt"), Estimator::reparam);
  EXPECT_EQ(parse_estimator("score"), Estimator::score);
  EXPECT_THROW(parse_estimator("mcmc"), std::invalid_argument);
  OptimizerConfig bad;
  bad.beta1 = 1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  EXPECT_THROW(DirichletParams(Eigen::Vector2d(1.0, 0.0)), std::invalid_argument);
}
