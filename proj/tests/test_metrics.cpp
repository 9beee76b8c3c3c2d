#include <gtest/gtest.h>

#include <cmath>

#include "prefelicit/metrics.hpp"
#include "prefelicit/simulation.hpp"
#include "support.hpp"

using namespace prefelicit;

namespace {

double h2(double p) { return -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

Eigen::MatrixXd random_values(int w, int n, Rng& rng) {
  Eigen::MatrixXd v(w, n);
  for (int r = 0; r < w; ++r) {
    for (int i = 0; i < n; ++i) v(r, i) = uniform01(rng);
  }
  return v;
}

}  // namespace

TEST(Pwi, DominanceDuplicatesAndQuadrature) {
  const auto t = support::unit_table({{0.9, 0.7}, {0.2, 0.6}, {0.9, 0.7}, {0.1, 0.95}});
  Rng rng(1);
  const auto s = sample_posterior(DirichletParams::uniform(2), 40000, rng);
  const Eigen::MatrixXd pwi = compute_pwi(s, t);
  EXPECT_EQ(pwi(0, 1), 1.0);
  EXPECT_EQ(pwi(0, 2), 0.5);
  EXPECT_EQ(pwi(0, 0), 0.0);
  const auto grid = support::grid_posterior(t, PreferenceSet{});
  for (int i : {0, 1, 3}) {
    for (int j : {0, 1, 3}) {
      if (i != j) EXPECT_NEAR(pwi(i, j), support::grid_predictive(grid, t, i, j), 0.03);
    }
  }
}

TEST(Pwi, ComplementaryOffDiagonal) {
  Rng rng(2);
  Eigen::MatrixXd v = random_values(500, 6, rng);
  v.col(4) = v.col(1);  // exact ties
  const Eigen::MatrixXd pwi = compute_pwi(v);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j) continue;
      EXPECT_EQ(pwi(i, j) + pwi(j, i), 1.0);
      EXPECT_GE(pwi(i, j), 0.0);
      EXPECT_LE(pwi(i, j), 1.0);
    }
  }
}

TEST(Rai, IdenticalAlternativesRankByIndex) {
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(10, 4, 0.3);
  EXPECT_TRUE(compute_rai(v).isIdentity());
}

TEST(Rai, DominatorAlwaysFirst) {
  const auto t = support::unit_table({{0.5, 0.5}, {1.0, 0.9}, {0.2, 0.8}}, {2, 2});
  Rng rng(3);
  const auto s = sample_posterior(DirichletParams::uniform(4), 5000, rng);
  EXPECT_EQ(compute_rai(s, t)(1, 0), 1.0);
}

TEST(Rai, RowsAndColumnsSumToOne) {
  Rng rng(4);
  Eigen::MatrixXd v = random_values(300, 5, rng);
  v.col(3) = v.col(0);
  const Eigen::MatrixXd rai = compute_rai(v);
  for (int k = 0; k < 5; ++k) {
    EXPECT_NEAR(rai.row(k).sum(), 1.0, 1e-12);
    EXPECT_NEAR(rai.col(k).sum(), 1.0, 1e-12);
  }
}

TEST(Rai, TwoAlternativesMatchPwi) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd v = random_values(200, 2, rng);
    const Eigen::MatrixXd pwi = compute_pwi(v);
    const Eigen::MatrixXd rai = compute_rai(v);
    EXPECT_DOUBLE_EQ(rai(0, 0), pwi(0, 1));
  }
}

TEST(Poi, NonStrictWithUnitDiagonal) {
  Eigen::MatrixXd v(4, 3);
  v << 0.1, 0.1, 0.3,
       0.5, 0.5, 0.2,
       0.2, 0.6, 0.9,
       0.7, 0.7, 0.0;
  const Eigen::MatrixXd poi = compute_poi(v);
  EXPECT_EQ(poi(0, 1), 0.75);
  EXPECT_EQ(poi(1, 0), 1.0);
  EXPECT_EQ(poi(2, 0), 0.5);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(poi(i, i), 1.0);
}

TEST(Asp, Examples) {
  const Eigen::Vector3d truth(0.9, 0.5, 0.1);
  Eigen::Matrix3d perfect;
  perfect << 1, 1, 1, 0, 1, 1, 0, 0, 1;
  EXPECT_DOUBLE_EQ(asp(perfect, truth), 1.0);
  Eigen::Matrix3d half = Eigen::Matrix3d::Constant(0.5);
  EXPECT_DOUBLE_EQ(asp(half, truth), 0.5);
}

TEST(Asp, InvariantToIncreasingTransformAndBounded) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 5;
    const Eigen::MatrixXd poi = compute_poi(random_values(100, n, rng));
    Eigen::VectorXd truth(n);
    for (int i = 0; i < n; ++i) truth[i] = uniform01(rng);
    const Eigen::VectorXd transformed = (3.0 * truth.array()).exp() - 7.0;
    const double a = asp(poi, truth);
    EXPECT_DOUBLE_EQ(a, asp(poi, transformed));
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Entropy, FPwiExamples) {
  EXPECT_DOUBLE_EQ(f_pwi((Eigen::Matrix3d() << 0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0).finished()), 0.5);
  EXPECT_EQ(f_pwi((Eigen::Matrix3d() << 0, 1, 1, 0, 0, 0, 0, 1, 0).finished()), 0.0);
  Eigen::Matrix2d p;
  p << 0, 0.25, 0.75, 0;
  EXPECT_NEAR(f_pwi(p), 0.4056390622295664, 1e-12);
}

TEST(Entropy, FRaiExamples) {
  for (int n : {2, 3, 6}) {
    EXPECT_NEAR(f_rai(Eigen::MatrixXd::Constant(n, n, 1.0 / n)), std::log2(n), 1e-12);
  }
  Eigen::Matrix3d perm;
  perm << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  EXPECT_EQ(f_rai(perm), 0.0);
  EXPECT_EQ(f_rai(Eigen::Matrix3d::Identity()), 0.0);
  Eigen::Matrix2d r;
  r << 0.25, 0.75, 0.75, 0.25;
  EXPECT_NEAR(f_rai(r), h2(0.25), 1e-12);
  EXPECT_NEAR(f_rai(r), 0.8112781244591328, 1e-12);
}

TEST(Entropy, RangesOnRandomPosteriors) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 6;
    const Eigen::MatrixXd v = random_values(200, n, rng);
    const double fp = f_pwi(compute_pwi(v));
    const double fr = f_rai(compute_rai(v));
    EXPECT_GE(fp, 0.0);
    EXPECT_LE(fp, 1.0);
    EXPECT_GE(fr, 0.0);
    EXPECT_LE(fr, std::log2(n) + 1e-12);
  }
}

TEST(Summary, AgreesWithPieces) {
  const auto t = support::unit_table({{0.9, 0.1}, {0.3, 0.6}, {0.5, 0.5}}, {2, 2});
  const DirichletParams theta(Eigen::Vector4d(2.0, 1.0, 3.0, 1.5));
  Rng rng(8);
  const auto s = sample_posterior(theta, 2000, rng);
  const auto sum = summarize_uncertainty(theta, s, t);
  EXPECT_DOUBLE_EQ(sum.f_var, posterior_variance(theta));
  EXPECT_DOUBLE_EQ(sum.f_var, f_var(theta));
  EXPECT_DOUBLE_EQ(sum.f_pwi, f_pwi(compute_pwi(s, t)));
  EXPECT_DOUBLE_EQ(sum.f_rai, f_rai(compute_rai(s, t)));
  EXPECT_NEAR(f_var(DirichletParams::uniform(2)), 1.0 / 6.0, 1e-15);
}

TEST(Metrics, RejectDegenerateInput) {
  EXPECT_THROW(f_pwi(Eigen::MatrixXd::Zero(1, 1)), std::invalid_argument);
  EXPECT_THROW(asp(Eigen::Matrix3d::Zero(), Eigen::Vector2d::Zero()), std::invalid_argument);
  EXPECT_THROW(compute_pwi(Eigen::MatrixXd(0, 3)), std::invalid_argument);
}
