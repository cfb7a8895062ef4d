#include "mi/errors.hpp"
#include "mi/regression.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace mi {
namespace {

using testing::max_rel_diff;

Matrix line_design(std::size_t n) {
  Matrix x(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = static_cast<double>(i + 1);
  }
  return x;
}

TEST(DesignPartition, SplitsRespondentsAndNonrespondents) {
  const DesignPartition d(line_design(8), {6, 1, 3, 0, 7});
  EXPECT_EQ(d.n(), 8u);
  EXPECT_EQ(d.r(), 5u);
  EXPECT_EQ(d.respondents(), (std::vector<std::size_t>{0, 1, 3, 6, 7}));
  EXPECT_EQ(d.missing(), (std::vector<std::size_t>{2, 4, 5}));
  EXPECT_DOUBLE_EQ(d.x_resp()(3, 1), 7.0);
  EXPECT_DOUBLE_EQ(d.x_miss()(1, 1), 5.0);
}

TEST(DesignPartition, RejectsTooFewRespondents) {
  EXPECT_THROW(DesignPartition::leading(line_design(10), 4), ValidationError);
  EXPECT_NO_THROW(DesignPartition::leading(line_design(10), 5));
}

TEST(DesignPartition, RejectsDuplicateAndOutOfRangeIndices) {
  EXPECT_THROW(DesignPartition(line_design(10), {0, 1, 2, 3, 3, 4}), ValidationError);
  EXPECT_THROW(DesignPartition(line_design(10), {0, 1, 2, 3, 4, 10}), ValidationError);
}

TEST(DesignPartition, ReportsNumericalRankOfDeficientRespondentDesign) {
  Matrix x(8, 3);
  for (Eigen::Index i = 0; i < 8; ++i) x.row(i) << 1.0, double(i), 2.0 * double(i);
  try {
    DesignPartition::leading(x, 6);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.rank(), 2);
    EXPECT_EQ(e.columns(), 3);
  }
}

TEST(OlsFit, ExactLinearResponseHasZeroResidualVariance) {
  const DesignPartition d = DesignPartition::leading(line_design(10), 7);
  const Vector y = d.x_resp() * Eigen::Vector2d(2.0, 4.0);
  const RegressionFit fit = ols_fit(d, y);
  EXPECT_NEAR(fit.beta_hat(0), 2.0, 1e-12);
  EXPECT_NEAR(fit.beta_hat(1), 4.0, 1e-12);
  EXPECT_EQ(fit.sigma2_hat, 0.0);
  EXPECT_EQ(fit.dof, 5);
}

TEST(OlsFit, InterceptOnlyGivesMeanAndSampleVariance) {
  const DesignPartition d = DesignPartition::leading(Matrix::Ones(5, 1), 5);
  Vector y(5);
  y << 1, 2, 3, 4, 5;
  const RegressionFit fit = ols_fit(d, y);
  EXPECT_NEAR(fit.beta_hat(0), 3.0, 1e-14);
  EXPECT_NEAR(fit.sigma2_hat, 2.5, 1e-14);
}

TEST(OlsFit, MatchesExplicitNormalEquations) {
  std::mt19937_64 gen(11);
  const Matrix x = testing::random_design(gen, 10, 2);
  std::normal_distribution<double> z;
  Vector y(10);
  for (auto& v : y) v = z(gen);
  const DesignPartition d = DesignPartition::leading(x, 10);
  const RegressionFit fit = ols_fit(d, y);

  const Eigen::Matrix2d inv = testing::inverse_2x2(x.transpose() * x);
  const Eigen::Vector2d beta = inv * (x.transpose() * y);
  double rss = 0.0;
  for (Eigen::Index i = 0; i < 10; ++i) rss += std::pow(y(i) - x.row(i).dot(beta), 2);
  EXPECT_LT(max_rel_diff(fit.beta_hat, beta), 1e-10);
  EXPECT_LT(max_rel_diff(fit.xtx_inv, inv), 1e-10);
  EXPECT_NEAR(fit.sigma2_hat, rss / 8.0, 1e-10 * rss / 8.0);
  EXPECT_LT(max_rel_diff(fit.xtx_inv_chol * fit.xtx_inv_chol.transpose(), inv), 1e-12);
}

TEST(OlsFit, ResidualsOrthogonalToRespondentColumns) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = testing::random_design(gen, 30, 4);
    const DesignPartition d(x, testing::random_subset(gen, 30, 18));
    std::normal_distribution<double> z(0.0, 3.0);
    Vector y(18);
    for (auto& v : y) v = 5.0 + z(gen);
    const RegressionFit fit = ols_fit(d, y);
    const Vector score = d.x_resp().transpose() * (y - d.x_resp() * fit.beta_hat);
    const double scale = (d.x_resp().transpose() * y).cwiseAbs().maxCoeff();
    EXPECT_LT(score.cwiseAbs().maxCoeff(), 1e-10 * scale);
  }
}

TEST(OlsFit, ResidualVarianceInvariantUnderReparameterization) {
  std::mt19937_64 gen(8);
  const Matrix x = testing::random_design(gen, 15, 3);
  Matrix g(3, 3);
  g << 2.0, 0.5, -1.0, 0.0, 1.5, 0.3, 1.0, -0.2, 0.7;
  std::normal_distribution<double> z;
  Vector y(15);
  for (auto& v : y) v = z(gen);
  const auto resp = testing::random_subset(gen, 15, 12);
  const RegressionFit a = ols_fit(DesignPartition(x, resp), DesignPartition(x, resp).gather_respondents(y));
  const RegressionFit b = ols_fit(DesignPartition(x * g, resp), DesignPartition(x, resp).gather_respondents(y));
  EXPECT_NEAR(a.sigma2_hat, b.sigma2_hat, 1e-10 * a.sigma2_hat);
}

TEST(OlsFit, RejectsWrongLength) {
  const DesignPartition d = DesignPartition::leading(line_design(10), 7);
  EXPECT_THROW(ols_fit(d, Vector::Zero(6)), ValidationError);
}

TEST(HatValue, InterceptOnlyIsOneOverR) {
  const DesignPartition d = DesignPartition::leading(Matrix::Ones(9, 1), 6);
  Vector y(6);
  y << 1, 4, 2, 8, 5, 7;
  const RegressionFit fit = ols_fit(d, y);
  const Vector one = Vector::Ones(1);
  EXPECT_NEAR(hat_value(fit, one, one), 1.0 / 6.0, 1e-15);
}

TEST(HatValue, SymmetricBilinearAndMatchesProjection) {
  std::mt19937_64 gen(3);
  const Matrix x = testing::random_design(gen, 8, 2);
  const DesignPartition d = DesignPartition::leading(x, 8);
  const RegressionFit fit = ols_fit(d, Vector::Random(8));

  // Brute-force projection X (X'X)^{-1} X' via Gauss-Jordan.
  const Matrix proj = x * testing::gauss_jordan_inverse(x.transpose() * x) * x.transpose();
  EXPECT_NEAR(hat_value(fit, d.row(0), d.row(0)), proj(0, 0), 1e-12);
  EXPECT_NEAR(hat_value(fit, d.row(2), d.row(5)), proj(2, 5), 1e-12);

  const Vector a = d.row(1);
  const Vector b = d.row(4);
  const Vector c = d.row(6);
  EXPECT_DOUBLE_EQ(hat_value(fit, a, b), hat_value(fit, b, a));
  EXPECT_NEAR(hat_value(fit, 2.0 * a + 3.0 * c, b), 2.0 * hat_value(fit, a, b) + 3.0 * hat_value(fit, c, b), 1e-12);
  EXPECT_THROW(hat_value(fit, Vector::Ones(3), b), ValidationError);
}

TEST(PartitionedInverse, NoMissingUnitsReturnsFullInverse) {
  std::mt19937_64 gen(1);
  const DesignPartition d = DesignPartition::leading(testing::random_design(gen, 10, 3), 10);
  EXPECT_EQ(partitioned_inverse_expansion(d), d.gram_all_inv());
}

TEST(PartitionedInverse, InterceptOnlyScalarIdentity) {
  const DesignPartition d = DesignPartition::leading(Matrix::Ones(10, 1), 6);
  const double expected = 1.0 / 10 + 4.0 / 100 + (4.0 * 4.0) / (100.0 * 6.0);
  EXPECT_NEAR(partitioned_inverse_expansion(d)(0, 0), expected, 1e-15);
  EXPECT_NEAR(expected, 1.0 / 6.0, 1e-15);
}

TEST(PartitionedInverse, EqualsDirectRespondentInverse) {
  std::mt19937_64 gen(12);
  const Matrix x = testing::random_design(gen, 12, 3);
  const auto resp = testing::random_subset(gen, 12, 7);
  const DesignPartition d(x, resp);
  const Matrix xr = testing::rows_of(x, resp);
  EXPECT_LT(max_rel_diff(partitioned_inverse_expansion(d), testing::gauss_jordan_inverse(xr.transpose() * xr)), 1e-10);
}

TEST(PartitionedInverse, HoldsOnRandomDesigns) {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> pick_p(1, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = static_cast<std::size_t>(pick_p(gen));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(p + 4, 50)(gen);
    const std::size_t r = std::uniform_int_distribution<std::size_t>(p + 3, n)(gen);
    const Matrix x = testing::random_design(gen, n, p);
    const auto resp = testing::random_subset(gen, n, r);
    const DesignPartition d(x, resp);
    const Matrix xr = testing::rows_of(x, resp);
    EXPECT_LT(max_rel_diff(partitioned_inverse_expansion(d), testing::gauss_jordan_inverse(xr.transpose() * xr)), 1e-10)
        << "n=" << n << " p=" << p << " r=" << r;
  }
}

}  // namespace
}  // namespace mi
