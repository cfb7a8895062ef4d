#include "mi/combiner.hpp"
#include "mi/errors.hpp"
#include "mi/imputation.hpp"
#include "mi/moments.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace mi {
namespace {

using testing::max_rel_diff;

Matrix eq34_design(std::size_t n) {
  Matrix x(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << 1.0, 5.0 + 10.0 * double(i + 1) / double(n + 1);
  return x;
}

TEST(ImputedRegressionFit, ExactResponseHasZeroVariance) {
  const DesignPartition d = DesignPartition::leading(eq34_design(20), 14);
  const Vector y = d.x_all() * Eigen::Vector2d(2.0, 4.0);
  const PointVariance pv = imputed_regression_fit(d, y);
  EXPECT_NEAR(pv.point(0), 2.0, 1e-12);
  EXPECT_NEAR(pv.point(1), 4.0, 1e-12);
  EXPECT_TRUE(pv.variance.isZero(0.0));
}

TEST(ImputedRegressionFit, ReducesToCompleteDataFit) {
  std::mt19937_64 gen(21);
  const Matrix x = testing::random_design(gen, 15, 3);
  const DesignPartition d = DesignPartition::leading(x, 15);
  const Vector y = Vector::Random(15);
  const PointVariance pv = imputed_regression_fit(d, y);
  const RegressionFit fit = ols_fit(d, y);
  EXPECT_LT(max_rel_diff(pv.point, fit.beta_hat), 1e-12);
  EXPECT_LT(max_rel_diff(pv.variance, fit.xtx_inv * fit.sigma2_hat), 1e-12);
}

TEST(ImputedRegressionFit, ResidualSumMatchesTwoPartLoop) {
  std::mt19937_64 gen(22);
  const Matrix x = testing::random_design(gen, 18, 3);
  const DesignPartition d(x, testing::random_subset(gen, 18, 11));
  Vector y(18);
  std::normal_distribution<double> z(3.0, 1.5);
  for (auto& v : y) v = z(gen);
  const PointVariance pv = imputed_regression_fit(d, y);

  const Matrix ginv = testing::gauss_jordan_inverse(x.transpose() * x);
  const Vector beta = ginv * (x.transpose() * y);
  double resp_part = 0.0;
  double miss_part = 0.0;
  for (std::size_t i : d.respondents()) resp_part += std::pow(y(Eigen::Index(i)) - x.row(Eigen::Index(i)).dot(beta), 2);
  for (std::size_t i : d.missing()) miss_part += std::pow(y(Eigen::Index(i)) - x.row(Eigen::Index(i)).dot(beta), 2);
  const double sigma2 = (resp_part + miss_part) / (18 - 3);
  EXPECT_LT(max_rel_diff(pv.variance, ginv * sigma2), 1e-10);
  EXPECT_THROW(imputed_regression_fit(d, Vector::Zero(17)), ValidationError);
}

TEST(Combine, IdenticalInputsHaveNoBetweenVariance) {
  const PointVariance pv{Eigen::Vector2d(1.0, 2.0), Eigen::Matrix2d::Identity() * 0.3};
  const std::vector<PointVariance> in(4, pv);
  const MiEstimate est = combine(std::span<const PointVariance>(in));
  EXPECT_TRUE(est.between.isZero(0.0));
  EXPECT_EQ(est.rubin_total, est.within);
  EXPECT_EQ(est.point, pv.point);
}

TEST(Combine, ScalarRubinTotal) {
  const std::vector<ScalarEstimate> in{{-1.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}};
  const MiEstimate est = combine(std::span<const ScalarEstimate>(in));
  EXPECT_DOUBLE_EQ(est.within(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(est.between(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(est.rubin_total(0, 0), 1.6);
  EXPECT_EQ(est.m, 5);
}

TEST(Combine, RejectsSingleImputationAndMismatchedShapes) {
  const std::vector<ScalarEstimate> one{{1.0, 1.0}};
  EXPECT_THROW(combine(std::span<const ScalarEstimate>(one)), ValidationError);
  const std::vector<PointVariance> bad{{Vector::Zero(2), Matrix::Zero(2, 2)}, {Vector::Zero(3), Matrix::Zero(3, 3)}};
  EXPECT_THROW(combine(std::span<const PointVariance>(bad)), ValidationError);
}

TEST(Combine, RubinIdentityAndOrderInvariance) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = std::uniform_int_distribution<int>(2, 12)(gen);
    std::vector<PointVariance> in;
    for (int k = 0; k < m; ++k) {
      Matrix a = Matrix::Random(3, 3);
      in.push_back({Vector::NullaryExpr(3, [&] { return z(gen); }), a * a.transpose()});
    }
    const MiEstimate est = combine(std::span<const PointVariance>(in));
    const Matrix residual = est.rubin_total - est.within - (1.0 + 1.0 / m) * est.between;
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-15 * std::max(1.0, est.rubin_total.cwiseAbs().maxCoeff()));
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(est.between).eigenvalues().minCoeff(), -1e-12);

    std::shuffle(in.begin(), in.end(), gen);
    const MiEstimate shuffled = combine(std::span<const PointVariance>(in));
    EXPECT_LT(max_rel_diff(shuffled.between, est.between), 1e-13);
    EXPECT_LT(max_rel_diff(shuffled.point, est.point), 1e-14);
  }
}

TEST(AlternativeVariance, ReducesToRespondentVarianceWithoutBetween) {
  const DesignPartition d = DesignPartition::leading(eq34_design(20), 12);
  const RegressionFit fit = ols_fit(d, Vector::LinSpaced(12, 1.0, 9.0) + 0.2 * Vector::Random(12));
  MiEstimate est;
  est.m = 5;
  est.between = Matrix::Zero(2, 2);
  EXPECT_LT(max_rel_diff(alternative_variance(fit, est), fit.xtx_inv * fit.sigma2_hat), 1e-15);
  est.between = Matrix::Identity(2, 2);
  est.m = 1000000;
  EXPECT_LT((alternative_variance(fit, est) - fit.xtx_inv * fit.sigma2_hat).cwiseAbs().maxCoeff(), 1.1e-6);
}

// E(B) matches lambda [G_r^{-1} - G_n^{-1}] sigma^2, and the alternative
// estimator is unbiased for Var(beta_hat_{M,n}).
TEST(Combine, MonteCarloBetweenAndAlternativeVarianceMatchClosedForm) {
  const DesignPartition d = DesignPartition::leading(eq34_design(20), 12);
  const Vector beta = Eigen::Vector2d(2.0, 4.0);
  const int m = 5;
  const StreamKey root(4242);
  constexpr int kReps = 100000;
  std::vector<std::vector<double>> between(3), alt(3);
  for (int l = 0; l < kReps; ++l) {
    auto rng = root.child(std::uint64_t(l)).child(Stage::kPopulation).engine();
    std::normal_distribution<double> e;
    Vector y = d.x_resp() * beta;
    for (auto& v : y) v += e(rng);
    const RegressionFit fit = ols_fit(d, y);
    const auto mi = multiple_impute(d, y, fit, Prior::schenker_welsh(), m,
                                    root.child(std::uint64_t(l)).child(Stage::kImputation));
    std::vector<PointVariance> fits;
    for (const auto& c : mi.completed) fits.push_back(imputed_regression_fit(d, c));
    const MiEstimate est = combine(std::span<const PointVariance>(fits));
    const Matrix av = alternative_variance(fit, est);
    between[0].push_back(est.between(0, 0));
    between[1].push_back(est.between(0, 1));
    between[2].push_back(est.between(1, 1));
    alt[0].push_back(av(0, 0));
    alt[1].push_back(av(0, 1));
    alt[2].push_back(av(1, 1));
  }
  const double lam = 10.0 / 8.0;
  const Matrix expected_b = lam * (d.gram_resp_inv() - d.gram_all_inv());
  const Matrix expected_v = d.gram_resp_inv() + (lam / m) * (d.gram_resp_inv() - d.gram_all_inv());
  const int idx[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int c = 0; c < 3; ++c) {
    const auto b = testing::mean_and_se(between[c]);
    const auto a = testing::mean_and_se(alt[c]);
    EXPECT_NEAR(b.mean, expected_b(idx[c][0], idx[c][1]), 4.0 * b.se) << "between " << c;
    EXPECT_NEAR(a.mean, expected_v(idx[c][0], idx[c][1]), 4.0 * a.se) << "alternative " << c;
  }
}

TEST(LinearEstimatorSpec, ValidatesOmega) {
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 0.5;
  EXPECT_THROW(LinearEstimatorSpec(Vector::Ones(3), asym), ValidationError);
  Matrix indefinite = Matrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  EXPECT_THROW(LinearEstimatorSpec(Vector::Ones(3), indefinite), ValidationError);
  EXPECT_THROW(LinearEstimatorSpec(Vector::Ones(3), Matrix::Identity(2, 2)), ValidationError);
}

TEST(ApplyLinearEstimator, CoordinateExtraction) {
  Vector alpha = Vector::Zero(6);
  alpha(3) = 1.0;
  const LinearEstimatorSpec spec(alpha, Matrix::Zero(6, 6));
  const Vector y = Vector::LinSpaced(6, 1.0, 6.0);
  const ScalarEstimate est = apply_linear_estimator(spec, y);
  EXPECT_EQ(est.point, 4.0);
  EXPECT_EQ(est.variance, 0.0);
  EXPECT_THROW(apply_linear_estimator(spec, Vector::Zero(5)), ValidationError);
}

TEST(ApplyLinearEstimator, MeanSpecOnConstantVector) {
  const Matrix x = eq34_design(20);
  const LinearEstimatorSpec spec = LinearEstimatorSpec::fitted_value(x, Eigen::Vector2d(1.0, 10.0));
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_NEAR(spec.alpha()(i), 1.0 / 20.0, 1e-15);
  const ScalarEstimate est = apply_linear_estimator(spec, Vector::Constant(20, 7.25));
  EXPECT_NEAR(est.point, 7.25, 1e-13);
  EXPECT_NEAR(est.variance, 0.0, 1e-12);
}

TEST(ApplyLinearEstimator, MeanSpecMatchesDoubleLoopAndSampleVariance) {
  const Matrix x = eq34_design(20);
  const LinearEstimatorSpec spec = LinearEstimatorSpec::fitted_value(x, Eigen::Vector2d(1.0, 10.0));
  std::mt19937_64 gen(8);
  std::normal_distribution<double> z(42.0, 3.0);
  Vector y(20);
  for (auto& v : y) v = z(gen);
  const ScalarEstimate est = apply_linear_estimator(spec, y);

  double point = 0.0;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i) {
    point += spec.alpha()(i) * y(i);
    for (Eigen::Index j = 0; j < 20; ++j) quad += spec.omega()(i, j) * y(i) * y(j);
  }
  EXPECT_NEAR(est.point, point, 1e-12 * std::abs(point));
  EXPECT_NEAR(est.variance, quad, 1e-12 * std::abs(quad));

  // Fitted value at the design mean is ybar with variance sigma_hat_n^2 / n.
  const DesignPartition d = DesignPartition::leading(x, 20);
  const RegressionFit fit = ols_fit(d, y);
  EXPECT_NEAR(est.point, y.mean(), 1e-12 * 42.0);
  EXPECT_NEAR(est.variance, fit.sigma2_hat / 20.0, 1e-10 * est.variance);
}

TEST(ApplyLinearEstimator, RegressionCoefficientSpecReproducesImputedFit) {
  std::mt19937_64 gen(31);
  const Matrix x = testing::random_design(gen, 16, 3);
  const DesignPartition d = DesignPartition::leading(x, 10);
  const Vector y = Vector::Random(16) * 5.0;
  const PointVariance pv = imputed_regression_fit(d, y);
  for (Eigen::Index c = 0; c < 3; ++c) {
    const ScalarEstimate est = apply_linear_estimator(LinearEstimatorSpec::regression_coefficient(x, c), y);
    EXPECT_NEAR(est.point, pv.point(c), 1e-10 * std::max(1.0, std::abs(pv.point(c))));
    EXPECT_NEAR(est.variance, pv.variance(c, c), 1e-10 * pv.variance(c, c));
  }
}

TEST(BarnardRubinDf, NoBetweenVarianceGivesObservedDf) {
  EXPECT_DOUBLE_EQ(barnard_rubin_df(1.0, 0.0, 5, 18.0), 18.0 * 19.0 / 21.0);
}

TEST(BarnardRubinDf, HandEvaluatedExample) {
  // gamma = 0.375, nu_m = 28.444..., nu_obs = 10.178...
  EXPECT_NEAR(barnard_rubin_df(1.0, 0.5, 5, 18.0), 7.496147128326313, 1e-12);
}

TEST(BarnardRubinDf, BoundedByBothComponents) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int t = 0; t < 1000; ++t) {
    const double w = u(gen);
    const double b = u(gen);
    const int m = std::uniform_int_distribution<int>(2, 50)(gen);
    const double com = u(gen) * 20.0;
    const double g = (1.0 + 1.0 / m) * b / (w + (1.0 + 1.0 / m) * b);
    const double nu_m = (m - 1) / (g * g);
    const double nu_obs = com * (com + 1) / (com + 3) * (1 - g);
    const double df = barnard_rubin_df(w, b, m, com);
    EXPECT_GT(df, 0.0);
    EXPECT_LE(df, std::min(nu_m, nu_obs) * (1 + 1e-14));
  }
  EXPECT_THROW(barnard_rubin_df(0.0, 1.0, 5, 10.0), ValidationError);
  EXPECT_THROW(barnard_rubin_df(1.0, 1.0, 1, 10.0), ValidationError);
}

TEST(StudentTQuantile, MatchesHighPrecisionReferences) {
  // Reference values from an arbitrary-precision quadrature inversion.
  EXPECT_NEAR(student_t_quantile(0.025, 7.5), 2.3330396268649746, 1e-9);
  EXPECT_NEAR(student_t_quantile(0.1, 3.3), 1.5983669585600863, 1e-9);
  EXPECT_NEAR(student_t_quantile(0.025, 1.0), 12.706204736432095, 1e-8);
  EXPECT_NEAR(student_t_quantile(0.025, 2.0), 4.302652729696142, 1e-9);
  EXPECT_NEAR(student_t_quantile(0.025, 0.7), 36.611415031699515, 1e-6);
  EXPECT_NEAR(student_t_quantile(0.025, 45.2), 2.0138574421734745, 1e-9);
  EXPECT_NEAR(student_t_quantile(0.975, 7.5), -2.3330396268649746, 1e-9);
  EXPECT_EQ(student_t_quantile(0.5, 3.0), 0.0);
}

TEST(StudentTQuantile, AgreesWithQuadratureBisection) {
  for (double df : {1.5, 2.7, 4.0, 7.5, 12.3, 30.0, 88.8}) {
    for (double tail : {0.005, 0.025, 0.05, 0.2}) {
      EXPECT_NEAR(student_t_quantile(tail, df), testing::t_quantile_by_quadrature(tail, df), 1e-7)
          << "df=" << df << " tail=" << tail;
    }
  }
}

TEST(ConfidenceInterval, ZeroVarianceAndNormalLimit) {
  const IntervalEstimate zero = confidence_interval(3.0, 0.0, 5.0, 0.95);
  EXPECT_EQ(zero.half_width, 0.0);
  EXPECT_TRUE(zero.contains(3.0));
  const IntervalEstimate wide = confidence_interval(0.0, 1.0, 1e6, 0.95);
  EXPECT_NEAR(wide.half_width, 1.959964, 1e-3);
  const IntervalEstimate t75 = confidence_interval(1.0, 4.0, 7.5, 0.95);
  EXPECT_NEAR(t75.half_width, 2.0 * 2.3330396268649746, 2e-6);
  EXPECT_NEAR(t75.lower(), 1.0 - t75.half_width, 1e-15);
  EXPECT_THROW(confidence_interval(0.0, 1.0, 5.0, 1.0), ValidationError);
  EXPECT_THROW(confidence_interval(0.0, 1.0, 5.0, 0.0), ValidationError);
  EXPECT_THROW(confidence_interval(0.0, -1.0, 5.0, 0.9), ValidationError);
}

}  // namespace
}  // namespace mi
