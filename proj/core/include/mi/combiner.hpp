#pragma once

#include "mi/regression.hpp"

#include <span>
#include <vector>

namespace mi {

/// A complete-data point estimate and its variance estimate.
struct PointVariance {
  Vector point;
  Matrix variance;
};

struct ScalarEstimate {
  double point = 0.0;
  double variance = 0.0;
};

/// Rubin's combining-rule output for M completed-data analyses.
struct MiEstimate {
  Vector point;
  Matrix within;
  Matrix between;
  /// within + (1 + 1/m) between
  Matrix rubin_total;
  int m = 0;
};

/// Linear point estimator sum_i alpha_i y_i paired with the quadratic
/// variance estimator y' Omega y. Omega must be symmetric PSD.
class LinearEstimatorSpec {
 public:
  LinearEstimatorSpec(Vector alpha, Matrix omega);

  /// Fitted value x0' beta_hat_n with variance estimator
  /// x0' (X_n'X_n)^{-1} x0 sigma_hat_n^2. With an intercept column and x0 set
  /// to the column means of X_n this is ybar_n with sigma_hat_n^2 / n.
  static LinearEstimatorSpec fitted_value(const Matrix& x_all, const Vector& x0);
  /// Coordinate `coef` of the full-sample OLS fit, with variance estimator
  /// [(X_n'X_n)^{-1}]_{cc} sigma_hat_n^2.
  static LinearEstimatorSpec regression_coefficient(const Matrix& x_all, Eigen::Index coef);

  Eigen::Index n() const noexcept { return alpha_.size(); }
  const Vector& alpha() const noexcept { return alpha_; }
  const Matrix& omega() const noexcept { return omega_; }

 private:
  Vector alpha_;
  Matrix omega_;
};

struct IntervalEstimate {
  double center = 0.0;
  double half_width = 0.0;
  double df = 0.0;
  double level = 0.95;

  double lower() const noexcept { return center - half_width; }
  double upper() const noexcept { return center + half_width; }
  bool contains(double value) const noexcept { return lower() <= value && value <= upper(); }
};

/// Full-sample OLS on a completed vector: beta = G_n^{-1} X_n' y and
/// V = G_n^{-1} sigma_hat^2 with the (n - p) residual denominator.
PointVariance imputed_regression_fit(const DesignPartition& design, const Vector& completed);

/// Rubin's combining rules. Needs m >= 2 conformable entries.
MiEstimate combine(std::span<const PointVariance> per_imputation);
MiEstimate combine(std::span<const ScalarEstimate> per_imputation);

/// Var_hat(beta_hat_r) + B / m, treating the respondents as the sample.
Matrix alternative_variance(const RegressionFit& fit_resp, const MiEstimate& estimate);

/// (sum_i alpha_i y_i, y' Omega y) on a completed vector.
ScalarEstimate apply_linear_estimator(const LinearEstimatorSpec& spec, const Vector& completed);

/// Barnard-Rubin small-sample degrees of freedom.
double barnard_rubin_df(double within, double between, int m, double complete_df);

/// Upper-tail Student-t quantile: t such that P(T > t) = upper_tail, for
/// real df > 0.
double student_t_quantile(double upper_tail, double df);

/// Two-sided interval center +/- t_{(1-level)/2, df} sqrt(total_variance).
IntervalEstimate confidence_interval(double point, double total_variance, double df, double level);

}  // namespace mi
