#include "mi/combiner.hpp"

#include "mi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mi {

namespace {

Matrix residual_maker(const Matrix& x_all) {
  const Eigen::Index n = x_all.rows();
  const Matrix gn_inv = gram_inverse(x_all, "full-sample Gram");
  return Matrix::Identity(n, n) - x_all * gn_inv * x_all.transpose();
}

void require_m(std::size_t m) {
  if (m < 2) {
    throw ValidationError("combining rules need at least 2 imputations, got " + std::to_string(m));
  }
}

}  // namespace

LinearEstimatorSpec::LinearEstimatorSpec(Vector alpha, Matrix omega)
    : alpha_(std::move(alpha)), omega_(std::move(omega)) {
  const Eigen::Index n = alpha_.size();
  if (omega_.rows() != n || omega_.cols() != n) {
    throw ValidationError("omega must be n x n with n = length of alpha");
  }
  const double scale = std::max(1.0, omega_.cwiseAbs().maxCoeff());
  if ((omega_ - omega_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("omega must be symmetric");
  }
  if (n > 0) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(omega_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw ValidationError("omega must be positive semidefinite");
    }
  }
}

LinearEstimatorSpec LinearEstimatorSpec::fitted_value(const Matrix& x_all, const Vector& x0) {
  if (x0.size() != x_all.cols()) throw ValidationError("x0 must have length p");
  const Eigen::Index n = x_all.rows();
  const Eigen::Index p = x_all.cols();
  if (n <= p) throw ValidationError("fitted-value estimator needs n > p");
  const Matrix gn_inv = gram_inverse(x_all, "full-sample Gram");
  Vector alpha = x_all * (gn_inv * x0);
  const double c = x0.dot(gn_inv * x0) / static_cast<double>(n - p);
  return LinearEstimatorSpec(std::move(alpha), c * residual_maker(x_all));
}

LinearEstimatorSpec LinearEstimatorSpec::regression_coefficient(const Matrix& x_all, Eigen::Index coef) {
  const Eigen::Index p = x_all.cols();
  if (coef < 0 || coef >= p) throw ValidationError("coefficient index out of range");
  Vector e = Vector::Zero(p);
  e(coef) = 1.0;
  return fitted_value(x_all, e);
}

PointVariance imputed_regression_fit(const DesignPartition& design, const Vector& completed) {
  const Eigen::Index n = static_cast<Eigen::Index>(design.n());
  if (completed.size() != n) {
    throw ValidationError("completed vector has length " + std::to_string(completed.size()) +
                          ", expected n = " + std::to_string(n));
  }
  const Matrix& x = design.x_all();
  const Matrix& gn_inv = design.gram_all_inv();
  PointVariance out;
  out.point = gn_inv * (x.transpose() * completed);
  const double rss = (completed - x * out.point).squaredNorm();
  const double yy = completed.squaredNorm();
  const double sigma2 = (rss <= 1e-24 * yy) ? 0.0 : rss / static_cast<double>(design.n() - design.p());
  out.variance = gn_inv * sigma2;
  return out;
}

MiEstimate combine(std::span<const PointVariance> per_imputation) {
  require_m(per_imputation.size());
  const Eigen::Index q = per_imputation.front().point.size();
  const double m = static_cast<double>(per_imputation.size());

  MiEstimate est;
  est.m = static_cast<int>(per_imputation.size());
  est.point = Vector::Zero(q);
  est.within = Matrix::Zero(q, q);
  for (const auto& pv : per_imputation) {
    if (pv.point.size() != q || pv.variance.rows() != q || pv.variance.cols() != q) {
      throw ValidationError("combine: per-imputation estimates have inconsistent dimensions");
    }
    est.point += pv.point;
    est.within += pv.variance;
  }
  est.point /= m;
  est.within /= m;

  est.between = Matrix::Zero(q, q);
  for (const auto& pv : per_imputation) {
    const Vector d = pv.point - est.point;
    est.between.noalias() += d * d.transpose();
  }
  est.between /= (m - 1.0);
  est.rubin_total = est.within + (1.0 + 1.0 / m) * est.between;
  return est;
}

MiEstimate combine(std::span<const ScalarEstimate> per_imputation) {
  std::vector<PointVariance> lifted;
  lifted.reserve(per_imputation.size());
  for (const auto& s : per_imputation) {
    lifted.push_back({Vector::Constant(1, s.point), Matrix::Constant(1, 1, s.variance)});
  }
  return combine(std::span<const PointVariance>(lifted));
}

Matrix alternative_variance(const RegressionFit& fit_resp, const MiEstimate& estimate) {
  if (estimate.between.rows() != fit_resp.xtx_inv.rows() ||
      estimate.between.cols() != fit_resp.xtx_inv.cols()) {
    throw ValidationError("alternative_variance: estimate dimension does not match the respondent fit");
  }
  if (estimate.m < 1) throw ValidationError("alternative_variance: estimate has no imputations");
  return fit_resp.xtx_inv * fit_resp.sigma2_hat + estimate.between / static_cast<double>(estimate.m);
}

ScalarEstimate apply_linear_estimator(const LinearEstimatorSpec& spec, const Vector& completed) {
  if (completed.size() != spec.n()) {
    throw ValidationError("completed vector length does not match the estimator spec");
  }
  return {spec.alpha().dot(completed), completed.dot(spec.omega() * completed)};
}

double barnard_rubin_df(double within, double between, int m, double complete_df) {
  if (!(within > 0.0)) throw ValidationError("barnard_rubin_df: within-imputation variance must be > 0");
  if (!(between >= 0.0)) throw ValidationError("barnard_rubin_df: between-imputation variance must be >= 0");
  if (m < 2) throw ValidationError("barnard_rubin_df: m must be >= 2");
  if (!(complete_df > 0.0)) throw ValidationError("barnard_rubin_df: complete-data df must be > 0");

  const double inflated = (1.0 + 1.0 / m) * between;
  const double gamma = inflated / (within + inflated);
  const double nu_obs = complete_df * (complete_df + 1.0) / (complete_df + 3.0) * (1.0 - gamma);
  if (gamma == 0.0) return nu_obs;
  const double nu_m = (m - 1.0) / (gamma * gamma);
  return 1.0 / (1.0 / nu_m + 1.0 / nu_obs);
}

IntervalEstimate confidence_interval(double point, double total_variance, double df, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  if (!(total_variance >= 0.0)) throw ValidationError("total variance must be >= 0");
  if (!(df > 0.0)) throw ValidationError("degrees of freedom must be > 0");
  IntervalEstimate ci;
  ci.center = point;
  ci.df = df;
  ci.level = level;
  ci.half_width = total_variance == 0.0
                      ? 0.0
                      : student_t_quantile(0.5 * (1.0 - level), df) * std::sqrt(total_variance);
  return ci;
}

}  // namespace mi
