#pragma once

#include "mi/combiner.hpp"
#include "mi/imputation.hpp"
#include "mi/regression.hpp"

#include <cstddef>

namespace mi {

/// Finite-sample inflation factors of the sigma^2 posterior draw.
struct LambdaParams {
  /// (r - p) / (r - p - 2): the Schenker-Welsh factor. +inf when r - p <= 2.
  double lam = 0.0;
  /// (r - p) / (nu0 + r - p - 2)
  double lam0 = 0.0;
  /// nu0 / (nu0 + r - p - 2)
  double lam1 = 0.0;

  /// E(sigma*^2) / sigma^2 = lam0 + lam1 sigma0^2 / sigma^2.
  double effective(const Prior& prior, double sigma2) const noexcept {
    return lam0 + lam1 * prior.sigma0_sq() / sigma2;
  }
};

/// Throws ValidationError unless nu0 + r - p - 2 > 0 and r > p.
LambdaParams lambda_params(std::size_t r, std::size_t p, const Prior& prior);

/// Unconditional E(sigma*^2) = (nu0 sigma0^2 + (r - p) sigma^2) / (nu0 + r - p - 2).
double posterior_mean_sigma(std::size_t r, std::size_t p, const Prior& prior, double sigma2);

/// Covariance of completed-data entries over the joint distribution of the
/// model and the imputation mechanism, respondents held fixed. Units are row
/// indices of the design; k and s are imputation indices (any base). Pairs of
/// respondents return the model covariance delta_ij sigma^2.
double imputed_covariance(const DesignPartition& design, std::size_t i, std::size_t j,
                          std::size_t k, std::size_t s, double sigma2, const Prior& prior);

/// Closed-form moments of the multiply-imputed regression coefficient.
struct MomentReport {
  /// Var(beta_hat_{M,n})
  Matrix var_point;
  /// E(W_{M,n})
  Matrix expected_within;
  /// E(B_{M,n})
  Matrix expected_between;
  /// E(V_hat_{M,n}) - Var(beta_hat_{M,n})
  Matrix bias_rubin;
  double sigma2 = 1.0;
};

MomentReport regression_coefficient_moments(const DesignPartition& design, double sigma2, int m,
                                            const Prior& prior);

/// Var(beta_hat_n) + Var(beta_hat_r - beta_hat_n) + Var(beta_hat_{M,n} - beta_hat_r).
struct VarianceComponents {
  Matrix sampling;
  Matrix missingness;
  Matrix imputation;

  Matrix total() const { return sampling + missingness + imputation; }
};

VarianceComponents variance_components(const DesignPartition& design, double sigma2, int m,
                                       const Prior& prior);

struct LinearEstimatorMoments {
  double var_point = 0.0;
  double bias_rubin = 0.0;
  /// trace{(Omega_mm + alpha_m alpha_m')[X_m G_r^{-1} X_m' + I]} >= 0
  double u_term = 0.0;
};

/// Moments of (theta_hat_{M,n}, V_hat_{M,n}) for a congenial linear
/// estimator whose complete-data variance estimator is unbiased. Neither
/// assumption is checked here.
LinearEstimatorMoments linear_estimator_moments(const LinearEstimatorSpec& spec,
                                                const DesignPartition& design, double sigma2,
                                                int m, const Prior& prior);

}  // namespace mi
