#pragma once

#include "mi/regression.hpp"
#include "mi/rng.hpp"

#include <string>
#include <vector>

namespace mi {

/// Scaled inverse chi-square prior on sigma^2 with `nu0` degrees of freedom
/// and scale `sigma0_sq`. The coefficient prior is flat.
class Prior {
 public:
  Prior(double nu0, double sigma0_sq);

  /// nu0 = 0, sigma0_sq = 0: the Schenker-Welsh constant prior on log sigma.
  static Prior schenker_welsh() { return Prior(0.0, 0.0); }
  /// nu0 = 2, sigma0_sq = 0: makes Rubin's variance estimator unbiased.
  static Prior bias_corrected() { return Prior(2.0, 0.0); }

  /// Parses "sw", "new", or "custom:<nu0>:<sigma0_sq>".
  static Prior from_tag(const std::string& tag);
  /// Inverse of from_tag for the named priors; custom priors use full precision.
  std::string tag() const;

  double nu0() const noexcept { return nu0_; }
  double sigma0_sq() const noexcept { return sigma0_sq_; }

  friend bool operator==(const Prior&, const Prior&) = default;

 private:
  double nu0_;
  double sigma0_sq_;
};

struct ImputationDraw {
  double sigma_star_sq = 0.0;
  Vector beta_star;
  /// Imputed outcomes for the nonrespondents, in DesignPartition::missing() order.
  Vector imputed_values;
};

struct MultipleImputation {
  int m = 0;
  std::vector<ImputationDraw> draws;
  /// Completed n-vectors in original unit order.
  std::vector<Vector> completed;
};

/// Posterior draw [nu0 sigma0^2 + (r-p) sigma_hat^2] / chi^2_{nu0 + r - p}.
/// The chi-square is sampled as Gamma(shape nu/2, scale 2), so fractional
/// degrees of freedom are fine.
double draw_sigma_star(const RegressionFit& fit, const Prior& prior, Xoshiro256& rng);

/// beta_hat + sqrt(sigma_star_sq) * L z, with L L' = (X_r'X_r)^{-1}.
Vector draw_beta_star(const RegressionFit& fit, double sigma_star_sq, Xoshiro256& rng);

/// x_j' beta_star + N(0, sigma_star_sq) for each nonrespondent j.
Vector impute_missing(const DesignPartition& design, const Vector& beta_star,
                      double sigma_star_sq, Xoshiro256& rng);

/// One full draw (sigma*, beta*, residuals) from a single stream.
ImputationDraw draw_imputation(const DesignPartition& design, const RegressionFit& fit,
                               const Prior& prior, Xoshiro256& rng);

/// Runs m independent imputations. Imputation k (0-based) consumes only the
/// substream `streams.child(k)`, so the result is a pure function of
/// (design, y_resp, prior, m, streams).
MultipleImputation multiple_impute(const DesignPartition& design, const Vector& y_resp,
                                   const Prior& prior, int m, const StreamKey& streams);

/// Same as above with a precomputed respondent fit.
MultipleImputation multiple_impute(const DesignPartition& design, const Vector& y_resp,
                                   const RegressionFit& fit, const Prior& prior, int m,
                                   const StreamKey& streams);

}  // namespace mi
