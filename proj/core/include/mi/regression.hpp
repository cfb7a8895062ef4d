#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace mi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric positive-definite inverse of a Gram matrix X'X, computed through
/// a pivoted LDL' factorization. Throws RankDeficientError when a pivot drops
/// below 1e-12 times the largest diagonal entry of X'X.
Matrix gram_inverse(const Matrix& x, const char* label = "design");

/// Fixed covariates for all n units together with the response pattern.
///
/// Respondents are kept as a sorted index set over the rows of `x_all`; they
/// do not need to be the leading rows. `x_resp()` and `x_miss()` are the
/// row subsets in ascending unit order. Construction validates the
/// partition, requires r > p + 2, and requires both X_n and X_r to have full
/// column rank; the two Gram inverses are cached.
class DesignPartition {
 public:
  DesignPartition(Matrix x_all, std::vector<std::size_t> respondents);

  /// Respondents are the first r rows.
  static DesignPartition leading(Matrix x_all, std::size_t r);

  std::size_t n() const noexcept { return static_cast<std::size_t>(x_all_.rows()); }
  std::size_t r() const noexcept { return respondents_.size(); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(x_all_.cols()); }
  std::size_t n_missing() const noexcept { return missing_.size(); }

  const Matrix& x_all() const noexcept { return x_all_; }
  const Matrix& x_resp() const noexcept { return x_resp_; }
  const Matrix& x_miss() const noexcept { return x_miss_; }
  const std::vector<std::size_t>& respondents() const noexcept { return respondents_; }
  const std::vector<std::size_t>& missing() const noexcept { return missing_; }
  bool is_respondent(std::size_t unit) const { return is_resp_.at(unit); }

  /// (X_n'X_n)^{-1}
  const Matrix& gram_all_inv() const noexcept { return gram_all_inv_; }
  /// (X_r'X_r)^{-1}
  const Matrix& gram_resp_inv() const noexcept { return gram_resp_inv_; }

  Eigen::VectorXd row(std::size_t unit) const { return x_all_.row(static_cast<Eigen::Index>(unit)).transpose(); }

  /// Gathers the respondent entries of a full n-vector.
  Vector gather_respondents(const Vector& y_all) const;

 private:
  Matrix x_all_;
  std::vector<std::size_t> respondents_;
  std::vector<std::size_t> missing_;
  std::vector<bool> is_resp_;
  Matrix x_resp_;
  Matrix x_miss_;
  Matrix gram_all_inv_;
  Matrix gram_resp_inv_;
};

struct RegressionFit {
  Vector beta_hat;
  double sigma2_hat = 0.0;
  /// (X_r'X_r)^{-1}
  Matrix xtx_inv;
  /// Lower Cholesky factor L with L L' = xtx_inv; used for coefficient draws.
  Matrix xtx_inv_chol;
  int dof = 0;
};

/// Least-squares fit on the respondents. sigma2_hat uses the (r - p)
/// denominator and is set to exactly zero when the residual norm is at
/// round-off level (below 1e-12 of |y|).
RegressionFit ols_fit(const DesignPartition& design, const Vector& y_resp);

/// x_i' (X_r'X_r)^{-1} x_j
double hat_value(const RegressionFit& fit, const Vector& x_i, const Vector& x_j);

/// Right-hand side of the partitioned-inverse identity
///   G_n^{-1} + G_n^{-1} X_m'X_m G_n^{-1} + G_n^{-1} X_m'X_m G_r^{-1} X_m'X_m G_n^{-1}
/// with G = X'X and X_m the nonrespondent rows. Equals (X_r'X_r)^{-1}.
Matrix partitioned_inverse_expansion(const DesignPartition& design);

}  // namespace mi
