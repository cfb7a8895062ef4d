#include "mi/regression.hpp"

#include "mi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mi {

namespace {

constexpr double kPivotTolerance = 1e-12;

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

}  // namespace

Matrix gram_inverse(const Matrix& x, const char* label) {
  const Eigen::Index p = x.cols();
  const Matrix gram = x.transpose() * x;
  const Eigen::LDLT<Matrix> ldlt(gram);
  const double scale = gram.diagonal().maxCoeff();
  const Vector pivots = ldlt.vectorD();
  int rank = 0;
  for (Eigen::Index k = 0; k < p; ++k) {
    if (pivots(k) > kPivotTolerance * scale) ++rank;
  }
  if (ldlt.info() != Eigen::Success || !(scale > 0.0) || rank < p) {
    throw RankDeficientError(std::string(label) + " matrix is rank deficient: numerical rank " +
                                 std::to_string(rank) + " < " + std::to_string(p) + " columns",
                             rank, static_cast<int>(p));
  }
  Matrix inv = ldlt.solve(Matrix::Identity(p, p));
  // Symmetrize away round-off so downstream factorizations see an exact SPD.
  return 0.5 * (inv + inv.transpose());
}

DesignPartition::DesignPartition(Matrix x_all, std::vector<std::size_t> respondents)
    : x_all_(std::move(x_all)), respondents_(std::move(respondents)) {
  const std::size_t n = static_cast<std::size_t>(x_all_.rows());
  const std::size_t p = static_cast<std::size_t>(x_all_.cols());
  if (n == 0 || p == 0) throw ValidationError("design matrix must be non-empty");

  std::sort(respondents_.begin(), respondents_.end());
  if (std::adjacent_find(respondents_.begin(), respondents_.end()) != respondents_.end()) {
    throw ValidationError("respondent indices must be distinct");
  }
  if (!respondents_.empty() && respondents_.back() >= n) {
    throw ValidationError("respondent index " + std::to_string(respondents_.back()) +
                          " out of range for n = " + std::to_string(n));
  }
  const std::size_t r = respondents_.size();
  if (r <= p + 2) {
    throw ValidationError("need r > p + 2 respondents (r = " + std::to_string(r) +
                          ", p = " + std::to_string(p) + ")");
  }

  is_resp_.assign(n, false);
  for (std::size_t i : respondents_) is_resp_[i] = true;
  missing_.reserve(n - r);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_resp_[i]) missing_.push_back(i);
  }

  x_resp_ = gather_rows(x_all_, respondents_);
  x_miss_ = gather_rows(x_all_, missing_);
  gram_all_inv_ = gram_inverse(x_all_, "full-sample Gram");
  gram_resp_inv_ = gram_inverse(x_resp_, "respondent Gram");
}

DesignPartition DesignPartition::leading(Matrix x_all, std::size_t r) {
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  return DesignPartition(std::move(x_all), std::move(idx));
}

Vector DesignPartition::gather_respondents(const Vector& y_all) const {
  if (static_cast<std::size_t>(y_all.size()) != n()) {
    throw ValidationError("outcome vector has length " + std::to_string(y_all.size()) +
                          ", expected n = " + std::to_string(n()));
  }
  Vector out(static_cast<Eigen::Index>(r()));
  for (std::size_t k = 0; k < r(); ++k) {
    out(static_cast<Eigen::Index>(k)) = y_all(static_cast<Eigen::Index>(respondents_[k]));
  }
  return out;
}

RegressionFit ols_fit(const DesignPartition& design, const Vector& y_resp) {
  if (static_cast<std::size_t>(y_resp.size()) != design.r()) {
    throw ValidationError("y_resp has length " + std::to_string(y_resp.size()) +
                          ", expected r = " + std::to_string(design.r()));
  }
  const Matrix& xr = design.x_resp();

  RegressionFit fit;
  fit.xtx_inv = design.gram_resp_inv();
  fit.beta_hat = fit.xtx_inv * (xr.transpose() * y_resp);
  fit.dof = static_cast<int>(design.r() - design.p());

  const Vector resid = y_resp - xr * fit.beta_hat;
  const double rss = resid.squaredNorm();
  const double yy = y_resp.squaredNorm();
  // Residuals at round-off level count as an exact fit.
  fit.sigma2_hat = (rss <= 1e-24 * yy) ? 0.0 : rss / fit.dof;

  const Eigen::LLT<Matrix> llt(fit.xtx_inv);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of (X_r'X_r)^{-1} failed");
  }
  fit.xtx_inv_chol = llt.matrixL();
  return fit;
}

double hat_value(const RegressionFit& fit, const Vector& x_i, const Vector& x_j) {
  const Eigen::Index p = fit.xtx_inv.rows();
  if (x_i.size() != p || x_j.size() != p) {
    throw ValidationError("hat_value: covariate vectors must have length p = " + std::to_string(p));
  }
  return x_i.dot(fit.xtx_inv * x_j);
}

Matrix partitioned_inverse_expansion(const DesignPartition& design) {
  const Matrix& gn_inv = design.gram_all_inv();
  const Matrix& gr_inv = design.gram_resp_inv();
  const Matrix& xm = design.x_miss();
  const Matrix gm = xm.transpose() * xm;
  return gn_inv + gn_inv * gm * gn_inv + gn_inv * gm * gr_inv * gm * gn_inv;
}

}  // namespace mi
