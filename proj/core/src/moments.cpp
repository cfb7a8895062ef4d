#include "mi/moments.hpp"

#include "mi/errors.hpp"

#include <limits>
#include <string>

namespace mi {

namespace {

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
}

void check_m(int m) {
  if (m < 2) throw ValidationError("m must be >= 2");
}

}  // namespace

LambdaParams lambda_params(std::size_t r, std::size_t p, const Prior& prior) {
  if (r <= p) throw ValidationError("lambda_params requires r > p");
  const double dof = static_cast<double>(r - p);
  const double denom = prior.nu0() + dof - 2.0;
  if (!(denom > 0.0)) {
    throw ValidationError("lambda_params requires nu0 + r - p - 2 > 0 (got " + std::to_string(denom) + ")");
  }
  LambdaParams out;
  out.lam = dof > 2.0 ? dof / (dof - 2.0) : std::numeric_limits<double>::infinity();
  out.lam0 = dof / denom;
  out.lam1 = prior.nu0() / denom;
  return out;
}

double posterior_mean_sigma(std::size_t r, std::size_t p, const Prior& prior, double sigma2) {
  const LambdaParams lp = lambda_params(r, p, prior);
  return lp.lam0 * sigma2 + lp.lam1 * prior.sigma0_sq();
}

double imputed_covariance(const DesignPartition& design, std::size_t i, std::size_t j,
                          std::size_t k, std::size_t s, double sigma2, const Prior& prior) {
  check_sigma2(sigma2);
  if (i >= design.n() || j >= design.n()) {
    throw ValidationError("imputed_covariance: unit index out of range");
  }
  const bool i_obs = design.is_respondent(i);
  const bool j_obs = design.is_respondent(j);
  if (i_obs && j_obs) return i == j ? sigma2 : 0.0;

  const double h = design.row(i).dot(design.gram_resp_inv() * design.row(j)) * sigma2;
  if (i_obs || j_obs) return h;
  if (k != s) return h;

  // Same imputation: E(sigma*^2) = lam_eff sigma^2 inflates the coefficient
  // draw and supplies the residual variance on the diagonal.
  const double lam_eff = lambda_params(design.r(), design.p(), prior).effective(prior, sigma2);
  const double cov = (1.0 + lam_eff) * h;
  return i == j ? cov + lam_eff * sigma2 : cov;
}

MomentReport regression_coefficient_moments(const DesignPartition& design, double sigma2, int m,
                                            const Prior& prior) {
  check_sigma2(sigma2);
  check_m(m);
  const double lam = lambda_params(design.r(), design.p(), prior).effective(prior, sigma2);
  const Matrix& gn_inv = design.gram_all_inv();
  const Matrix& gr_inv = design.gram_resp_inv();
  const Matrix diff = gr_inv - gn_inv;
  const double n = static_cast<double>(design.n());
  const double r = static_cast<double>(design.r());
  const double p = static_cast<double>(design.p());
  const double within_excess = (lam - 1.0) * (n - r) / (n - p);

  MomentReport out;
  out.sigma2 = sigma2;
  out.var_point = (gr_inv + (lam / m) * diff) * sigma2;
  out.expected_within = gn_inv * (1.0 + within_excess) * sigma2;
  out.expected_between = lam * diff * sigma2;
  out.bias_rubin = (gn_inv * within_excess + (lam - 1.0) * diff) * sigma2;
  return out;
}

VarianceComponents variance_components(const DesignPartition& design, double sigma2, int m,
                                       const Prior& prior) {
  check_sigma2(sigma2);
  check_m(m);
  const double lam = lambda_params(design.r(), design.p(), prior).effective(prior, sigma2);
  const Matrix diff = design.gram_resp_inv() - design.gram_all_inv();
  return {design.gram_all_inv() * sigma2, diff * sigma2, (lam / m) * diff * sigma2};
}

LinearEstimatorMoments linear_estimator_moments(const LinearEstimatorSpec& spec,
                                                const DesignPartition& design, double sigma2,
                                                int m, const Prior& prior) {
  check_sigma2(sigma2);
  check_m(m);
  if (static_cast<std::size_t>(spec.n()) != design.n()) {
    throw ValidationError("linear estimator spec length does not match the design");
  }
  const double lam = lambda_params(design.r(), design.p(), prior).effective(prior, sigma2);

  const auto& resp = design.respondents();
  const auto& miss = design.missing();
  const Eigen::Index nm = static_cast<Eigen::Index>(miss.size());
  const Matrix& x = design.x_all();
  const Matrix& xm = design.x_miss();

  Vector alpha_r(static_cast<Eigen::Index>(resp.size()));
  for (std::size_t a = 0; a < resp.size(); ++a) alpha_r(static_cast<Eigen::Index>(a)) = spec.alpha()(static_cast<Eigen::Index>(resp[a]));
  Vector alpha_m(nm);
  Matrix omega_mm(nm, nm);
  Matrix omega_all_m(x.rows(), nm);
  for (Eigen::Index b = 0; b < nm; ++b) {
    const auto jb = static_cast<Eigen::Index>(miss[static_cast<std::size_t>(b)]);
    alpha_m(b) = spec.alpha()(jb);
    omega_all_m.col(b) = spec.omega().col(jb);
    for (Eigen::Index a = 0; a < nm; ++a) {
      omega_mm(a, b) = spec.omega()(static_cast<Eigen::Index>(miss[static_cast<std::size_t>(a)]), jb);
    }
  }

  // h_ij = x_i' G_r^{-1} x_j for all i against the nonrespondents j.
  const Matrix h_all_m = x * design.gram_resp_inv() * xm.transpose();
  Matrix h_mm(nm, nm);
  for (Eigen::Index a = 0; a < nm; ++a) {
    h_mm.row(a) = h_all_m.row(static_cast<Eigen::Index>(miss[static_cast<std::size_t>(a)]));
  }
  Matrix h_rm(static_cast<Eigen::Index>(resp.size()), nm);
  for (std::size_t a = 0; a < resp.size(); ++a) {
    h_rm.row(static_cast<Eigen::Index>(a)) = h_all_m.row(static_cast<Eigen::Index>(resp[a]));
  }

  const double alpha_h_alpha_mm = alpha_m.dot(h_mm * alpha_m);
  const double alpha_sq_m = alpha_m.squaredNorm();

  LinearEstimatorMoments out;
  out.var_point = (alpha_r.squaredNorm() + 2.0 * alpha_r.dot(h_rm * alpha_m) + alpha_h_alpha_mm +
                   (lam / m) * (alpha_h_alpha_mm + alpha_sq_m)) *
                  sigma2;

  const Matrix weight = omega_mm + alpha_m * alpha_m.transpose();
  const Matrix kernel = h_mm + Matrix::Identity(nm, nm);
  out.u_term = (weight.cwiseProduct(kernel)).sum();  // trace(A K) for symmetric K

  const double cross = omega_all_m.cwiseProduct(h_all_m).sum();
  out.bias_rubin = (2.0 * cross + (lam - 1.0) * out.u_term) * sigma2;
  return out;
}

}  // namespace mi
