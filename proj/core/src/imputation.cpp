#include "mi/imputation.hpp"

#include "mi/errors.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace mi {

namespace {

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ValidationError("cannot parse " + what + " from '" + text + "'");
  }
  return value;
}

}  // namespace

Prior::Prior(double nu0, double sigma0_sq) : nu0_(nu0), sigma0_sq_(sigma0_sq) {
  if (!(nu0 >= 0.0) || !std::isfinite(nu0)) {
    throw ValidationError("prior degrees of freedom nu0 must be finite and >= 0");
  }
  if (!(sigma0_sq >= 0.0) || !std::isfinite(sigma0_sq)) {
    throw ValidationError("prior scale sigma0_sq must be finite and >= 0");
  }
}

Prior Prior::from_tag(const std::string& tag) {
  if (tag == "sw") return schenker_welsh();
  if (tag == "new") return bias_corrected();
  const std::string prefix = "custom:";
  if (tag.rfind(prefix, 0) == 0) {
    const std::string rest = tag.substr(prefix.size());
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("custom prior tag must be custom:<nu0>:<sigma0_sq>, got '" + tag + "'");
    }
    return Prior(parse_double(rest.substr(0, colon), "nu0"),
                 parse_double(rest.substr(colon + 1), "sigma0_sq"));
  }
  throw ValidationError("unknown imputation method '" + tag + "' (expected sw, new or custom:<nu0>:<sigma0_sq>)");
}

std::string Prior::tag() const {
  if (*this == schenker_welsh()) return "sw";
  if (*this == bias_corrected()) return "new";
  std::ostringstream os;
  os.precision(17);
  os << "custom:" << nu0_ << ':' << sigma0_sq_;
  return os.str();
}

double draw_sigma_star(const RegressionFit& fit, const Prior& prior, Xoshiro256& rng) {
  if (fit.dof < 1) throw ValidationError("draw_sigma_star requires r - p >= 1");
  const double numerator = prior.nu0() * prior.sigma0_sq() + fit.dof * fit.sigma2_hat;
  if (!(numerator > 0.0)) {
    throw DegeneratePosteriorError(
        "degenerate sigma^2 posterior: respondent residuals are all zero and the prior scale is zero");
  }
  const double nu = prior.nu0() + fit.dof;
  std::gamma_distribution<double> chi2(0.5 * nu, 2.0);
  return numerator / chi2(rng);
}

Vector draw_beta_star(const RegressionFit& fit, double sigma_star_sq, Xoshiro256& rng) {
  if (!(sigma_star_sq >= 0.0)) throw ValidationError("sigma_star_sq must be >= 0");
  if (sigma_star_sq == 0.0) return fit.beta_hat;
  std::normal_distribution<double> normal;
  Vector z(fit.beta_hat.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
  return fit.beta_hat + std::sqrt(sigma_star_sq) * (fit.xtx_inv_chol * z);
}

Vector impute_missing(const DesignPartition& design, const Vector& beta_star,
                      double sigma_star_sq, Xoshiro256& rng) {
  if (static_cast<std::size_t>(beta_star.size()) != design.p()) {
    throw ValidationError("beta_star must have length p");
  }
  if (!(sigma_star_sq >= 0.0)) throw ValidationError("sigma_star_sq must be >= 0");
  Vector out = design.x_miss() * beta_star;
  if (sigma_star_sq == 0.0) return out;
  const double sd = std::sqrt(sigma_star_sq);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < out.size(); ++j) out(j) += sd * normal(rng);
  return out;
}

ImputationDraw draw_imputation(const DesignPartition& design, const RegressionFit& fit,
                               const Prior& prior, Xoshiro256& rng) {
  ImputationDraw draw;
  draw.sigma_star_sq = draw_sigma_star(fit, prior, rng);
  draw.beta_star = draw_beta_star(fit, draw.sigma_star_sq, rng);
  draw.imputed_values = impute_missing(design, draw.beta_star, draw.sigma_star_sq, rng);
  return draw;
}

MultipleImputation multiple_impute(const DesignPartition& design, const Vector& y_resp,
                                   const Prior& prior, int m, const StreamKey& streams) {
  return multiple_impute(design, y_resp, ols_fit(design, y_resp), prior, m, streams);
}

MultipleImputation multiple_impute(const DesignPartition& design, const Vector& y_resp,
                                   const RegressionFit& fit, const Prior& prior, int m,
                                   const StreamKey& streams) {
  if (m < 2) throw ValidationError("multiple imputation needs m >= 2");
  if (static_cast<std::size_t>(y_resp.size()) != design.r()) {
    throw ValidationError("y_resp must have length r");
  }

  Vector observed = Vector::Zero(static_cast<Eigen::Index>(design.n()));
  for (std::size_t k = 0; k < design.r(); ++k) {
    observed(static_cast<Eigen::Index>(design.respondents()[k])) = y_resp(static_cast<Eigen::Index>(k));
  }

  MultipleImputation result;
  result.m = m;
  result.draws.reserve(static_cast<std::size_t>(m));
  result.completed.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    Xoshiro256 rng = streams.child(static_cast<std::uint64_t>(k)).engine();
    ImputationDraw draw = draw_imputation(design, fit, prior, rng);
    Vector completed = observed;
    for (std::size_t j = 0; j < design.n_missing(); ++j) {
      completed(static_cast<Eigen::Index>(design.missing()[j])) = draw.imputed_values(static_cast<Eigen::Index>(j));
    }
    result.draws.push_back(std::move(draw));
    result.completed.push_back(std::move(completed));
  }
  return result;
}

}  // namespace mi
