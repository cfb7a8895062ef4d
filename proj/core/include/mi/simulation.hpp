#pragma once

#include "mi/imputation.hpp"
#include "mi/regression.hpp"
#include "mi/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mi {

/// Population model of the factorial experiment:
///   x_i = 5 + 10 i / (n + 1),  y_i = 2 + 4 x_i + e_i,  e_i ~ N(0, 1).
namespace harness {
inline constexpr double kIntercept = 2.0;
inline constexpr double kSlope = 4.0;
inline constexpr double kSigma2 = 1.0;
inline constexpr std::size_t kParameters = 2;
/// Design mean of x; the "mean" estimand is the fitted value at (1, kXBar).
inline constexpr double kXBar = 10.0;
}  // namespace harness

enum class Estimand { kMean, kSlope };

std::string to_string(Estimand e);
Estimand estimand_from_string(const std::string& text);

struct SimulationConfig {
  std::vector<std::size_t> n_values{20, 200};
  std::vector<double> rates{0.8, 0.6, 0.4};
  std::vector<std::string> methods{"sw", "new"};
  int m = 5;
  std::size_t replicates = 50000;
  std::uint64_t seed = 20040401;
  std::vector<Estimand> estimands{Estimand::kMean, Estimand::kSlope};
  double level = 0.95;

  /// Throws ValidationError on replicates < 2, m < 2, unknown methods,
  /// rates outside (0, 1], or any cell with round(rate n) <= p + 2.
  void validate() const;
};

struct Population {
  Vector x;
  Vector y;
};

/// Covariate column only; y drawn from `rng`.
Population generate_population(std::size_t n, Xoshiro256& rng);

/// [1, x] for the deterministic covariates.
Matrix harness_design(std::size_t n);

/// round(rate n).
std::size_t respondent_count(std::size_t n, double rate);

/// Uniform size-round(rate n) subset of {0..n-1}, ascending.
std::vector<std::size_t> draw_response(std::size_t n, double rate, Xoshiro256& rng);

double pre_percent(double var_sw, double var_new);

/// sqrt(L) [E_L(V) - Var_L(theta)] / sqrt(E_L{[V - E_L(V) + Var_L(theta) - (theta - E_L(theta))^2]^2})
/// with Var_L using the L - 1 denominator.
double z_statistic(std::span<const double> vhat, std::span<const double> theta);

struct CellSpec {
  std::size_t n = 20;
  double rate = 0.8;

  std::size_t r() const { return respondent_count(n, rate); }
};

/// Monte Carlo summary of one (method, estimand) pair in one cell.
struct EstimandSummary {
  std::string method;
  Estimand estimand = Estimand::kMean;
  double truth = 0.0;

  double mc_mean = 0.0;
  double mc_mean_se = 0.0;
  double mc_variance = 0.0;
  double mc_variance_se = 0.0;
  double mean_vhat = 0.0;
  double relative_bias = 0.0;
  double relative_bias_se = 0.0;
  double z_statistic = 0.0;
  double mean_ci_length = 0.0;
  double ci_length_se = 0.0;
  /// Interval lengths are heavy-tailed when the df approach 0.
  double median_ci_length = 0.0;
  double coverage_percent = 0.0;
  double coverage_se = 0.0;
  double mean_df = 0.0;

  /// E_L(V) - Var_L(theta) and its Monte Carlo standard error.
  double empirical_bias = 0.0;
  double empirical_bias_se = 0.0;
  /// Closed-form bias and variance at sigma^2 = 1, averaged over the drawn
  /// response patterns.
  double analytic_bias = 0.0;
  double analytic_variance = 0.0;
};

struct CellResult {
  CellSpec cell;
  int m = 0;
  std::size_t replicates = 0;
  std::vector<EstimandSummary> summaries;

  const EstimandSummary& at(const std::string& method, Estimand estimand) const;
  /// 100 Var_L(new) / Var_L(sw) when both methods were run.
  std::optional<double> pre(Estimand estimand) const;
};

/// Runs every replicate of one cell for all configured methods. Methods share
/// population and response draws; imputation substreams differ per method.
/// Output is bit-identical for any `workers` >= 1. A failing replicate
/// aborts the cell with ReplicateError.
CellResult run_cell(const CellSpec& cell, const SimulationConfig& config, unsigned workers = 1);

std::vector<CellResult> run_factorial(const SimulationConfig& config, unsigned workers = 1);

/// Root of the substream tree for one cell.
StreamKey cell_streams(std::uint64_t seed, const CellSpec& cell);

/// Stable 64-bit tag for a method name (FNV-1a).
std::uint64_t method_stream_tag(const std::string& method);

}  // namespace mi
