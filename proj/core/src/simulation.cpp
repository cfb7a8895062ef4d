#include "mi/simulation.hpp"

#include "mi/combiner.hpp"
#include "mi/errors.hpp"
#include "mi/moments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iterator>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace mi {

namespace {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mean_of(std::span<const double> v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

// Sample variance with the L - 1 denominator around a given mean.
double variance_of(std::span<const double> v, double mean) {
  CompensatedSum s;
  for (double x : v) s.add((x - mean) * (x - mean));
  return s.value() / static_cast<double>(v.size() - 1);
}

struct BiasTest {
  double difference = 0.0;  // E_L(V) - Var_L(theta)
  double se = 0.0;
};

BiasTest variance_bias_test(std::span<const double> vhat, std::span<const double> theta) {
  if (vhat.size() != theta.size()) throw ValidationError("z_statistic: input lengths differ");
  if (vhat.size() < 3) throw ValidationError("z_statistic needs at least 3 replicates");
  const double mean_v = mean_of(vhat);
  const double mean_t = mean_of(theta);
  const double var_t = variance_of(theta, mean_t);
  CompensatedSum sq;
  for (std::size_t l = 0; l < vhat.size(); ++l) {
    const double dt = theta[l] - mean_t;
    const double term = vhat[l] - mean_v + var_t - dt * dt;
    sq.add(term * term);
  }
  const double denom = std::sqrt(sq.value() / static_cast<double>(vhat.size()));
  if (!(denom > 0.0)) throw NumericalError("z_statistic: zero denominator (degenerate inputs)");
  return {mean_v - var_t, denom / std::sqrt(static_cast<double>(vhat.size()))};
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& body) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  constexpr std::size_t kChunk = 64;
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + kChunk);
      for (std::size_t i = begin; i < end; ++i) body(i);
    }
  };
  std::vector<std::thread> pool;
  const unsigned extra = std::min<std::size_t>(workers, count) - 1;
  pool.reserve(extra);
  for (unsigned w = 0; w < extra; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
}

Vector estimand_direction(Estimand e) {
  Vector c(2);
  if (e == Estimand::kMean) {
    c << 1.0, harness::kXBar;
  } else {
    c << 0.0, 1.0;
  }
  return c;
}

double estimand_truth(Estimand e) {
  return e == Estimand::kMean ? harness::kIntercept + harness::kSlope * harness::kXBar : harness::kSlope;
}

struct Record {
  double theta = 0.0;
  double vhat = 0.0;
  double length = 0.0;
  double df = 0.0;
  double hit = 0.0;
  double analytic_bias = 0.0;
  double analytic_variance = 0.0;
};

}  // namespace

std::string to_string(Estimand e) { return e == Estimand::kMean ? "mean" : "slope"; }

Estimand estimand_from_string(const std::string& text) {
  if (text == "mean") return Estimand::kMean;
  if (text == "slope") return Estimand::kSlope;
  throw ValidationError("unknown estimand '" + text + "' (expected mean or slope)");
}

void SimulationConfig::validate() const {
  if (replicates < 2) throw ValidationError("replicates must be >= 2");
  if (m < 2) throw ValidationError("m must be >= 2");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  if (n_values.empty() || rates.empty() || methods.empty() || estimands.empty()) {
    throw ValidationError("n, rate, method and estimand lists must be non-empty");
  }
  for (const auto& method : methods) {
    (void)Prior::from_tag(method);
    if (std::count(methods.begin(), methods.end(), method) > 1) {
      throw ValidationError("method '" + method + "' listed twice");
    }
  }
  for (double rate : rates) {
    if (!(rate > 0.0 && rate <= 1.0)) throw ValidationError("response rates must lie in (0, 1]");
    for (std::size_t n : n_values) {
      const std::size_t r = respondent_count(n, rate);
      if (r <= harness::kParameters + 2) {
        std::ostringstream os;
        os << "cell n=" << n << ", rate=" << rate << " has r=" << r << " respondents; need r > "
           << harness::kParameters + 2;
        throw ValidationError(os.str());
      }
    }
  }
}

Matrix harness_design(std::size_t n) {
  Matrix x(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    x(static_cast<Eigen::Index>(i), 1) = 5.0 + 10.0 * static_cast<double>(i + 1) / static_cast<double>(n + 1);
  }
  return x;
}

Population generate_population(std::size_t n, Xoshiro256& rng) {
  if (n < 1) throw ValidationError("population size must be >= 1");
  Population pop;
  pop.x = harness_design(n).col(1);
  pop.y.resize(static_cast<Eigen::Index>(n));
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < pop.y.size(); ++i) {
    pop.y(i) = harness::kIntercept + harness::kSlope * pop.x(i) + normal(rng);
  }
  return pop;
}

std::size_t respondent_count(std::size_t n, double rate) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

std::vector<std::size_t> draw_response(std::size_t n, double rate, Xoshiro256& rng) {
  if (!(rate > 0.0 && rate <= 1.0)) throw ValidationError("response rate must lie in (0, 1]");
  const std::size_t r = respondent_count(n, rate);
  if (r <= harness::kParameters + 2) {
    throw ValidationError("round(rate n) = " + std::to_string(r) + " respondents; need r > p + 2");
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (r == n) return all;
  std::vector<std::size_t> chosen;
  chosen.reserve(r);
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), r, rng);
  return chosen;
}

double pre_percent(double var_sw, double var_new) {
  if (!(var_sw > 0.0)) throw ValidationError("pre_percent: reference variance must be > 0");
  return var_new / var_sw * 100.0;
}

double z_statistic(std::span<const double> vhat, std::span<const double> theta) {
  const BiasTest t = variance_bias_test(vhat, theta);
  return t.difference / t.se;
}

StreamKey cell_streams(std::uint64_t seed, const CellSpec& cell) {
  return StreamKey(seed).path({static_cast<std::uint64_t>(cell.n), static_cast<std::uint64_t>(cell.r())});
}

std::uint64_t method_stream_tag(const std::string& method) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : method) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const EstimandSummary& CellResult::at(const std::string& method, Estimand estimand) const {
  for (const auto& s : summaries) {
    if (s.method == method && s.estimand == estimand) return s;
  }
  throw ValidationError("no summary for method '" + method + "', estimand " + to_string(estimand));
}

std::optional<double> CellResult::pre(Estimand estimand) const {
  const EstimandSummary* sw = nullptr;
  const EstimandSummary* nw = nullptr;
  for (const auto& s : summaries) {
    if (s.estimand != estimand) continue;
    if (s.method == "sw") sw = &s;
    if (s.method == "new") nw = &s;
  }
  if (sw == nullptr || nw == nullptr) return std::nullopt;
  return pre_percent(sw->mc_variance, nw->mc_variance);
}

CellResult run_cell(const CellSpec& cell, const SimulationConfig& config, unsigned workers) {
  config.validate();
  const std::size_t n = cell.n;
  const std::size_t r = cell.r();
  if (r <= harness::kParameters + 2 || r > n) {
    throw ValidationError("cell n=" + std::to_string(n) + " has invalid respondent count " + std::to_string(r));
  }
  const std::size_t L = config.replicates;
  const int m = config.m;

  std::vector<Prior> priors;
  std::vector<std::uint64_t> method_tags;
  for (const auto& method : config.methods) {
    priors.push_back(Prior::from_tag(method));
    method_tags.push_back(method_stream_tag(method));
  }
  std::vector<Vector> directions;
  for (Estimand e : config.estimands) directions.push_back(estimand_direction(e));

  const std::size_t n_methods = priors.size();
  const std::size_t n_est = directions.size();
  const std::size_t slots = n_methods * n_est;
  const Matrix x = harness_design(n);
  const StreamKey root = cell_streams(config.seed, cell);
  const double complete_df = static_cast<double>(n - harness::kParameters);

  std::vector<Record> records(L * slots);
  std::mutex error_mutex;
  std::size_t failed_replicate = L;
  std::string failure;

  parallel_for(L, workers, [&](std::size_t l) {
    const StreamKey rep = root.child(static_cast<std::uint64_t>(l));
    std::size_t active_method = n_methods;
    try {
      Xoshiro256 pop_rng = rep.child(Stage::kPopulation).engine();
      const Vector y = generate_population(n, pop_rng).y;
      Xoshiro256 resp_rng = rep.child(Stage::kResponse).engine();
      const DesignPartition design(x, draw_response(n, cell.rate, resp_rng));
      const Vector y_resp = design.gather_respondents(y);
      const RegressionFit fit = ols_fit(design, y_resp);

      std::vector<PointVariance> per_imputation;
      per_imputation.reserve(static_cast<std::size_t>(m));
      for (std::size_t a = 0; a < n_methods; ++a) {
        active_method = a;
        const StreamKey imp = rep.child(Stage::kImputation).child(method_tags[a]);
        const MultipleImputation mult = multiple_impute(design, y_resp, fit, priors[a], m, imp);
        per_imputation.clear();
        for (const Vector& completed : mult.completed) {
          per_imputation.push_back(imputed_regression_fit(design, completed));
        }
        const MiEstimate est = combine(std::span<const PointVariance>(per_imputation));
        const MomentReport exact = regression_coefficient_moments(design, harness::kSigma2, m, priors[a]);

        for (std::size_t b = 0; b < n_est; ++b) {
          const Vector& c = directions[b];
          const double within = c.dot(est.within * c);
          const double between = c.dot(est.between * c);
          Record& rec = records[l * slots + a * n_est + b];
          rec.theta = c.dot(est.point);
          rec.vhat = c.dot(est.rubin_total * c);
          rec.df = barnard_rubin_df(within, between, m, complete_df);
          const IntervalEstimate ci = confidence_interval(rec.theta, rec.vhat, rec.df, config.level);
          rec.length = 2.0 * ci.half_width;
          rec.hit = ci.contains(estimand_truth(config.estimands[b])) ? 1.0 : 0.0;
          rec.analytic_bias = c.dot(exact.bias_rubin * c);
          rec.analytic_variance = c.dot(exact.var_point * c);
        }
      }
    } catch (const std::exception& ex) {
      std::ostringstream os;
      os << "replicate " << l << " failed in cell n=" << n << ", r=" << r << " (seed " << config.seed
         << ", stream path seed/" << n << '/' << r << '/' << l;
      if (active_method < n_methods) {
        os << ", method " << config.methods[active_method];
      }
      os << ", replicate stream digest 0x" << std::hex << rep.digest() << std::dec << "): " << ex.what();
      const std::lock_guard lock(error_mutex);
      if (l < failed_replicate) {
        failed_replicate = l;
        failure = os.str();
      }
    }
  });
  if (failed_replicate < L) throw ReplicateError(failure, failed_replicate);

  CellResult result;
  result.cell = cell;
  result.m = m;
  result.replicates = L;
  const double dl = static_cast<double>(L);
  std::vector<double> theta(L);
  std::vector<double> vhat(L);
  for (std::size_t a = 0; a < n_methods; ++a) {
    for (std::size_t b = 0; b < n_est; ++b) {
      const std::size_t slot = a * n_est + b;
      CompensatedSum length_sum;
      CompensatedSum hit_sum;
      CompensatedSum df_sum;
      CompensatedSum abias_sum;
      CompensatedSum avar_sum;
      for (std::size_t l = 0; l < L; ++l) {
        const Record& rec = records[l * slots + slot];
        theta[l] = rec.theta;
        vhat[l] = rec.vhat;
        length_sum.add(rec.length);
        hit_sum.add(rec.hit);
        df_sum.add(rec.df);
        abias_sum.add(rec.analytic_bias);
        avar_sum.add(rec.analytic_variance);
      }

      EstimandSummary s;
      s.method = config.methods[a];
      s.estimand = config.estimands[b];
      s.truth = estimand_truth(s.estimand);
      s.mc_mean = mean_of(theta);
      s.mc_variance = variance_of(theta, s.mc_mean);
      s.mc_mean_se = std::sqrt(s.mc_variance / dl);
      CompensatedSum m4;
      for (double t : theta) m4.add(std::pow(t - s.mc_mean, 4));
      s.mc_variance_se = std::sqrt(std::max(0.0, m4.value() / dl - s.mc_variance * s.mc_variance) / dl);

      s.mean_vhat = mean_of(vhat);
      const BiasTest test = variance_bias_test(vhat, theta);
      s.empirical_bias = test.difference;
      s.empirical_bias_se = test.se;
      s.relative_bias = test.difference / s.mc_variance;
      s.relative_bias_se = test.se / s.mc_variance;
      s.z_statistic = test.difference / test.se;

      s.mean_ci_length = length_sum.value() / dl;
      CompensatedSum length_sq;
      for (std::size_t l = 0; l < L; ++l) {
        const double d = records[l * slots + slot].length - s.mean_ci_length;
        length_sq.add(d * d);
      }
      s.ci_length_se = std::sqrt(length_sq.value() / (dl - 1.0) / dl);
      std::vector<double> lengths(L);
      for (std::size_t l = 0; l < L; ++l) lengths[l] = records[l * slots + slot].length;
      const auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(L / 2);
      std::nth_element(lengths.begin(), mid, lengths.end());
      s.median_ci_length = *mid;
      if (L % 2 == 0) s.median_ci_length = 0.5 * (s.median_ci_length + *std::max_element(lengths.begin(), mid));
      const double coverage = hit_sum.value() / dl;
      s.coverage_percent = 100.0 * coverage;
      s.coverage_se = 100.0 * std::sqrt(coverage * (1.0 - coverage) / dl);
      s.mean_df = df_sum.value() / dl;
      s.analytic_bias = abias_sum.value() / dl;
      s.analytic_variance = avar_sum.value() / dl;
      result.summaries.push_back(std::move(s));
    }
  }
  return result;
}

std::vector<CellResult> run_factorial(const SimulationConfig& config, unsigned workers) {
  config.validate();
  std::vector<CellResult> out;
  for (std::size_t n : config.n_values) {
    for (double rate : config.rates) {
      out.push_back(run_cell(CellSpec{n, rate}, config, workers));
    }
  }
  return out;
}

}  // namespace mi
