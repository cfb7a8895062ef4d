#include "mi/combiner.hpp"
#include "mi/imputation.hpp"
#include "mi/moments.hpp"
#include "mi/simulation.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

mi::DesignPartition design_for(std::size_t n) {
  return mi::DesignPartition::leading(mi::harness_design(n), n * 3 / 5);
}

mi::Vector respondent_outcomes(const mi::DesignPartition& d) {
  mi::Xoshiro256 rng(7);
  std::normal_distribution<double> e;
  mi::Vector y = d.x_resp() * Eigen::Vector2d(2.0, 4.0);
  for (auto& v : y) v += e(rng);
  return y;
}

void BM_OlsFit(benchmark::State& state) {
  const auto d = design_for(std::size_t(state.range(0)));
  const mi::Vector y = respondent_outcomes(d);
  for (auto _ : state) benchmark::DoNotOptimize(mi::ols_fit(d, y));
}
BENCHMARK(BM_OlsFit)->Arg(20)->Arg(200);

void BM_MultipleImpute(benchmark::State& state) {
  const auto d = design_for(std::size_t(state.range(0)));
  const mi::Vector y = respondent_outcomes(d);
  const mi::RegressionFit fit = mi::ols_fit(d, y);
  std::uint64_t l = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mi::multiple_impute(d, y, fit, mi::Prior::bias_corrected(), 5, mi::StreamKey(l++)));
  }
}
BENCHMARK(BM_MultipleImpute)->Arg(20)->Arg(200);

void BM_RegressionMoments(benchmark::State& state) {
  const auto d = design_for(std::size_t(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mi::regression_coefficient_moments(d, 1.0, 5, mi::Prior::schenker_welsh()));
  }
}
BENCHMARK(BM_RegressionMoments)->Arg(20)->Arg(200);

void BM_StudentTQuantile(benchmark::State& state) {
  double df = 3.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mi::student_t_quantile(0.025, df));
    df = df < 60.0 ? df + 0.37 : 3.7;
  }
}
BENCHMARK(BM_StudentTQuantile);

void BM_RunCell(benchmark::State& state) {
  mi::SimulationConfig config;
  config.replicates = 1000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mi::run_cell(mi::CellSpec{std::size_t(state.range(0)), 0.6}, config, 1));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_RunCell)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
