#include <benchmark/benchmark.h>

#include <filesystem>

#include "osslc/forecast.hpp"
#include "osslc/growth.hpp"
#include "osslc/ingest.hpp"

using namespace osslc;

namespace {

const MonthlySeries& pandas() {
  static const MonthlySeries s =
      read_series_csv(std::filesystem::path(OSSLC_FIXTURE_DIR) / "series" / "pandas-dev-pandas.csv");
  return s;
}

void BM_FitBass(benchmark::State& state) {
  const auto& s = pandas();
  for (auto _ : state) benchmark::DoNotOptimize(fit_bass(s));
}
BENCHMARK(BM_FitBass);

// One objective evaluation over the observed window, the calibration inner loop.
void BM_GrowthObjective(benchmark::State& state) {
  const auto& s = pandas();
  const auto bass = fit_bass(s);
  GrowthParams params;
  params.gamma = 5e5;
  params.lambda = 1.27;
  params.phi = -0.53;
  for (auto _ : state) benchmark::DoNotOptimize(growth_objective(s, bass, params));
}
BENCHMARK(BM_GrowthObjective);

void BM_IntegrateToMaturity(benchmark::State& state) {
  const auto& s = pandas();
  const auto bass = fit_bass(s);
  GrowthParams params;
  params.gamma = 5e5;
  params.lambda = 1.27;
  params.phi = -0.53;
  const double T = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fitted_path(s, bass, params, T));
}
BENCHMARK(BM_IntegrateToMaturity)->Arg(200)->Arg(600);

void BM_CalibrateGrowth(benchmark::State& state) {
  const auto& s = pandas();
  const auto bass = fit_bass(s);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_growth(s, bass));
}
BENCHMARK(BM_CalibrateGrowth)->Unit(benchmark::kMillisecond);

void BM_ProjectLifecycle(benchmark::State& state) {
  const auto& s = pandas();
  const auto bass = fit_bass(s);
  const auto growth = calibrate_growth(s, bass).params;
  for (auto _ : state) benchmark::DoNotOptimize(project_lifecycle(bass, growth, s));
}
BENCHMARK(BM_ProjectLifecycle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
