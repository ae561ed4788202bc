#include <benchmark/benchmark.h>

#include <vector>

#include "clpu/arima.hpp"
#include "clpu/etpsim.hpp"
#include "clpu/harness.hpp"
#include "clpu/order_select.hpp"
#include "clpu/stattests.hpp"

using namespace clpu;

namespace {

EnergySeries household(int days) { return synthetic_household_series(4101, days); }

void BM_ArimaFit(benchmark::State& state) {
  const auto order = static_cast<int>(state.range(0));
  const ArimaOrder o{order == 0 ? 1 : 2, order == 2 ? 1 : 0, order == 1 ? 1 : 0};
  const EnergySeries s = household(7);
  for (auto _ : state) {
    const ArimaModel m = fit(s, o);
    benchmark::DoNotOptimize(m.loglik);
  }
  state.counters["n"] = static_cast<double>(s.size());
}

void BM_LikelihoodEval(benchmark::State& state) {
  // One Kalman pass at fixed parameters; the unit of work inside both
  // optimizers and searches.
  const EnergySeries s = household(7);
  FitOptions opt;
  opt.optim.max_iterations = 0;
  opt.optim.initial_step = 1e-12;
  opt.phi0 = {0.5};
  opt.theta0 = {0.2};
  for (auto _ : state) {
    const ArimaModel m = fit(s, {1, 0, 1}, opt);
    benchmark::DoNotOptimize(m.loglik);
  }
}

void BM_ReducedSearch(benchmark::State& state) {
  const EnergySeries s = household(static_cast<int>(state.range(0)));
  SearchConfig cfg;
  for (auto _ : state) {
    const SearchResult r = reduced_grid_search(s, cfg);
    benchmark::DoNotOptimize(r.cells_evaluated.size());
  }
}

void BM_FullSearch(benchmark::State& state) {
  const EnergySeries s = household(static_cast<int>(state.range(0)));
  SearchConfig cfg;
  for (auto _ : state) {
    const SearchResult r = full_grid_search(s, cfg);
    benchmark::DoNotOptimize(r.cells_evaluated.size());
  }
}

void BM_Acf(benchmark::State& state) {
  const EnergySeries s = household(7);
  for (auto _ : state) {
    const Correlogram c = acf(s.values, 48);
    benchmark::DoNotOptimize(c.values.data());
  }
}

void BM_Pacf(benchmark::State& state) {
  const EnergySeries s = household(7);
  for (auto _ : state) {
    const Correlogram c = pacf(s.values, 48);
    benchmark::DoNotOptimize(c.values.data());
  }
}

void BM_EtpStep(benchmark::State& state) {
  const EtpHouseParams p = default_house();
  EtpHouseState s;
  s.T_A = 18.0;
  s.T_M = 19.0;
  for (auto _ : state) {
    auto [next, power] = step(p, s, -5.0, 1.0, true);
    benchmark::DoNotOptimize(power);
    s = next;
  }
}

void BM_EtpSimulateDay(benchmark::State& state) {
  const EtpHouseParams p = default_house();
  WeatherSeries w;
  w.resolution_minutes = 60;
  w.values.assign(25, -5.0);
  OutageScenario sc;
  sc.t0 = 6 * 3600;
  sc.duration_hours = 2.0;
  for (auto _ : state) {
    const SimulationResult r = simulate(p, w, 24.0, sc, 15);
    benchmark::DoNotOptimize(r.ground_truth->peak_kw);
  }
}

}  // namespace

BENCHMARK(BM_ArimaFit)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LikelihoodEval)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ReducedSearch)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FullSearch)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Acf)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Pacf)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EtpStep)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EtpSimulateDay)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
