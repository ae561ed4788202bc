#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clpu/arima.hpp"
#include "clpu/clpu.hpp"
#include "clpu/etpsim.hpp"
#include "clpu/order_select.hpp"
#include "clpu/series.hpp"

namespace clpu {

enum class Method { arima_reduced, arima_full, hwes, random_walk, arimax };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class RefreshPolicy { weekly_or_divergence, fixed_order };

struct BacktestConfig {
  int step_minutes = 60;
  int horizon_steps = 48;
  RefreshPolicy refresh_policy = RefreshPolicy::weekly_or_divergence;
  double train_window_days = 7.0;
  int refresh_days = 7;
  std::vector<Method> methods{Method::arima_reduced, Method::hwes, Method::random_walk};
  SearchConfig search;
  // Order pinned for the fixed_order policy; when absent it is selected once
  // at the first step and then frozen.
  std::optional<ArimaOrder> fixed_order;
  int jobs = 1;
};

struct PercentileStats {
  double min = 0.0;
  double p10 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p90 = 0.0;
  double max = 0.0;
  double std_dev = 0.0;
  double mean = 0.0;
};

// Linear interpolation between closest ranks; p in [0, 1].
double percentile(std::vector<double> values, double p);
PercentileStats percentile_stats(const std::vector<double>& values);

// One (series, method) rolling run. forecasts/actuals are the
// cumulative-energy values over the headline horizon at each step time.
struct MethodRun {
  std::vector<Timestamp> step_times;
  std::vector<double> forecasts;
  std::vector<double> actuals;
  std::vector<double> sq_errors;
  std::vector<double> cumulative_sse;
  double mse = 0.0;
  double wall_millis = 0.0;
  int order_refreshes = 0;
  int divergences = 0;
  ArimaOrder final_order{};
};

struct BacktestReport {
  std::map<Method, MethodRun> per_method;
};

// Rolling-origin backtest: hourly steps, coefficient refits on the trailing
// train window at every step, order re-selection per the refresh policy.
// temps (aligned with series) are required only by the arimax method.
BacktestReport rolling_backtest(const EnergySeries& series, const BacktestConfig& cfg,
                                const std::vector<double>* temps = nullptr);

struct CompareReport {
  std::vector<std::string> series_ids;
  std::map<Method, std::vector<MethodRun>> runs;  // index-aligned with series_ids
  std::map<Method, PercentileStats> mse_stats;    // over per-series MSEs
  std::map<Method, double> wall_millis;
};

CompareReport compare_methods(const std::vector<EnergySeries>& suite, const BacktestConfig& cfg);

void write_table2_csv(const CompareReport& report, const std::string& path);
// MSE-increase percentiles of reduced vs full search (requires both runs).
void write_table1_csv(const CompareReport& report, const std::string& path);
// Per-series MSEs sorted by decreasing reduced-search MSE.
void write_per_series_csv(const CompareReport& report, const std::string& path,
                          bool zero_timing = false);
// Average cumulative squared-error curves per method.
void write_cumulative_csv(const CompareReport& report, const std::string& path);

struct EtpValidationCell {
  int house = 0;
  int outage_hours = 0;
  double forecast_duration_hours = 0.0;
  double true_duration_hours = 0.0;
  double forecast_peak_kw = 0.0;
  double true_peak_kw = 0.0;
  Band duration_band50{};
  bool covered50 = false;
};

struct EtpValidationReport {
  std::vector<EtpValidationCell> cells;
  double coverage50 = 0.0;
};

// For each suite house: simulate the clean window, train energy + peak
// models, then score forecasts against simulated ground truth per outage
// length.
EtpValidationReport etp_validation(const std::vector<HouseScenario>& suite,
                                   const EtpSuiteConfig& suite_cfg,
                                   const SearchConfig& search_cfg, const ClpuConfig& clpu_cfg,
                                   int jobs = 1);
void write_etp_validation_csv(const EtpValidationReport& report, const std::string& path);

// Synthetic generators, deterministic given seed.
std::vector<double> simulate_arma(std::size_t n, const std::vector<double>& phi,
                                  const std::vector<double>& theta, double sigma,
                                  std::uint64_t seed, double mean = 0.0,
                                  std::size_t burnin = 200);
EnergySeries synthetic_household_series(std::uint64_t seed, int days,
                                        int resolution_minutes = 15);
std::vector<EnergySeries> synthetic_suite(std::uint64_t seed, int n_series, int days);
// Drifting unit-root ramp first half, stationary AR(1) second half; a model
// frozen at the first-half order stays at d=1 and pays last-value anchoring
// on stationary data, so order re-selection measurably helps.
EnergySeries regime_switch_series(std::uint64_t seed, int days);

}  // namespace clpu
