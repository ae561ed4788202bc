#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "clpu/arima.hpp"
#include "clpu/clpu.hpp"
#include "clpu/config.hpp"
#include "clpu/errors.hpp"
#include "clpu/etpsim.hpp"
#include "clpu/harness.hpp"
#include "clpu/order_select.hpp"
#include "clpu/series.hpp"
#include "clpu/stattests.hpp"
#include "clpu/time.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

clpu::Config resolve_config(const CommonOpts& opts) {
  clpu::Config cfg =
      opts.config_path.empty() ? clpu::default_config() : clpu::load_config(opts.config_path);
  clpu::apply_env_overrides(cfg);
  if (!opts.output_dir.empty()) cfg.output_directory = opts.output_dir;
  if (opts.jobs > 0) {
    cfg.search.jobs = opts.jobs;
    cfg.backtest.jobs = opts.jobs;
    cfg.backtest.search.jobs = opts.jobs;
  }
  return cfg;
}

std::string ensure_output_dir(const clpu::Config& cfg) {
  fs::create_directories(cfg.output_directory);
  return cfg.output_directory;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_adf_csv(const clpu::AdfResult& r, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw clpu::DataError("cannot open for writing: " + path);
  std::fprintf(f, "statistic,lag_order,crit_1pct,crit_5pct,crit_10pct,stationary_at_5pct\n");
  std::fprintf(f, "%.12g,%d,%.12g,%.12g,%.12g,%d\n", r.statistic, r.lag_order, r.crit_1pct,
               r.crit_5pct, r.crit_10pct, r.stationary_at_5pct ? 1 : 0);
  std::fclose(f);
}

clpu::ArimaOrder parse_order_string(const std::string& text) {
  int p = 0;
  int d = 0;
  int q = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d", &p, &d, &q) != 3)
    throw clpu::DataError("order must be given as p,d,q");
  return clpu::ArimaOrder{p, d, q};
}

clpu::ArimaOrder load_order_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw clpu::DataError("cannot open order file: " + path);
  json j;
  try {
    in >> j;
    return clpu::ArimaOrder{j.at("p").get<int>(), j.at("d").get<int>(), j.at("q").get<int>()};
  } catch (const json::exception& e) {
    throw clpu::DataError(std::string("malformed order file: ") + e.what());
  }
}

// History must end exactly at t0; later measurements are dropped, earlier
// coverage gaps are an error.
clpu::EnergySeries clip_history(const clpu::EnergySeries& series, clpu::Timestamp t0) {
  if (t0 == series.end_time()) return series;
  if (t0 < series.start_time || t0 > series.end_time())
    throw clpu::DataError("t0 outside the input series span");
  const auto offset = t0 - series.start_time;
  if (offset % series.resolution_seconds() != 0)
    throw clpu::DataError("t0 does not align with the meter interval grid");
  const auto count = static_cast<std::size_t>(offset / series.resolution_seconds());
  if (count == 0) throw clpu::DataError("no history before t0");
  return series.slice(0, count);
}

std::vector<clpu::Method> parse_methods_flag(const std::string& raw) {
  std::vector<clpu::Method> methods;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) methods.push_back(clpu::method_from_name(item));
  }
  if (methods.empty()) throw clpu::ConfigError("no methods listed");
  return methods;
}

int cmd_analyze(const CommonOpts& common, const std::string& input, int max_lag) {
  const clpu::Config cfg = resolve_config(common);
  const clpu::EnergySeries series = clpu::ingest_csv(input, cfg.csv);
  const std::string dir = ensure_output_dir(cfg);
  const int cap = static_cast<int>(series.size() / 2) - 1;
  const int lag = std::max(1, std::min(max_lag, cap));
  clpu::write_correlogram_csv(clpu::acf(series.values, lag, cfg.search.ci_level),
                              join_path(dir, "acf.csv"));
  clpu::write_correlogram_csv(clpu::pacf(series.values, lag, cfg.search.ci_level),
                              join_path(dir, "pacf.csv"));
  write_adf_csv(clpu::adf_test(series.values), join_path(dir, "adf.csv"));
  std::printf("wrote %s, %s, %s\n", join_path(dir, "acf.csv").c_str(),
              join_path(dir, "pacf.csv").c_str(), join_path(dir, "adf.csv").c_str());
  return 0;
}

int cmd_select_order(const CommonOpts& common, const std::string& input,
                     const std::string& method) {
  const clpu::Config cfg = resolve_config(common);
  const clpu::EnergySeries series = clpu::ingest_csv(input, cfg.csv);
  const std::string dir = ensure_output_dir(cfg);
  clpu::SearchResult result;
  if (method == "full")
    result = clpu::full_grid_search(series, cfg.search);
  else if (method == "reduced")
    result = clpu::reduced_grid_search(series, cfg.search);
  else
    throw clpu::ConfigError("unknown search method: " + method);

  json j;
  j["p"] = result.chosen.p;
  j["d"] = result.chosen.d;
  j["q"] = result.chosen.q;
  j["method"] = method;
  j["d_adequate"] = result.d_adequate;
  j["p_max"] = result.p_max;
  j["q_max"] = result.q_max;
  j["cells_evaluated"] = result.cells_evaluated.size();
  std::ofstream out(join_path(dir, "order.json"), std::ios::binary);
  out << j.dump(2) << "\n";
  out.close();
  clpu::write_cells_csv(result, join_path(dir, "cells.csv"), common.seed.has_value());
  std::printf("chosen order (%d,%d,%d), %zu cells evaluated\n", result.chosen.p, result.chosen.d,
              result.chosen.q, result.cells_evaluated.size());
  return 0;
}

int cmd_fit(const CommonOpts& common, const std::string& input, const std::string& order_text,
            const std::string& order_file, std::string model_out, std::string peak_out) {
  const clpu::Config cfg = resolve_config(common);
  const clpu::EnergySeries series = clpu::ingest_csv(input, cfg.csv);
  const std::string dir = ensure_output_dir(cfg);
  if (model_out.empty()) model_out = join_path(dir, "model.json");
  if (peak_out.empty()) peak_out = join_path(dir, "peak.json");

  clpu::ArimaOrder order{};
  if (!order_text.empty())
    order = parse_order_string(order_text);
  else if (!order_file.empty())
    order = load_order_file(order_file);
  else
    throw clpu::DataError("either --order or --order-file is required");

  const clpu::ArimaModel model = clpu::fit(series, order);
  clpu::save_model(model, model_out);
  std::printf("model (%d,%d,%d) loglik %.6g converged %d -> %s\n", order.p, order.d, order.q,
              model.loglik, model.converged ? 1 : 0, model_out.c_str());

  try {
    const clpu::PeakSeries peaks = clpu::daily_peaks(series);
    const clpu::PeakModel pk = clpu::fit_peak_model(peaks, cfg.clpu.n_lags, cfg.clpu.peak_intercept);
    clpu::save_peak_model(pk, peak_out);
    std::printf("peak model (%d lags) -> %s\n", pk.n_lags, peak_out.c_str());
  } catch (const clpu::InsufficientHistory& e) {
    std::fprintf(stderr, "peak model skipped: %s\n", e.what());
  } catch (const clpu::NoCompleteDay& e) {
    std::fprintf(stderr, "peak model skipped: %s\n", e.what());
  }
  return 0;
}

int cmd_forecast(const CommonOpts& common, const std::string& model_path, const std::string& input,
                 const std::string& t0_text, int r_max) {
  const clpu::Config cfg = resolve_config(common);
  const clpu::ArimaModel model = clpu::load_model(model_path);
  clpu::EnergySeries series = clpu::ingest_csv(input, cfg.csv);
  const clpu::Timestamp t0 =
      t0_text.empty() ? series.end_time() : clpu::parse_iso8601(t0_text);
  series = clip_history(series, t0);
  if (r_max <= 0) r_max = std::max(1, cfg.horizon_cap - 1);
  if (r_max > cfg.horizon_cap)
    throw clpu::InvalidParams("r_max exceeds the configured horizon cap");

  const clpu::CumulativeForecast fc = clpu::forecast_cumulative(model, series.values, t0, r_max);
  const std::string dir = ensure_output_dir(cfg);
  const std::string path = join_path(dir, "forecast.csv");
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw clpu::DataError("cannot open for writing: " + path);
  std::fprintf(f, "t0,r,per_step_kwh,cumulative_kwh\n");
  for (std::size_t i = 0; i < fc.energy_kwh.size(); ++i) {
    std::fprintf(f, "%s,%d,%.12g,%.12g\n", clpu::format_iso8601(fc.t0).c_str(),
                 fc.horizon_steps[i], fc.per_step[i], fc.energy_kwh[i]);
  }
  std::fclose(f);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_clpu(const CommonOpts& common, const std::string& model_path,
             const std::string& peak_path, const std::string& input, const std::string& t0_text,
             int r_max) {
  const clpu::Config cfg = resolve_config(common);
  const clpu::ArimaModel model = clpu::load_model(model_path);
  const clpu::PeakModel peak = clpu::load_peak_model(peak_path);
  clpu::EnergySeries series = clpu::ingest_csv(input, cfg.csv);
  const clpu::Timestamp t0 =
      t0_text.empty() ? series.end_time() : clpu::parse_iso8601(t0_text);
  series = clip_history(series, t0);
  if (r_max <= 0) r_max = cfg.horizon_cap;
  if (r_max > cfg.horizon_cap)
    throw clpu::InvalidParams("r_max exceeds the configured horizon cap");

  const clpu::ClpuEstimate est =
      clpu::estimate_clpu(model, peak, series.values, t0, r_max, cfg.clpu);
  const std::string dir = ensure_output_dir(cfg);
  const std::string path = join_path(dir, "clpu.csv");
  clpu::write_clpu_csv(est, path);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

void write_backtest_summary(const clpu::BacktestReport& report, const std::string& path,
                            bool zero_timing) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw clpu::DataError("cannot open for writing: " + path);
  std::fprintf(f, "method,mse,steps,order_refreshes,divergences,final_p,final_d,final_q,wall_millis\n");
  for (const auto& [method, run] : report.per_method) {
    std::fprintf(f, "%s,%.12g,%zu,%d,%d,%d,%d,%d,%.12g\n", clpu::method_name(method).c_str(),
                 run.mse, run.sq_errors.size(), run.order_refreshes, run.divergences,
                 run.final_order.p, run.final_order.d, run.final_order.q,
                 zero_timing ? 0.0 : run.wall_millis);
  }
  std::fclose(f);
}

void write_backtest_steps(const clpu::BacktestReport& report, const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw clpu::DataError("cannot open for writing: " + path);
  std::fprintf(f, "step_time");
  for (const auto& [method, run] : report.per_method) {
    (void)run;
    const std::string n = clpu::method_name(method);
    std::fprintf(f, ",%s_forecast,%s_actual,%s_sq_error,%s_cumulative_sse", n.c_str(), n.c_str(),
                 n.c_str(), n.c_str());
  }
  std::fprintf(f, "\n");
  std::size_t steps = 0;
  for (const auto& [method, run] : report.per_method) {
    (void)method;
    steps = std::max(steps, run.step_times.size());
  }
  for (std::size_t i = 0; i < steps; ++i) {
    bool first = true;
    for (const auto& [method, run] : report.per_method) {
      (void)method;
      if (first) {
        std::fprintf(f, "%s", clpu::format_iso8601(run.step_times[i]).c_str());
        first = false;
      }
      std::fprintf(f, ",%.12g,%.12g,%.12g,%.12g", run.forecasts[i], run.actuals[i],
                   run.sq_errors[i], run.cumulative_sse[i]);
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

int cmd_backtest(const CommonOpts& common, const std::string& input, const std::string& methods,
                 const std::string& policy) {
  clpu::Config cfg = resolve_config(common);
  if (!methods.empty()) cfg.backtest.methods = parse_methods_flag(methods);
  if (!policy.empty()) {
    if (policy == "weekly_or_divergence")
      cfg.backtest.refresh_policy = clpu::RefreshPolicy::weekly_or_divergence;
    else if (policy == "fixed_order")
      cfg.backtest.refresh_policy = clpu::RefreshPolicy::fixed_order;
    else
      throw clpu::ConfigError("unknown refresh policy: " + policy);
  }
  const clpu::EnergySeries series = clpu::ingest_csv(input, cfg.csv);
  const clpu::BacktestReport report = clpu::rolling_backtest(series, cfg.backtest);
  const std::string dir = ensure_output_dir(cfg);
  write_backtest_summary(report, join_path(dir, "summary.csv"), common.seed.has_value());
  write_backtest_steps(report, join_path(dir, "steps.csv"));
  std::printf("wrote %s and %s\n", join_path(dir, "summary.csv").c_str(),
              join_path(dir, "steps.csv").c_str());
  return 0;
}

int cmd_compare(const CommonOpts& common, const std::vector<std::string>& inputs, int synthetic,
                int days, const std::string& methods) {
  clpu::Config cfg = resolve_config(common);
  if (!methods.empty()) cfg.backtest.methods = parse_methods_flag(methods);
  std::vector<clpu::EnergySeries> suite;
  for (const std::string& path : inputs) suite.push_back(clpu::ingest_csv(path, cfg.csv));
  if (synthetic > 0) {
    const std::uint64_t seed = common.seed.value_or(42);
    for (clpu::EnergySeries& s : clpu::synthetic_suite(seed, synthetic, days))
      suite.push_back(std::move(s));
  }
  if (suite.empty()) throw clpu::DataError("no input series given");

  const clpu::CompareReport report = clpu::compare_methods(suite, cfg.backtest);
  const std::string dir = ensure_output_dir(cfg);
  clpu::write_table2_csv(report, join_path(dir, "table2.csv"));
  const bool both = report.runs.count(clpu::Method::arima_reduced) != 0 &&
                    report.runs.count(clpu::Method::arima_full) != 0;
  if (both) clpu::write_table1_csv(report, join_path(dir, "table1.csv"));
  clpu::write_per_series_csv(report, join_path(dir, "per_series.csv"), common.seed.has_value());
  clpu::write_cumulative_csv(report, join_path(dir, "cumulative.csv"));
  std::printf("compared %zu series with %zu methods -> %s\n", suite.size(), report.runs.size(),
              dir.c_str());
  return 0;
}

int cmd_simulate(const CommonOpts& common, int houses, int days, bool with_outages) {
  clpu::Config cfg = resolve_config(common);
  if (houses > 0) cfg.etp.n_houses = houses;
  if (days > 0) cfg.etp.clean_days = days;
  const std::uint64_t seed = common.seed.value_or(42);
  const auto suite = clpu::winter_scenario_suite(seed, cfg.etp, cfg.house);
  const std::string dir = ensure_output_dir(cfg);
  const double span_hours = static_cast<double>(cfg.etp.clean_days + 2) * 24.0;

  FILE* gt = nullptr;
  if (with_outages) {
    const std::string path = join_path(dir, "ground_truth.csv");
    gt = std::fopen(path.c_str(), "wb");
    if (gt == nullptr) throw clpu::DataError("cannot open for writing: " + path);
    std::fprintf(gt, "house,outage_hours,restoration_time,duration_hours,peak_kw,recovered\n");
  }
  for (std::size_t h = 0; h < suite.size(); ++h) {
    const clpu::SimulationResult clean = clpu::simulate(
        suite[h].params, suite[h].weather, span_hours, std::nullopt, cfg.etp.meter_delta_minutes);
    clpu::EnergySeries meter = clean.meter;
    meter.meter_id = "house_" + std::to_string(h);
    clpu::write_csv(meter, join_path(dir, meter.meter_id + ".csv"), cfg.csv);
    if (with_outages) {
      for (const clpu::OutageScenario& o : suite[h].outages) {
        const clpu::SimulationResult out = clpu::simulate(suite[h].params, suite[h].weather,
                                                          span_hours, o, cfg.etp.meter_delta_minutes);
        const clpu::ClpuGroundTruth& g = *out.ground_truth;
        std::fprintf(gt, "%zu,%d,%s,%.12g,%.12g,%d\n", h,
                     static_cast<int>(std::llround(o.duration_hours)),
                     clpu::format_iso8601(g.restoration_time).c_str(), g.duration_hours, g.peak_kw,
                     g.recovered ? 1 : 0);
      }
    }
  }
  if (gt != nullptr) std::fclose(gt);
  std::printf("simulated %zu houses, %d clean days -> %s\n", suite.size(), cfg.etp.clean_days,
              dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cold-load-pick-up forecasting toolkit for smart-meter data"};
  app.require_subcommand(1);

  CommonOpts common;
  std::uint64_t seed_value = 0;
  app.add_option("--config", common.config_path, "Config file (TOML-style sections)")
      ->envname("CLPU_CONFIG");
  app.add_option("--output-dir", common.output_dir, "Output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed; also pins timing fields to 0");
  app.add_option("--jobs", common.jobs, "Worker threads for searches and suites");

  auto* analyze = app.add_subcommand("analyze", "Correlogram and stationarity reports")->fallthrough();
  std::string in_analyze;
  int max_lag = 48;
  analyze->add_option("input", in_analyze, "Input meter CSV")->required();
  analyze->add_option("--max-lag", max_lag, "Maximum correlogram lag");

  auto* select = app.add_subcommand("select-order", "Run ARIMA order search")->fallthrough();
  std::string in_select;
  std::string method = "reduced";
  select->add_option("input", in_select, "Input meter CSV")->required();
  select->add_option("--method", method, "reduced or full");

  auto* fit_cmd = app.add_subcommand("fit", "Fit energy and peak models")->fallthrough();
  std::string in_fit;
  std::string order_text;
  std::string order_file;
  std::string model_out;
  std::string peak_out;
  fit_cmd->add_option("input", in_fit, "Input meter CSV")->required();
  fit_cmd->add_option("--order", order_text, "Order as p,d,q");
  fit_cmd->add_option("--order-file", order_file, "order.json from select-order");
  fit_cmd->add_option("--model-out", model_out, "Energy model output path");
  fit_cmd->add_option("--peak-out", peak_out, "Peak model output path");

  auto* fc_cmd = app.add_subcommand("forecast", "Cumulative energy forecast")->fallthrough();
  std::string fc_model;
  std::string in_fc;
  std::string fc_t0;
  int fc_rmax = 0;
  fc_cmd->add_option("--model", fc_model, "Energy model file")->required();
  fc_cmd->add_option("input", in_fc, "History meter CSV")->required();
  fc_cmd->add_option("--t0", fc_t0, "Forecast origin (ISO-8601, default end of input)");
  fc_cmd->add_option("--r-max", fc_rmax, "Largest cumulative index r");

  auto* clpu_cmd = app.add_subcommand("clpu", "CLPU peak/energy/duration estimate")->fallthrough();
  std::string cl_model;
  std::string cl_peak;
  std::string in_cl;
  std::string cl_t0;
  int cl_rmax = 0;
  clpu_cmd->add_option("--model", cl_model, "Energy model file")->required();
  clpu_cmd->add_option("--peak-model", cl_peak, "Peak model file")->required();
  clpu_cmd->add_option("input", in_cl, "History meter CSV")->required();
  clpu_cmd->add_option("--t0", cl_t0, "Outage start (ISO-8601, default end of input)");
  clpu_cmd->add_option("--r-max", cl_rmax, "Number of outage-duration entries");

  auto* bt_cmd = app.add_subcommand("backtest", "Rolling-origin backtest on one series")->fallthrough();
  std::string in_bt;
  std::string bt_methods;
  std::string bt_policy;
  bt_cmd->add_option("input", in_bt, "Input meter CSV")->required();
  bt_cmd->add_option("--methods", bt_methods, "Comma-separated method list");
  bt_cmd->add_option("--policy", bt_policy, "weekly_or_divergence or fixed_order");

  auto* cp_cmd = app.add_subcommand("compare", "Method comparison across series")->fallthrough();
  std::vector<std::string> cp_inputs;
  int cp_synth = 0;
  int cp_days = 10;
  std::string cp_methods;
  cp_cmd->add_option("--input", cp_inputs, "Input meter CSV (repeatable)");
  cp_cmd->add_option("--synthetic", cp_synth, "Generate this many synthetic series");
  cp_cmd->add_option("--days", cp_days, "Days per synthetic series");
  cp_cmd->add_option("--methods", cp_methods, "Comma-separated method list");

  auto* sim_cmd = app.add_subcommand("simulate", "ETP house simulation suite")->fallthrough();
  int sim_houses = 0;
  int sim_days = 0;
  bool sim_outages = false;
  sim_cmd->add_option("--houses", sim_houses, "Number of houses (overrides config)");
  sim_cmd->add_option("--days", sim_days, "Clean days (overrides config)");
  sim_cmd->add_flag("--with-outages", sim_outages, "Also emit outage ground truths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  }
  if (seed_opt->count() > 0) common.seed = seed_value;

  try {
    if (*analyze) return cmd_analyze(common, in_analyze, max_lag);
    if (*select) return cmd_select_order(common, in_select, method);
    if (*fit_cmd) return cmd_fit(common, in_fit, order_text, order_file, model_out, peak_out);
    if (*fc_cmd) return cmd_forecast(common, fc_model, in_fc, fc_t0, fc_rmax);
    if (*clpu_cmd) return cmd_clpu(common, cl_model, cl_peak, in_cl, cl_t0, cl_rmax);
    if (*bt_cmd) return cmd_backtest(common, in_bt, bt_methods, bt_policy);
    if (*cp_cmd) return cmd_compare(common, cp_inputs, cp_synth, cp_days, cp_methods);
    if (*sim_cmd) return cmd_simulate(common, sim_houses, sim_days, sim_outages);
  } catch (const clpu::SearchError& e) {
    std::fprintf(stderr, "search error: %s\n", e.what());
    return 3;
  } catch (const clpu::EstimationError& e) {
    std::fprintf(stderr, "estimation error: %s\n", e.what());
    return 4;
  } catch (const clpu::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const clpu::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
