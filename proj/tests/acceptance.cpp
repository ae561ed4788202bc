// Acceptance gate for the toolkit. Each criterion prints exactly one
// "criterion N PASS|FAIL: detail" line; the exit code is nonzero when any
// criterion fails. All tolerances are pinned here as named constants.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clpu/arima.hpp"
#include "clpu/baselines.hpp"
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
using namespace clpu;

namespace {

// criterion 1
constexpr double kCoefTol = 0.06;
constexpr int kMinGoodRuns = 9;
constexpr int kConsistencyRuns = 10;
constexpr std::size_t kConsistencyN = 5000;
constexpr double kMaxFitSeconds = 1.0;
// criterion 2
constexpr double kPacfOracleTol = 1e-6;
constexpr double kAffineTol = 1e-9;
constexpr int kAdfTrials = 100;
constexpr int kAdfMinCorrect = 95;
constexpr std::size_t kAdfN = 1000;
// criterion 3
constexpr int kSuiteSeries = 20;
constexpr int kSuiteDays = 10;
constexpr double kMedianInflationMax = 1.0;  // at most a 100% holdout-MSE increase
constexpr double kSearchSuiteBudgetSeconds = 600.0;
// criterion 4
constexpr double kRandomWalkWinFraction = 0.80;
// criterion 6
constexpr double kDurationRelTol = 0.25;
constexpr double kPeakRelTol = 0.15;
constexpr double kCoverageMin = 0.70;
constexpr double kEtpSuiteBudgetSeconds = 900.0;
// criterion 7
constexpr double kExactTol = 1e-9;
// criterion 9
constexpr double kArimaxForecastTol = 1e-6;
constexpr double kBetaTol = 0.1;

struct Outcome {
  int id = 0;
  bool pass = false;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void report(int id, bool pass, const std::string& detail) {
  g_outcomes.push_back({id, pass, detail});
  std::printf("criterion %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EnergySeries as_series(std::vector<double> values) {
  EnergySeries s;
  s.start_time = 0;
  s.resolution_minutes = 15;
  s.values = std::move(values);
  return s;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Estimator consistency: ARIMA(1,0,0), (0,0,1), (1,0,1), (2,1,0) on
//    5000-sample known generators; every coefficient within +-0.06 in at
//    least 9 of 10 seeded runs; every fit under 1 s.
void criterion1() {
  struct Generator {
    ArimaOrder order;
    std::vector<double> phi;
    std::vector<double> theta;
  };
  const std::vector<Generator> generators = {
      {{1, 0, 0}, {0.7}, {}},
      {{0, 0, 1}, {}, {0.5}},
      {{1, 0, 1}, {0.6}, {0.3}},
      {{2, 1, 0}, {0.5, -0.3}, {}},
  };

  bool pass = true;
  double max_fit_seconds = 0.0;
  std::string detail;
  for (const Generator& g : generators) {
    int good = 0;
    for (int run = 0; run < kConsistencyRuns; ++run) {
      std::vector<double> x =
          simulate_arma(kConsistencyN, g.phi, g.theta, 1.0, 1000 + static_cast<std::uint64_t>(run));
      if (g.order.d == 1) {
        for (std::size_t i = 1; i < x.size(); ++i) x[i] += x[i - 1];
      }
      const auto t0 = std::chrono::steady_clock::now();
      const ArimaModel m = fit(as_series(std::move(x)), g.order);
      const double dt = seconds_since(t0);
      max_fit_seconds = std::max(max_fit_seconds, dt);
      bool ok = m.converged;
      for (std::size_t i = 0; ok && i < g.phi.size(); ++i)
        ok = std::abs(m.phi[i] - g.phi[i]) <= kCoefTol;
      for (std::size_t i = 0; ok && i < g.theta.size(); ++i)
        ok = std::abs(m.theta[i] - g.theta[i]) <= kCoefTol;
      if (ok) ++good;
    }
    if (good < kMinGoodRuns) pass = false;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "(%d,%d,%d) %d/%d ", g.order.p, g.order.d, g.order.q, good,
                  kConsistencyRuns);
    detail += buf;
  }
  if (max_fit_seconds >= kMaxFitSeconds) pass = false;
  detail += fmt("| max fit %.3f s (limit %.0f s)", max_fit_seconds, kMaxFitSeconds);
  report(1, pass, detail);
}

// ---------------------------------------------------------------------------
// 2. Diagnostics vs oracles: Durbin-Levinson PACF equals a brute-force
//    per-lag AR solve to 1e-6 for lags <= 10; ACF affine invariance to 1e-9;
//    ADF separates random walks from iid noise in >= 95/100 trials each.
void criterion2() {
  const std::vector<double> x = simulate_arma(600, {0.6, -0.3}, {}, 1.0, 21);
  const Correlogram rho = acf(x, 10);
  const Correlogram phi = pacf(x, 10);
  double pacf_err = 0.0;
  for (int k = 1; k <= 10; ++k) {
    // AR(k) Yule-Walker fit by direct linear solve; PACF(k) is its last coefficient
    Eigen::MatrixXd R(k, k);
    Eigen::VectorXd r(k);
    for (int i = 0; i < k; ++i) {
      r(i) = rho.values[static_cast<std::size_t>(i + 1)];
      for (int j = 0; j < k; ++j) R(i, j) = rho.values[static_cast<std::size_t>(std::abs(i - j))];
    }
    const Eigen::VectorXd a = Eigen::FullPivLU<Eigen::MatrixXd>(R).solve(r);
    pacf_err = std::max(pacf_err, std::abs(a(k - 1) - phi.values[static_cast<std::size_t>(k)]));
  }

  std::vector<double> affine(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) affine[i] = 3.5 * x[i] - 11.0;
  const Correlogram rho_affine = acf(affine, 20);
  const Correlogram rho_base = acf(x, 20);
  double affine_err = 0.0;
  for (std::size_t k = 0; k < rho_base.values.size(); ++k)
    affine_err = std::max(affine_err, std::abs(rho_affine.values[k] - rho_base.values[k]));

  int rw_correct = 0;
  int iid_correct = 0;
  for (int trial = 0; trial < kAdfTrials; ++trial) {
    std::mt19937_64 rng(5000 + static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> rw(kAdfN);
    std::vector<double> iid(kAdfN);
    double acc = 0.0;
    for (std::size_t i = 0; i < kAdfN; ++i) {
      acc += gauss(rng);
      rw[i] = acc;
      iid[i] = gauss(rng);
    }
    if (!adf_test(rw).stationary_at_5pct) ++rw_correct;
    if (adf_test(iid).stationary_at_5pct) ++iid_correct;
  }

  const bool pass = pacf_err <= kPacfOracleTol && affine_err <= kAffineTol &&
                    rw_correct >= kAdfMinCorrect && iid_correct >= kAdfMinCorrect;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "pacf err %.2e (tol 1e-6), affine err %.2e (tol 1e-9), adf rw %d/100, iid %d/100",
                pacf_err, affine_err, rw_correct, iid_correct);
  report(2, pass, buf);
}

// ---------------------------------------------------------------------------
// 3. Reduced vs full grid search on a 20-series synthetic suite: reduced
//    wall time below full on every series, median holdout-MSE inflation
//    <= 100%, whole suite under 10 minutes.
void criterion3() {
  const auto suite_start = std::chrono::steady_clock::now();
  const std::vector<EnergySeries> suite = synthetic_suite(31337, kSuiteSeries, kSuiteDays);
  const SearchConfig cfg;  // library defaults

  const auto chosen_criterion = [](const SearchResult& r) {
    for (const SearchCell& cell : r.cells_evaluated)
      if (cell.converged && cell.order == r.chosen) return cell.criterion;
    throw SearchError("chosen order missing from the evaluated cells");
  };

  int reduced_faster = 0;
  std::vector<double> inflations;
  for (const EnergySeries& s : suite) {
    auto t0 = std::chrono::steady_clock::now();
    const SearchResult red = reduced_grid_search(s, cfg);
    const double red_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const SearchResult full = full_grid_search(s, cfg);
    const double full_seconds = seconds_since(t0);
    if (red_seconds < full_seconds) ++reduced_faster;
    const double crit_red = chosen_criterion(red);
    const double crit_full = chosen_criterion(full);
    inflations.push_back((crit_red - crit_full) / crit_full);
  }
  const double median_inflation = percentile(inflations, 0.5);
  const double total_seconds = seconds_since(suite_start);

  const bool pass = reduced_faster == kSuiteSeries && median_inflation <= kMedianInflationMax &&
                    total_seconds < kSearchSuiteBudgetSeconds;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "reduced faster on %d/%d series, median inflation %.2f%% (cap 100%%), suite %.0f s "
                "(budget %.0f s)",
                reduced_faster, kSuiteSeries, 100.0 * median_inflation, total_seconds,
                kSearchSuiteBudgetSeconds);
  report(3, pass, buf);
}

// ---------------------------------------------------------------------------
// 4. Method comparison with 7-day training: ARIMA median 12-h MSE and MSE
//    standard deviation no worse than HWES; ARIMA beats the random walk on
//    at least 80% of series.
void criterion4() {
  const std::vector<EnergySeries> suite = synthetic_suite(777, kSuiteSeries, kSuiteDays);
  BacktestConfig cfg;  // 7-day train window, 48 x 15 min = 12 h horizon
  cfg.methods = {Method::arima_reduced, Method::hwes, Method::random_walk};
  const CompareReport rep = compare_methods(suite, cfg);

  const PercentileStats& ar = rep.mse_stats.at(Method::arima_reduced);
  const PercentileStats& hw = rep.mse_stats.at(Method::hwes);
  int beats_rw = 0;
  for (int i = 0; i < kSuiteSeries; ++i) {
    if (rep.runs.at(Method::arima_reduced)[static_cast<std::size_t>(i)].mse <
        rep.runs.at(Method::random_walk)[static_cast<std::size_t>(i)].mse)
      ++beats_rw;
  }
  const bool pass = ar.p50 <= hw.p50 && ar.std_dev <= hw.std_dev &&
                    beats_rw >= static_cast<int>(std::ceil(kRandomWalkWinFraction * kSuiteSeries));
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "median MSE arima %.3f vs hwes %.3f, std %.3f vs %.3f, beats RW on %d/%d series",
                ar.p50, hw.p50, ar.std_dev, hw.std_dev, beats_rw, kSuiteSeries);
  report(4, pass, buf);
}

// ---------------------------------------------------------------------------
// 5. Refresh policy on a regime-switching series: weekly order refresh ends
//    with cumulative squared error no larger than the frozen-order run.
void criterion5() {
  const EnergySeries s = regime_switch_series(11, 42);
  BacktestConfig cfg;
  cfg.methods = {Method::arima_reduced};
  cfg.search.p_limit = 3;
  cfg.search.q_limit = 3;

  cfg.refresh_policy = RefreshPolicy::weekly_or_divergence;
  const BacktestReport weekly = rolling_backtest(s, cfg);
  cfg.refresh_policy = RefreshPolicy::fixed_order;  // order picked once, then frozen
  const BacktestReport fixed = rolling_backtest(s, cfg);

  const MethodRun& w = weekly.per_method.at(Method::arima_reduced);
  const MethodRun& f = fixed.per_method.at(Method::arima_reduced);
  const double w_err = w.cumulative_sse.back();
  const double f_err = f.cumulative_sse.back();
  const bool pass = w_err <= f_err;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "cumulative SSE weekly %.2f vs fixed %.2f (%d vs %d refreshes, final orders "
                "(%d,%d,%d) vs (%d,%d,%d))",
                w_err, f_err, w.order_refreshes, f.order_refreshes, w.final_order.p,
                w.final_order.d, w.final_order.q, f.final_order.p, f.final_order.d,
                f.final_order.q);
  report(5, pass, buf);
}

// ---------------------------------------------------------------------------
// 6. Physics validation against the ETP simulator: default-house 1-h outage
//    duration within +-25% and peak within +-15% of simulated truth; 50% CI
//    covers >= 70% of (house, outage) cells; suite under 15 minutes.
void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const EtpSuiteConfig scfg;  // 6 houses, 21 clean days, 1..10 h outages
  const std::vector<HouseScenario> suite = winter_scenario_suite(4242, scfg);
  const SearchConfig search;
  const EtpValidationReport rep = etp_validation(suite, scfg, search, ClpuConfig{}, 1);
  const double total_seconds = seconds_since(t0);

  const EtpValidationCell* base = nullptr;
  for (const EtpValidationCell& c : rep.cells)
    if (c.house == 0 && c.outage_hours == 1) base = &c;
  bool pass = base != nullptr;
  double dur_err = 0.0;
  double peak_err = 0.0;
  if (base != nullptr) {
    dur_err = std::abs(base->forecast_duration_hours - base->true_duration_hours) /
              base->true_duration_hours;
    peak_err = std::abs(base->forecast_peak_kw - base->true_peak_kw) / base->true_peak_kw;
    pass = dur_err <= kDurationRelTol && peak_err <= kPeakRelTol;
  }
  pass = pass && rep.coverage50 >= kCoverageMin && total_seconds < kEtpSuiteBudgetSeconds;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "1-h duration err %.1f%% (tol 25%%), peak err %.1f%% (tol 15%%), coverage50 "
                "%.0f%% over %zu cells (min 70%%), suite %.0f s (budget %.0f s)",
                100.0 * dur_err, 100.0 * peak_err, 100.0 * rep.coverage50, rep.cells.size(),
                total_seconds, kEtpSuiteBudgetSeconds);
  report(6, pass, buf);
}

// ---------------------------------------------------------------------------
// 7. Exact identities on randomized inputs, all to 1e-9:
//    integrate(difference(x)) == x; telescoping of the cumulative forecast;
//    t_C * P_CLPU == E_o; random walk == ARIMA(0,1,0); E_C - E_o == E_n.
void criterion7() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  std::string failed;

  const auto track = [&](const char* name, double err) {
    worst = std::max(worst, err);
    if (err > kExactTol && failed.empty()) failed = name;
  };

  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 120 + static_cast<std::size_t>(uni(rng) * 120.0);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = 2.0 + std::sin(static_cast<double>(i) / 9.0) + uni(rng);

    // integrate . difference round trip
    for (int d = 1; d <= 2; ++d) {
      const DifferencedSeries diff = difference(v, d);
      const std::vector<double> seeds(v.begin(), v.begin() + d);
      const std::vector<double> back = integrate(diff, seeds);
      double err = back.size() == v.size() ? 0.0 : 1.0;
      for (std::size_t i = 0; i < v.size() && err < 1.0; ++i)
        err = std::max(err, std::abs(back[i] - v[i]));
      track("integrate-difference", err);
    }

    const ArimaModel m = fit(as_series(v), {1, 0, 1});
    const CumulativeForecast fc = forecast_cumulative(m, v, 0, 12);
    const std::vector<double> steps = forecast_step(m, v, 13);
    double tele = std::abs(fc.energy_kwh[0] - fc.per_step[0]);
    double cross = 0.0;
    for (std::size_t r = 1; r < fc.energy_kwh.size(); ++r)
      tele = std::max(tele, std::abs(fc.energy_kwh[r] - fc.energy_kwh[r - 1] - fc.per_step[r]));
    for (std::size_t r = 0; r < fc.per_step.size(); ++r)
      cross = std::max(cross, std::abs(fc.per_step[r] - steps[r]));
    track("telescoping", tele);
    track("per-step cross-check", cross);

    // CLPU identities need a peak model; 20 random daily peaks
    PeakSeries peaks;
    for (int day = 0; day < 20; ++day) {
      peaks.days.push_back(day);
      peaks.peaks_kw.push_back(3.0 + 2.0 * uni(rng));
    }
    const PeakModel pm = fit_peak_model(peaks, 7);
    const Timestamp t0 = 20 * 86400;
    const ClpuEstimate est = estimate_clpu(m, pm, v, t0, 8);
    for (const ClpuEntry& e : est.entries) {
      track("duration identity", std::abs(e.t_c_hat_hours * e.p_clpu_kw - e.e_o_hat_kwh));
      const NormalConsumption nc = normal_consumption(m, v, e.tau1, e.tau2);
      const double e_c = e.e_o_hat_kwh + nc.e_n_hat_kwh;
      track("consumption split", std::abs((e_c - e.e_o_hat_kwh) - nc.e_n_hat_kwh));
      track("normal consumption sign", nc.e_n_hat_kwh >= 0.0 ? 0.0 : 1.0);
    }

    // random walk coincides with ARIMA(0,1,0)
    const ArimaModel rw_arima = fit(as_series(v), {0, 1, 0});
    const std::vector<double> rw_fc = forecast_random_walk(fit_random_walk(v), 12);
    const std::vector<double> arima_fc = forecast_step(rw_arima, v, 12);
    double rw_err = std::abs(rw_arima.intercept);
    for (int h = 0; h < 12; ++h) {
      rw_err = std::max(rw_err, std::abs(rw_fc[static_cast<std::size_t>(h)] -
                                         arima_fc[static_cast<std::size_t>(h)]));
      rw_err = std::max(rw_err, std::abs(arima_fc[static_cast<std::size_t>(h)] - v.back()));
    }
    track("random walk equivalence", rw_err);
  }

  const bool pass = failed.empty();
  const std::string detail =
      pass ? fmt("all identities hold on 20 randomized inputs, worst deviation %.2e (tol 1e-9)",
                 worst)
           : "first failing identity: " + failed + " " + fmt("(deviation %.2e)", worst);
  report(7, pass, detail);
}

// ---------------------------------------------------------------------------
// 8. Determinism: every CLI command, run twice with the same seed, produces
//    byte-identical output files.
int run_cli(const std::string& args, const std::string& log_path) {
  const std::string cmd = std::string(CLPU_CLI_PATH) + " " + args + " >> " + log_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void criterion8() {
  const fs::path root = fs::temp_directory_path() / "clpu_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string log = (root / "log.txt").string();

  const std::string meter = (root / "meter.csv").string();
  {
    std::ofstream out(meter, std::ios::binary);
    out << "timestamp,energy_kwh\n";
    char buf[64];
    for (int i = 0; i < 18 * 96; ++i) {
      const double tod = static_cast<double>(i % 96) / 96.0;
      const double kwh = 0.25 + 0.2 * std::sin(2.0 * 3.14159265358979 * tod) +
                         0.05 * static_cast<double>(i % 7) / 7.0;
      std::snprintf(buf, sizeof(buf), "%.6f", kwh);
      out << format_iso8601(static_cast<Timestamp>(i) * 900) << "," << buf << "\n";
    }
  }
  const std::string cfg_path = (root / "small.toml").string();
  {
    std::ofstream out(cfg_path);
    out << "[search]\np_limit = 2\nq_limit = 2\nholdout_horizon_steps = 24\n"
        << "[harness]\ntrain_days = 2\nhorizon_steps = 8\nmethods = arima_reduced,random_walk\n";
  }

  const std::vector<std::string> commands = {
      "analyze " + meter,
      "select-order " + meter,
      "fit " + meter + " --order 1,0,1",
      "forecast --model {dir}/model.json " + meter + " --r-max 8",
      "clpu --model {dir}/model.json --peak-model {dir}/peak.json " + meter + " --r-max 8",
      "backtest " + meter,
      "compare --synthetic 2 --days 4",
      "simulate --houses 1 --days 2 --with-outages",
  };

  bool pass = true;
  std::string detail;
  for (const char* run_name : {"a", "b"}) {
    const std::string dir = (root / run_name).string();
    fs::create_directories(dir);
    for (std::string cmd : commands) {
      for (std::size_t at = cmd.find("{dir}"); at != std::string::npos; at = cmd.find("{dir}"))
        cmd.replace(at, 5, dir);
      const int code =
          run_cli(cmd + " --config " + cfg_path + " --seed 5 --output-dir " + dir, log);
      if (code != 0) {
        pass = false;
        detail = "command failed (exit " + std::to_string(code) + "): " + cmd;
        break;
      }
    }
    if (!pass) break;
  }

  std::size_t files = 0;
  if (pass) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(root / "a"))
      names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const std::string& name : names) {
      ++files;
      if (!fs::exists(root / "b" / name) || slurp(root / "a" / name) != slurp(root / "b" / name)) {
        pass = false;
        detail = "output differs between seeded runs: " + name;
        break;
      }
    }
    if (pass && (files == 0 || !fs::exists(root / "b"))) {
      pass = false;
      detail = "no output files produced";
    }
  }
  if (pass)
    detail = std::to_string(commands.size()) + " commands, " + std::to_string(files) +
             " output files byte-identical across two seeded runs";
  report(8, pass, detail);
}

// ---------------------------------------------------------------------------
// 9. ARIMAX sanity: zero regressors reproduce the univariate forecasts to
//    1e-6; collinear regressors raise the divergence flag; a known
//    exogenous coefficient is recovered within +-0.1.
void criterion9() {
  const std::vector<double> base = simulate_arma(400, {0.6}, {0.2}, 1.0, 31, 3.0);
  const EnergySeries s = as_series(base);
  const std::vector<double> zeros(base.size(), 0.0);

  const ArimaModel uni = fit(s, {1, 0, 1});
  const ArimaxModel with_zeros = fit_arimax(s, zeros, {1, 0, 1});
  double zero_err = uni.converged && with_zeros.converged ? 0.0 : 1.0;
  const std::vector<double> fu = forecast_step(uni, base, 8);
  const std::vector<double> fx = forecast_step(with_zeros, base, zeros, 8);
  for (std::size_t h = 0; h < fu.size(); ++h)
    zero_err = std::max(zero_err, std::abs(fu[h] - fx[h]));

  // Temps proportional to the energy series duplicate the lagged-energy
  // column, so the fit is unidentified and must carry the divergence flag.
  std::vector<double> prop(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) prop[i] = 2.0 * base[i];
  const ArimaxModel collinear = fit_arimax(s, prop, {1, 0, 0});

  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss(0.0, 0.3);
  const std::size_t n = 1500;
  std::vector<double> temps(n);
  std::vector<double> y(n, 0.0);
  for (std::size_t t = 0; t < n; ++t)
    temps[t] = std::sin(2.0 * 3.14159265358979 * static_cast<double>(t) / 96.0) + gauss(rng);
  for (std::size_t t = 1; t < n; ++t) y[t] = 0.5 * y[t - 1] + 2.0 * temps[t - 1] + gauss(rng);
  const ArimaxModel known = fit_arimax(as_series(y), temps, {1, 0, 0});
  const double beta_err = known.converged && known.beta.size() == 1
                              ? std::abs(known.beta[0] - 2.0)
                              : 1.0;

  const bool pass =
      zero_err <= kArimaxForecastTol && !collinear.converged && beta_err <= kBetaTol;
  char buf[192];
  std::snprintf(buf, sizeof(buf),
                "zero-regressor err %.2e (tol 1e-6), collinear diverged %s, beta err %.3f (tol "
                "0.1)",
                zero_err, collinear.converged ? "no" : "yes", beta_err);
  report(9, pass, buf);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  using CriterionFn = void (*)();
  const CriterionFn criteria[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                  criterion6, criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i) + 1, false, std::string("unhandled error: ") + e.what());
    }
  }

  int failed = 0;
  for (const Outcome& o : g_outcomes)
    if (!o.pass) ++failed;
  std::printf("acceptance: %zu criteria, %d failed, %.0f s total\n", std::size(criteria), failed,
              seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
