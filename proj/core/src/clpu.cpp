#include "clpu/clpu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "clpu/errors.hpp"
#include "clpu/stattests.hpp"

namespace clpu {

namespace {

/// Central band half-width multipliers: a central c% band spans the
/// (.5 - c/2, .5 + c/2) quantiles.
double central_z(double coverage) { return normal_quantile(0.5 + coverage / 2.0); }

Band peak_band(double point, double sigma, double coverage) {
  const double hw = central_z(coverage) * sigma;
  return Band{std::max(0.0, point - hw), point + hw};
}

/// Duration band from a peak band: higher peak recovers the energy sooner.
/// A degenerate lower peak edge is floored so the band stays finite.
Band duration_band(double energy_kwh, const Band& peak, double floor_kw) {
  const double lo_peak = std::max(peak.lo, floor_kw);
  const double hi_peak = std::max(peak.hi, floor_kw);
  return Band{energy_kwh / hi_peak, energy_kwh / lo_peak};
}

}  // namespace

PeakModel fit_peak_model(const PeakSeries& peaks, int n_lags, bool with_intercept) {
  if (n_lags < 1) throw InvalidParams("peak model needs at least one lag");
  const auto n = static_cast<long>(peaks.peaks_kw.size());
  if (n < n_lags + 10)
    throw InsufficientHistory("peak model with " + std::to_string(n_lags) + " lags needs at least " +
                              std::to_string(n_lags + 10) + " daily peaks, got " + std::to_string(n));

  const long rows = n - n_lags;
  const int cols = n_lags + (with_intercept ? 1 : 0);
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (long i = 0; i < rows; ++i) {
    const long t = i + n_lags;
    y(i) = peaks.peaks_kw[static_cast<std::size_t>(t)];
    for (int j = 1; j <= n_lags; ++j) X(i, j - 1) = peaks.peaks_kw[static_cast<std::size_t>(t - j)];
    if (with_intercept) X(i, n_lags) = 1.0;
  }
  // Minimum-norm least squares: constant histories make the normal
  // equations rank-deficient, and the SVD pseudoinverse still predicts the
  // constant.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd coef = svd.solve(y);

  PeakModel m;
  m.n_lags = n_lags;
  m.has_intercept = with_intercept;
  m.varphi.resize(static_cast<std::size_t>(n_lags));
  for (int j = 0; j < n_lags; ++j) m.varphi[static_cast<std::size_t>(j)] = coef(j);
  if (with_intercept) m.intercept = coef(n_lags);
  const Eigen::VectorXd resid = y - X * coef;
  // Unbiased residual variance: the fit consumes one degree of freedom per
  // estimated coefficient, and with the short histories typical here (a few
  // weeks of daily peaks) the correction is far from negligible.
  const double dof = static_cast<double>(rows > cols ? rows - cols : rows);
  m.residual_sigma = std::sqrt(resid.squaredNorm() / dof);
  m.peak_history = peaks;
  return m;
}

PeakEstimate estimate_peak(const PeakModel& model, Timestamp asof, int staleness_days) {
  const auto n = static_cast<long>(model.peak_history.peaks_kw.size());
  if (n < model.n_lags) throw InsufficientHistory("peak history shorter than the model order");

  // Eq-style day indexing: the estimate for the day of asof uses the peaks
  // of days strictly before it.
  const std::int64_t asof_day = day_index(asof);
  long last = n - 1;
  while (last >= 0 && model.peak_history.days[static_cast<std::size_t>(last)] >= asof_day) --last;
  if (last + 1 < model.n_lags)
    throw InsufficientHistory("fewer than n_lags peak days precede the estimate date");
  const std::int64_t newest_day = model.peak_history.days[static_cast<std::size_t>(last)];
  if (asof_day - newest_day > staleness_days)
    throw StaleHistory("most recent daily peak is " + std::to_string(asof_day - newest_day) +
                       " days old at the estimate date (limit " + std::to_string(staleness_days) + ")");

  double point = model.has_intercept ? model.intercept : 0.0;
  for (int i = 1; i <= model.n_lags; ++i)
    point += model.varphi[static_cast<std::size_t>(i - 1)] *
             model.peak_history.peaks_kw[static_cast<std::size_t>(last + 1 - i)];
  point = std::max(0.0, point);

  PeakEstimate e;
  e.point_kw = point;
  e.band25 = peak_band(point, model.residual_sigma, 0.25);
  e.band50 = peak_band(point, model.residual_sigma, 0.50);
  e.band75 = peak_band(point, model.residual_sigma, 0.75);
  return e;
}

ClpuEstimate estimate_clpu(const ArimaModel& energy_model, const PeakModel& peak_model,
                           const std::vector<double>& history, Timestamp t0, int r_max,
                           const ClpuConfig& cfg) {
  if (r_max < 1) throw InvalidParams("r_max must be at least 1");
  const PeakEstimate peak = estimate_peak(peak_model, t0, cfg.staleness_days);
  if (peak.point_kw <= cfg.zero_peak_floor_kw)
    throw ZeroPeak("estimated peak " + std::to_string(peak.point_kw) + " kW is at or below the " +
                   std::to_string(cfg.zero_peak_floor_kw) + " kW floor; duration undefined");

  const CumulativeForecast fc = forecast_cumulative(energy_model, history, t0, r_max);
  const long delta_seconds = static_cast<long>(fc.delta_minutes) * 60;

  ClpuEstimate est;
  est.t0 = t0;
  est.delta_minutes = fc.delta_minutes;
  est.entries.reserve(static_cast<std::size_t>(r_max));
  for (int r = 1; r <= r_max; ++r) {
    ClpuEntry e;
    e.r = r;
    e.tau1 = t0 + static_cast<Timestamp>(r) * delta_seconds;
    e.e_o_hat_kwh = fc.energy_kwh[static_cast<std::size_t>(r)];
    e.p_clpu_kw = peak.point_kw;
    e.t_c_hat_hours = e.e_o_hat_kwh / e.p_clpu_kw;
    e.tau2 = e.tau1 + static_cast<Timestamp>(std::llround(e.t_c_hat_hours * 3600.0));
    e.duration_band25 = duration_band(e.e_o_hat_kwh, peak.band25, cfg.zero_peak_floor_kw);
    e.duration_band50 = duration_band(e.e_o_hat_kwh, peak.band50, cfg.zero_peak_floor_kw);
    e.duration_band75 = duration_band(e.e_o_hat_kwh, peak.band75, cfg.zero_peak_floor_kw);
    est.entries.push_back(e);
  }
  return est;
}

NormalConsumption normal_consumption(const ArimaModel& energy_model, const std::vector<double>& history,
                                     Timestamp tau1, Timestamp tau2) {
  if (tau2 < tau1) throw InvalidParams("tau2 must not precede tau1");
  NormalConsumption out;
  out.tau1 = tau1;
  out.tau2 = tau2;
  if (tau2 == tau1) return out;

  const double delta_seconds = energy_model.resolution_minutes * 60.0;
  const double span = static_cast<double>(tau2 - tau1);
  const auto full = static_cast<int>(std::floor(span / delta_seconds + 1e-9));
  const double frac = span / delta_seconds - full;
  const int steps = full + (frac > 1e-9 ? 1 : 0);
  const std::vector<double> fc = forecast_step(energy_model, history, steps);
  double e = 0.0;
  for (int i = 0; i < full; ++i) e += fc[static_cast<std::size_t>(i)];
  if (frac > 1e-9) e += frac * fc[static_cast<std::size_t>(full)];
  out.e_n_hat_kwh = e;
  return out;
}

void write_clpu_csv(const ClpuEstimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "t0,r,tau1,E_o_hat_kwh,P_clpu_kw,t_C_hours,tau2,band25_lo,band25_hi,band50_lo,band50_hi,"
         "band75_lo,band75_hi\n";
  char buf[512];
  for (const ClpuEntry& e : est.entries) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%s,%.12g,%.12g,%.12g,%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  format_iso8601(est.t0).c_str(), e.r, format_iso8601(e.tau1).c_str(), e.e_o_hat_kwh,
                  e.p_clpu_kw, e.t_c_hat_hours, format_iso8601(e.tau2).c_str(), e.duration_band25.lo,
                  e.duration_band25.hi, e.duration_band50.lo, e.duration_band50.hi, e.duration_band75.lo,
                  e.duration_band75.hi);
    out << buf;
  }
}

void save_peak_model(const PeakModel& m, const std::string& path) {
  nlohmann::json j;
  j["n_lags"] = m.n_lags;
  j["varphi"] = m.varphi;
  j["intercept"] = m.intercept;
  j["has_intercept"] = m.has_intercept;
  j["residual_sigma"] = m.residual_sigma;
  j["peak_days"] = m.peak_history.days;
  j["peaks_kw"] = m.peak_history.peaks_kw;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

PeakModel load_peak_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open peak model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
    PeakModel m;
    m.n_lags = j.at("n_lags").get<int>();
    m.varphi = j.at("varphi").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.has_intercept = j.at("has_intercept").get<bool>();
    m.residual_sigma = j.at("residual_sigma").get<double>();
    m.peak_history.days = j.at("peak_days").get<std::vector<std::int64_t>>();
    m.peak_history.peaks_kw = j.at("peaks_kw").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed peak model file: ") + e.what());
  }
}

}  // namespace clpu
