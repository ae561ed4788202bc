#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clpu/arima.hpp"
#include "clpu/series.hpp"
#include "clpu/time.hpp"

namespace clpu {

struct PeakModel {
  int n_lags = 7;
  std::vector<double> varphi;  ///< AR coefficients over the prior n_lags daily peaks
  /// Intercept for homes whose peaks do not scale with history; disabled by
  /// default (the peak recursion carries no constant term).
  double intercept = 0.0;
  bool has_intercept = false;
  double residual_sigma = 0.0;  ///< >= 0, from training residuals
  PeakSeries peak_history;      ///< trailing window, length >= n_lags
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

struct PeakEstimate {
  double point_kw = 0.0;
  /// Central quantile bands under a Gaussian residual assumption.
  Band band25;
  Band band50;
  Band band75;
};

struct ClpuEntry {
  int r = 0;                ///< outage horizon index; tau1 = t0 + r * delta
  Timestamp tau1 = 0;
  double e_o_hat_kwh = 0.0;
  double p_clpu_kw = 0.0;
  double t_c_hat_hours = 0.0;  ///< e_o_hat / p_clpu exactly
  Timestamp tau2 = 0;          ///< tau1 + t_c (rounded to the second)
  Band duration_band25;        ///< hours, from the peak's quantile bands
  Band duration_band50;
  Band duration_band75;
};

struct ClpuEstimate {
  Timestamp t0 = 0;
  int delta_minutes = 15;
  std::vector<ClpuEntry> entries;  ///< r = 1..r_max
};

struct NormalConsumption {
  Timestamp tau1 = 0;
  Timestamp tau2 = 0;
  double e_n_hat_kwh = 0.0;  ///< >= 0
};

struct ClpuConfig {
  int n_lags = 7;
  int staleness_days = 3;
  double zero_peak_floor_kw = 0.1;
  bool peak_intercept = false;
};

/// Least-squares fit of the daily-peak recursion on the n_lags prior peaks.
/// Rank-deficient normal equations (constant peaks) resolve to the
/// minimum-norm coefficient vector.
PeakModel fit_peak_model(const PeakSeries& peaks, int n_lags = 7, bool with_intercept = false);

/// Next-day peak estimate from the peaks of the n_lags days before asof,
/// clamped at 0, with central 25/50/75% bands from residual_sigma.
PeakEstimate estimate_peak(const PeakModel& model, Timestamp asof, int staleness_days = 3);

/// Full CLPU assessment for an outage starting at t0: foregone energy from
/// the energy model, peak from the peak model, duration as their ratio, and
/// duration bands from the peak bands.
ClpuEstimate estimate_clpu(const ArimaModel& energy_model, const PeakModel& peak_model,
                           const std::vector<double>& history, Timestamp t0, int r_max,
                           const ClpuConfig& cfg = {});

/// Expected consumption over [tau1, tau2] had service continued; history
/// ends at tau1. Partial trailing intervals contribute pro rata.
NormalConsumption normal_consumption(const ArimaModel& energy_model, const std::vector<double>& history,
                                     Timestamp tau1, Timestamp tau2);

/// CSV export in the report schema (one row per entry).
void write_clpu_csv(const ClpuEstimate& estimate, const std::string& path);

/// Peak model persistence (JSON).
void save_peak_model(const PeakModel& model, const std::string& path);
PeakModel load_peak_model(const std::string& path);

}  // namespace clpu
