#pragma once

#include <string>
#include <vector>

#include "clpu/optim.hpp"
#include "clpu/series.hpp"
#include "clpu/time.hpp"

namespace clpu {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
  bool operator==(const ArimaOrder&) const = default;
};

struct ArimaModel {
  ArimaOrder order;
  DifferenceMode diff_mode = DifferenceMode::iterated_lag1;
  std::vector<double> phi;    ///< AR coefficients, length p
  std::vector<double> theta;  ///< MA coefficients, length q
  /// Mean of the differenced series, restored on forecast. Zero when d > 0
  /// so that (0,1,0) forecasts coincide exactly with the random walk.
  double intercept = 0.0;
  double sigma2 = 0.0;  ///< innovation variance, > 0 when converged
  /// Trailing window of one-step errors b(t) on the differenced scale,
  /// most recent last; length >= q.
  std::vector<double> residuals;
  Timestamp train_start = 0;
  Timestamp train_end = 0;
  int resolution_minutes = 15;
  bool converged = false;
  double loglik = 0.0;
};

struct ArimaxModel : ArimaModel {
  std::vector<double> beta;  ///< lagged-temperature coefficients, length p
  int exog_lags = 0;         ///< equals order.p
};

struct CumulativeForecast {
  Timestamp t0 = 0;                ///< outage start; per_step[0] covers [t0, t0 + delta)
  int delta_minutes = 15;
  std::vector<int> horizon_steps;  ///< r = 0..r_max
  std::vector<double> energy_kwh;  ///< energy_kwh[r] = sum of per_step[0..r]
  std::vector<double> per_step;    ///< per-interval forecasts, clamped at 0
};

struct FitOptions {
  OptimOptions optim;
  /// Warm-start coefficients; used instead of the conditional-least-squares
  /// initialization when sizes match the order.
  std::vector<double> phi0;
  std::vector<double> theta0;
};

/// Fits an ARIMA(p,d,q) model by exact Gaussian maximum likelihood on the
/// differenced series (state-space innovations filter, simplex optimizer,
/// conditional-least-squares start). Never throws on optimizer failure;
/// converged=false is the divergence signal.
ArimaModel fit(const EnergySeries& series, ArimaOrder order, const FitOptions& options = {});

/// Convenience overload over raw values.
ArimaModel fit(const std::vector<double>& values, ArimaOrder order, const FitOptions& options = {});

/// Recursive multi-step forecast of the next steps_ahead level values given
/// history (level scale, most recent last). Residuals are reconstructed from
/// the history by the one-step recursion with zero presample errors; future
/// shocks take their zero expectation. Outputs are clamped at 0.
std::vector<double> forecast_step(const ArimaModel& model, const std::vector<double>& history,
                                  int steps_ahead);

/// Cumulative foregone-energy predictor: energy_kwh[r] accumulates the
/// per-interval forecasts for j = 0..r (r + 1 intervals).
CumulativeForecast forecast_cumulative(const ArimaModel& model, const std::vector<double>& history,
                                       Timestamp t0, int r_max);

/// ARIMAX variant with p lagged exogenous temperature terms. Temperatures
/// are differenced to the model's d alongside the energy series. Collinear
/// regressors yield converged=false.
ArimaxModel fit_arimax(const EnergySeries& series, const std::vector<double>& temps, ArimaOrder order,
                       const FitOptions& options = {});

/// Forecast for the ARIMAX model; future temperatures are held at the last
/// observed value.
std::vector<double> forecast_step(const ArimaxModel& model, const std::vector<double>& history,
                                  const std::vector<double>& temps, int steps_ahead);

double mse(const std::vector<double>& actual, const std::vector<double>& predicted);

/// JSON persistence; coefficients carry 17 significant digits so a
/// round-trip reproduces forecasts to 1e-12.
void save_model(const ArimaModel& model, const std::string& path);
ArimaModel load_model(const std::string& path);

std::string to_json(const ArimaModel& model);
ArimaModel model_from_json(const std::string& text);

}  // namespace clpu
