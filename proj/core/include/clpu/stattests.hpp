#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clpu/series.hpp"

namespace clpu {

enum class CorrelogramKind { acf, pacf };

struct Correlogram {
  CorrelogramKind kind = CorrelogramKind::acf;
  int max_lag = 0;
  std::vector<double> values;        ///< index 0..max_lag; values[0] == 1
  std::vector<double> ci_halfwidth;  ///< per-lag band half-widths, > 0
  int n_significant = 0;             ///< lags h >= 1 with |values[h]| > ci_halfwidth[h]
};

struct AdfResult {
  double statistic = 0.0;
  int lag_order = 0;
  double crit_1pct = 0.0;
  double crit_5pct = 0.0;
  double crit_10pct = 0.0;
  bool stationary_at_5pct = false;  ///< statistic < crit_5pct
};

struct DSelection {
  int d = 0;
  /// False when no order up to d_max achieved stationarity and d_max was
  /// returned as a fallback.
  bool adequate = true;
};

/// Quantile of the standard normal distribution (Acklam's rational
/// approximation, |error| < 1.2e-8).
double normal_quantile(double p);

/// Sample autocorrelation up to max_lag. Band half-widths follow the
/// cumulative large-lag formula z * sqrt((1 + 2 * sum_{h=1..l} rho_h^2) / N),
/// with z the two-sided normal quantile for ci_level.
Correlogram acf(const std::vector<double>& series, int max_lag, double ci_level = 0.95);

/// Partial autocorrelation via the Durbin-Levinson recursion on the sample
/// autocorrelations. Band half-width is z / sqrt(N) at every lag.
Correlogram pacf(const std::vector<double>& series, int max_lag, double ci_level = 0.95);

/// Augmented Dickey-Fuller regression with constant and no trend:
///   dx_t = alpha + gamma * x_{t-1} + sum_{i=1..k} c_i * dx_{t-i} + e_t.
/// When lag_order is not given, k = floor(12 * (N/100)^0.25). Critical
/// values come from the constant-no-trend table, interpolated in N.
AdfResult adf_test(const std::vector<double>& series, std::optional<int> lag_order = std::nullopt);

/// Smallest d in [0, d_max] whose d-times lag-1-differenced series passes
/// the ADF test at 5%; d_max with adequate=false when none does.
DSelection select_d(const EnergySeries& series, int d_max = 2);
DSelection select_d(const std::vector<double>& values, int d_max = 2);

/// Writes a correlogram as CSV with columns lag, value, ci.
void write_correlogram_csv(const Correlogram& c, const std::string& path);

}  // namespace clpu
