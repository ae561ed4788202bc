#include "clpu/stattests.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "clpu/errors.hpp"

namespace clpu {

namespace {

double sample_mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool near_constant(const std::vector<double>& x) {
  const double mean = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss <= 1e-20 * static_cast<double>(x.size()) * (1.0 + mean * mean);
}

/// Plain sample autocorrelations rho_0..rho_max_lag (biased denominator).
std::vector<double> sample_acf(const std::vector<double>& x, int max_lag) {
  const auto n = static_cast<long>(x.size());
  const double mean = sample_mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) throw ConstantSeries("autocorrelation undefined for a constant series");
  std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 0.0);
  rho[0] = 1.0;
  for (int h = 1; h <= max_lag; ++h) {
    double num = 0.0;
    for (long t = h; t < n; ++t) num += (x[static_cast<std::size_t>(t)] - mean) * (x[static_cast<std::size_t>(t - h)] - mean);
    rho[static_cast<std::size_t>(h)] = num / denom;
  }
  return rho;
}

void check_lag(const std::vector<double>& series, int max_lag) {
  if (max_lag < 1) throw LagTooLarge("max_lag must be at least 1");
  if (static_cast<std::size_t>(max_lag) >= series.size())
    throw LagTooLarge("max_lag " + std::to_string(max_lag) + " requires more than " +
                      std::to_string(series.size()) + " observations");
}

int count_significant(const Correlogram& c) {
  int n = 0;
  for (int h = 1; h <= c.max_lag; ++h)
    if (std::abs(c.values[static_cast<std::size_t>(h)]) > c.ci_halfwidth[static_cast<std::size_t>(h)]) ++n;
  return n;
}

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  double sigma2 = 0.0;
};

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto qr = X.colPivHouseholderQr();
  if (qr.rank() < X.cols()) throw ConstantSeries("singular regressor matrix in ADF regression");
  OlsFit fit;
  fit.beta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * fit.beta;
  const auto dof = static_cast<double>(X.rows() - X.cols());
  fit.sigma2 = resid.squaredNorm() / dof;
  const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
  fit.se = (fit.sigma2 * xtx_inv.diagonal()).cwiseSqrt();
  return fit;
}

/// Dickey-Fuller critical values, constant and no trend, for sample sizes
/// 25, 50, 100, 250, 500 and the asymptotic limit.
constexpr double kAdfN[] = {25, 50, 100, 250, 500};
constexpr double kAdf1[] = {-3.75, -3.58, -3.51, -3.46, -3.44, -3.43};
constexpr double kAdf5[] = {-3.00, -2.93, -2.89, -2.88, -2.87, -2.86};
constexpr double kAdf10[] = {-2.63, -2.60, -2.58, -2.57, -2.57, -2.57};

double adf_crit(const double* row, double n) {
  if (n <= kAdfN[0]) return row[0];
  for (int i = 0; i < 4; ++i) {
    if (n <= kAdfN[i + 1]) {
      const double w = (n - kAdfN[i]) / (kAdfN[i + 1] - kAdfN[i]);
      return row[i] + w * (row[i + 1] - row[i]);
    }
  }
  // Beyond the last finite row interpolate against the asymptote in 1/n.
  const double w = (1.0 / kAdfN[4] - 1.0 / n) / (1.0 / kAdfN[4]);
  return row[4] + w * (row[5] - row[4]);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParams("normal_quantile requires p in (0, 1)");
  // Acklam's rational approximation, absolute error below 1.2e-8.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double q, r;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

Correlogram acf(const std::vector<double>& series, int max_lag, double ci_level) {
  check_lag(series, max_lag);
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InvalidParams("ci_level must be in (0, 1)");
  Correlogram c;
  c.kind = CorrelogramKind::acf;
  c.max_lag = max_lag;
  c.values = sample_acf(series, max_lag);
  const double z = normal_quantile(0.5 * (1.0 + ci_level));
  const auto n = static_cast<double>(series.size());
  c.ci_halfwidth.resize(c.values.size());
  double cum = 0.0;  // running sum of rho_h^2 through the current lag
  c.ci_halfwidth[0] = z / std::sqrt(n);
  for (int h = 1; h <= max_lag; ++h) {
    cum += c.values[static_cast<std::size_t>(h)] * c.values[static_cast<std::size_t>(h)];
    c.ci_halfwidth[static_cast<std::size_t>(h)] = z * std::sqrt((1.0 + 2.0 * cum) / n);
  }
  c.n_significant = count_significant(c);
  return c;
}

Correlogram pacf(const std::vector<double>& series, int max_lag, double ci_level) {
  check_lag(series, max_lag);
  if (2 * static_cast<std::size_t>(max_lag) >= series.size())
    throw LagTooLarge("PACF max_lag must be below half the series length");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw InvalidParams("ci_level must be in (0, 1)");
  const std::vector<double> rho = sample_acf(series, max_lag);

  Correlogram c;
  c.kind = CorrelogramKind::pacf;
  c.max_lag = max_lag;
  c.values.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
  c.values[0] = 1.0;

  // Durbin-Levinson: phi[j] holds phi_{k,j+1} for the current order k.
  std::vector<double> phi(static_cast<std::size_t>(max_lag), 0.0);
  std::vector<double> prev(static_cast<std::size_t>(max_lag), 0.0);
  double v = 1.0;  // prediction error variance ratio
  phi[0] = rho[1];
  c.values[1] = rho[1];
  v *= 1.0 - rho[1] * rho[1];
  for (int k = 2; k <= max_lag; ++k) {
    std::copy(phi.begin(), phi.begin() + (k - 1), prev.begin());
    double num = rho[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) num -= prev[static_cast<std::size_t>(j - 1)] * rho[static_cast<std::size_t>(k - j)];
    const double pkk = (v > 1e-12) ? num / v : 0.0;
    c.values[static_cast<std::size_t>(k)] = pkk;
    for (int j = 1; j < k; ++j)
      phi[static_cast<std::size_t>(j - 1)] =
          prev[static_cast<std::size_t>(j - 1)] - pkk * prev[static_cast<std::size_t>(k - 1 - j)];
    phi[static_cast<std::size_t>(k - 1)] = pkk;
    v *= 1.0 - pkk * pkk;
    if (v < 0.0) v = 0.0;
  }

  const double z = normal_quantile(0.5 * (1.0 + ci_level));
  const double hw = z / std::sqrt(static_cast<double>(series.size()));
  c.ci_halfwidth.assign(c.values.size(), hw);
  c.n_significant = count_significant(c);
  return c;
}

AdfResult adf_test(const std::vector<double>& series, std::optional<int> lag_order) {
  const auto n = static_cast<long>(series.size());
  if (near_constant(series)) throw ConstantSeries("ADF test undefined for a constant series");

  int k;
  if (lag_order) {
    k = *lag_order;
    if (k < 0) throw InvalidParams("ADF lag order must be non-negative");
    if (n < 20 + k)
      throw TooShort("ADF test with lag order " + std::to_string(k) + " needs at least " +
                     std::to_string(20 + k) + " observations, got " + std::to_string(n));
  } else {
    if (n < 20) throw TooShort("ADF test needs at least 20 observations, got " + std::to_string(n));
    k = static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    while (k > 0 && n < 20 + k) --k;
  }
  // Keep enough residual degrees of freedom for the t statistic.
  while (k > 0 && n - 1 - k < k + 2 + 5) --k;
  const long rows = n - 1 - k;
  if (rows < 4) throw TooShort("ADF regression has too few usable rows");

  std::vector<double> dx(static_cast<std::size_t>(n - 1));
  for (long t = 1; t < n; ++t)
    dx[static_cast<std::size_t>(t - 1)] = series[static_cast<std::size_t>(t)] - series[static_cast<std::size_t>(t - 1)];

  Eigen::MatrixXd X(rows, 2 + k);
  Eigen::VectorXd y(rows);
  for (long i = 0; i < rows; ++i) {
    const long t = i + k + 1;  // index into the level series
    y(i) = dx[static_cast<std::size_t>(t - 1)];
    X(i, 0) = 1.0;
    X(i, 1) = series[static_cast<std::size_t>(t - 1)];
    for (int j = 1; j <= k; ++j) X(i, 1 + j) = dx[static_cast<std::size_t>(t - 1 - j)];
  }

  const OlsFit fit = ols(X, y);
  AdfResult r;
  r.statistic = fit.beta(1) / fit.se(1);
  r.lag_order = k;
  const auto nn = static_cast<double>(n);
  r.crit_1pct = adf_crit(kAdf1, nn);
  r.crit_5pct = adf_crit(kAdf5, nn);
  r.crit_10pct = adf_crit(kAdf10, nn);
  r.stationary_at_5pct = r.statistic < r.crit_5pct;
  return r;
}

DSelection select_d(const std::vector<double>& values, int d_max) {
  if (d_max < 0) throw InvalidParams("d_max must be non-negative");
  std::vector<double> x = values;
  for (int d = 0; d <= d_max; ++d) {
    if (d > 0) {
      std::vector<double> next(x.size() - 1);
      for (std::size_t t = 1; t < x.size(); ++t) next[t - 1] = x[t] - x[t - 1];
      x = std::move(next);
    }
    // A (near) constant series is degenerate but stationary; the ADF
    // regression would be singular on it.
    if (near_constant(x)) return {d, true};
    if (adf_test(x).stationary_at_5pct) return {d, true};
  }
  return {d_max, false};
}

DSelection select_d(const EnergySeries& series, int d_max) { return select_d(series.values, d_max); }

void write_correlogram_csv(const Correlogram& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "lag,value,ci\n";
  char buf[128];
  for (int h = 0; h <= c.max_lag; ++h) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g\n", h, c.values[static_cast<std::size_t>(h)],
                  c.ci_halfwidth[static_cast<std::size_t>(h)]);
    out << buf;
  }
}

}  // namespace clpu
