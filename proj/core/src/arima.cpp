#include "clpu/arima.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "clpu/errors.hpp"

namespace clpu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
/// Floor for the innovation variance of degenerate (perfect-fit) series so
/// converged models always carry sigma2 > 0.
constexpr double kSigmaFloor = 1e-12;

// ---------------------------------------------------------------------------
// Stationarity-preserving parameterization: unconstrained reals map through
// tanh to partial autocorrelations and through the Durbin-Levinson step-up
// to AR coefficients whose polynomial has all roots outside the unit circle.
// MA coefficients reuse the same map with a sign flip, which enforces
// invertibility.

std::vector<double> pacf_to_ar(const std::vector<double>& pac) {
  const std::size_t k = pac.size();
  std::vector<double> a(k, 0.0);
  std::vector<double> prev(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::copy(a.begin(), a.begin() + static_cast<long>(j), prev.begin());
    a[j] = pac[j];
    for (std::size_t i = 0; i < j; ++i) a[i] = prev[i] - pac[j] * prev[j - 1 - i];
  }
  return a;
}

bool ar_to_pacf(std::vector<double> a, std::vector<double>& pac) {
  const auto k = static_cast<long>(a.size());
  pac.assign(a.size(), 0.0);
  for (long j = k - 1; j >= 0; --j) {
    const double r = a[static_cast<std::size_t>(j)];
    if (!(std::abs(r) < 1.0)) return false;
    pac[static_cast<std::size_t>(j)] = r;
    const double denom = 1.0 - r * r;
    std::vector<double> prev(static_cast<std::size_t>(j));
    for (long i = 0; i < j; ++i)
      prev[static_cast<std::size_t>(i)] =
          (a[static_cast<std::size_t>(i)] + r * a[static_cast<std::size_t>(j - 1 - i)]) / denom;
    std::copy(prev.begin(), prev.end(), a.begin());
  }
  return true;
}

void decode_params(const std::vector<double>& x, int p, int q, std::vector<double>& phi,
                   std::vector<double>& theta) {
  std::vector<double> pac(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) pac[static_cast<std::size_t>(i)] = std::tanh(x[static_cast<std::size_t>(i)]);
  phi = pacf_to_ar(pac);
  pac.assign(static_cast<std::size_t>(q), 0.0);
  for (int j = 0; j < q; ++j) pac[static_cast<std::size_t>(j)] = std::tanh(x[static_cast<std::size_t>(p + j)]);
  theta = pacf_to_ar(pac);
  for (double& t : theta) t = -t;
}

double safe_atanh(double r) {
  const double c = std::clamp(r, -0.999999, 0.999999);
  return 0.5 * std::log((1.0 + c) / (1.0 - c));
}

/// Maps (phi, theta) into the unconstrained space, shrinking toward zero
/// until the coefficients are inside the stationary/invertible region.
std::vector<double> encode_params(std::vector<double> phi, std::vector<double> theta) {
  std::vector<double> pac;
  for (int tries = 0; tries < 60 && !ar_to_pacf(phi, pac); ++tries)
    for (double& v : phi) v *= 0.95;
  if (!ar_to_pacf(phi, pac)) pac.assign(phi.size(), 0.0);
  std::vector<double> x;
  x.reserve(phi.size() + theta.size());
  for (double r : pac) x.push_back(safe_atanh(r));

  std::vector<double> a(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) a[j] = -theta[j];
  std::vector<double> pac_ma;
  for (int tries = 0; tries < 60 && !ar_to_pacf(a, pac_ma); ++tries)
    for (double& v : a) v *= 0.95;
  if (!ar_to_pacf(a, pac_ma)) pac_ma.assign(a.size(), 0.0);
  for (double r : pac_ma) x.push_back(safe_atanh(r));
  return x;
}

// ---------------------------------------------------------------------------
// Kalman filter on the Harvey state-space form of an ARMA(p, q) process with
// unit innovation variance (sigma2 concentrated out of the likelihood).

struct FilterRun {
  double sum_log_f = 0.0;
  double sum_v2f = 0.0;  ///< sum of v_t^2 / F_t
  long n = 0;
  std::vector<double> innovations;  ///< one-step errors v_t when requested
  std::vector<double> fs;           ///< prediction variances F_t when requested
};

class ArmaFilter {
 public:
  ArmaFilter(const std::vector<double>& phi, const std::vector<double>& theta) {
    const auto p = static_cast<int>(phi.size());
    const auto q = static_cast<int>(theta.size());
    r_ = std::max(p, q + 1);
    phi_.assign(static_cast<std::size_t>(r_), 0.0);
    for (int i = 0; i < p; ++i) phi_[static_cast<std::size_t>(i)] = phi[static_cast<std::size_t>(i)];
    Eigen::VectorXd R = Eigen::VectorXd::Zero(r_);
    R(0) = 1.0;
    for (int j = 0; j < q; ++j) R(j + 1) = theta[static_cast<std::size_t>(j)];
    rrt_ = R * R.transpose();

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(r_, r_);
    for (int i = 0; i < r_; ++i) {
      T(i, 0) = phi_[static_cast<std::size_t>(i)];
      if (i + 1 < r_) T(i, i + 1) = 1.0;
    }
    T_ = T;

    // Stationary state covariance: solve P = T P T' + R R' via vectorization.
    const int n2 = r_ * r_;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n2, n2);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < r_; ++j)
        for (int k = 0; k < r_; ++k)
          for (int l = 0; l < r_; ++l) A(i + r_ * j, k + r_ * l) -= T(i, k) * T(j, l);
    Eigen::VectorXd vec_rrt(n2);
    for (int j = 0; j < r_; ++j)
      for (int i = 0; i < r_; ++i) vec_rrt(i + r_ * j) = rrt_(i, j);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) return;
    const Eigen::VectorXd vec_p = lu.solve(vec_rrt);
    p0_.resize(r_, r_);
    for (int j = 0; j < r_; ++j)
      for (int i = 0; i < r_; ++i) p0_(i, j) = vec_p(i + r_ * j);
    if (!p0_.allFinite()) return;
    valid_ = true;
  }

  bool valid() const { return valid_; }

  /// T * a exploiting the companion structure (first column + superdiagonal).
  Eigen::VectorXd advance(const Eigen::VectorXd& a) const {
    Eigen::VectorXd out(r_);
    for (int i = 0; i < r_; ++i)
      out(i) = phi_[static_cast<std::size_t>(i)] * a(0) + (i + 1 < r_ ? a(i + 1) : 0.0);
    return out;
  }

  bool run(const std::vector<double>& y, FilterRun& out, bool want_innovations) const {
    if (!valid_) return false;
    const auto n = static_cast<long>(y.size());
    Eigen::VectorXd a = Eigen::VectorXd::Zero(r_);
    Eigen::MatrixXd P = p0_;
    Eigen::VectorXd K(r_);
    out = FilterRun{};
    out.n = n;
    if (want_innovations) {
      out.innovations.resize(static_cast<std::size_t>(n));
      out.fs.resize(static_cast<std::size_t>(n));
    }

    bool steady = false;
    double f = 0.0;
    for (long t = 0; t < n; ++t) {
      if (!steady) {
        f = P(0, 0);
        if (!(f > 1e-12) || !std::isfinite(f)) return false;
        K = advance(P.col(0)) / f;
        const Eigen::MatrixXd TP = T_ * P;
        Eigen::MatrixXd P_next = TP * T_.transpose() - (K * K.transpose()) * f + rrt_;
        // The filter reaches a steady state quickly for invertible models;
        // freeze the gain once P stops changing to cut the per-step cost.
        if ((P_next - P).cwiseAbs().maxCoeff() < 1e-13) steady = true;
        P = std::move(P_next);
      }
      const double v = y[static_cast<std::size_t>(t)] - a(0);
      out.sum_log_f += std::log(f);
      out.sum_v2f += v * v / f;
      if (want_innovations) {
        out.innovations[static_cast<std::size_t>(t)] = v;
        out.fs[static_cast<std::size_t>(t)] = f;
      }
      a = advance(a) + K * v;
    }
    return std::isfinite(out.sum_log_f) && std::isfinite(out.sum_v2f);
  }

 private:
  int r_ = 0;
  std::vector<double> phi_;  ///< padded to length r_
  Eigen::MatrixXd T_, rrt_, p0_;
  bool valid_ = false;
};

/// Concentrated Gaussian log-likelihood from a filter pass.
double concentrated_loglik(const FilterRun& run, double& sigma2_out) {
  const auto n = static_cast<double>(run.n);
  sigma2_out = std::max(run.sum_v2f / n, kSigmaFloor);
  return -0.5 * n * (kLog2Pi + 1.0 + std::log(sigma2_out)) - 0.5 * run.sum_log_f;
}

// ---------------------------------------------------------------------------
// Conditional-least-squares starting values (Hannan-Rissanen).

std::vector<double> yule_walker_ar(const std::vector<double>& z, int order) {
  // Durbin-Levinson on the sample autocovariances.
  const auto n = static_cast<long>(z.size());
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(n);
  std::vector<double> gamma(static_cast<std::size_t>(order) + 1, 0.0);
  for (int h = 0; h <= order; ++h) {
    double s = 0.0;
    for (long t = h; t < n; ++t)
      s += (z[static_cast<std::size_t>(t)] - mean) * (z[static_cast<std::size_t>(t - h)] - mean);
    gamma[static_cast<std::size_t>(h)] = s / static_cast<double>(n);
  }
  if (gamma[0] <= 0.0) return std::vector<double>(static_cast<std::size_t>(order), 0.0);

  std::vector<double> a(static_cast<std::size_t>(order), 0.0), prev(static_cast<std::size_t>(order), 0.0);
  double v = gamma[0];
  for (int k = 1; k <= order; ++k) {
    std::copy(a.begin(), a.begin() + (k - 1), prev.begin());
    double num = gamma[static_cast<std::size_t>(k)];
    for (int j = 1; j < k; ++j) num -= prev[static_cast<std::size_t>(j - 1)] * gamma[static_cast<std::size_t>(k - j)];
    const double pkk = (v > 1e-300) ? num / v : 0.0;
    a[static_cast<std::size_t>(k - 1)] = pkk;
    for (int j = 1; j < k; ++j)
      a[static_cast<std::size_t>(j - 1)] =
          prev[static_cast<std::size_t>(j - 1)] - pkk * prev[static_cast<std::size_t>(k - 1 - j)];
    v *= 1.0 - pkk * pkk;
    if (v < 0.0) v = 0.0;
  }
  return a;
}

void css_start(const std::vector<double>& z, int p, int q, std::vector<double>& phi0,
               std::vector<double>& theta0) {
  phi0.assign(static_cast<std::size_t>(p), 0.0);
  theta0.assign(static_cast<std::size_t>(q), 0.0);
  const auto n = static_cast<long>(z.size());
  try {
    if (q == 0) {
      phi0 = yule_walker_ar(z, p);
      return;
    }
    const int m = std::max(p + q, std::min(static_cast<int>(n) / 4, std::max(20, 2 * (p + q))));
    const std::vector<double> ar_long = yule_walker_ar(z, m);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (long t = m; t < n; ++t) {
      double pred = 0.0;
      for (int i = 1; i <= m; ++i) pred += ar_long[static_cast<std::size_t>(i - 1)] * z[static_cast<std::size_t>(t - i)];
      e[static_cast<std::size_t>(t)] = z[static_cast<std::size_t>(t)] - pred;
    }
    const long first = m + q;
    const long rows = n - first;
    if (rows < p + q + 5) return;  // keep the zero start
    Eigen::MatrixXd X(rows, p + q);
    Eigen::VectorXd y(rows);
    for (long i = 0; i < rows; ++i) {
      const long t = first + i;
      y(i) = z[static_cast<std::size_t>(t)];
      for (int j = 1; j <= p; ++j) X(i, j - 1) = z[static_cast<std::size_t>(t - j)];
      for (int j = 1; j <= q; ++j) X(i, p + j - 1) = e[static_cast<std::size_t>(t - j)];
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    if (!beta.allFinite()) return;
    for (int i = 0; i < p; ++i) phi0[static_cast<std::size_t>(i)] = beta(i);
    for (int j = 0; j < q; ++j) theta0[static_cast<std::size_t>(j)] = beta(p + j);
  } catch (const Error&) {
    phi0.assign(static_cast<std::size_t>(p), 0.0);
    theta0.assign(static_cast<std::size_t>(q), 0.0);
  }
}

// ---------------------------------------------------------------------------

void check_order(ArimaOrder order) {
  if (order.p < 0 || order.q < 0 || order.d < 0 || order.p > 12 || order.q > 12 || order.d > 2)
    throw OrderOutOfBounds("order (" + std::to_string(order.p) + "," + std::to_string(order.d) + "," +
                           std::to_string(order.q) + ") outside supported bounds p,q in [0,12], d in [0,2]");
}

std::vector<double> diff_values(const std::vector<double>& x, int d, DifferenceMode mode) {
  return difference(x, d, mode).values;
}

/// Residual trailing window kept on fitted models.
std::vector<double> tail_window(const std::vector<double>& v, std::size_t q) {
  const std::size_t keep = std::min(v.size(), std::max<std::size_t>(q, 48));
  return {v.end() - static_cast<long>(keep), v.end()};
}

struct Prepared {
  std::vector<double> z;  ///< differenced and centered
  double mu = 0.0;
};

Prepared prepare(const std::vector<double>& values, ArimaOrder order, DifferenceMode mode) {
  Prepared out;
  std::vector<double> w = diff_values(values, order.d, mode);
  // The intercept models the mean of the differenced series; with d > 0 it
  // is pinned at zero so (0,1,0) coincides exactly with the random walk.
  if (order.d == 0) out.mu = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  out.z = std::move(w);
  for (double& v : out.z) v -= out.mu;
  return out;
}

ArimaModel fit_impl(const std::vector<double>& values, Timestamp start, int resolution_minutes,
                    ArimaOrder order, const FitOptions& options) {
  check_order(order);
  const auto n_levels = static_cast<long>(values.size());
  const long need = std::max<long>(50, 10L * (order.p + order.q + 1)) + order.d;
  if (n_levels < need)
    throw SeriesTooShort("ARIMA(" + std::to_string(order.p) + "," + std::to_string(order.d) + "," +
                         std::to_string(order.q) + ") needs " + std::to_string(need) + " observations, got " +
                         std::to_string(n_levels));

  ArimaModel m;
  m.order = order;
  m.resolution_minutes = resolution_minutes;
  m.train_start = start;
  m.train_end = start + n_levels * resolution_minutes * 60;

  const Prepared prep = prepare(values, order, m.diff_mode);
  const std::vector<double>& z = prep.z;
  m.intercept = prep.mu;
  const auto n = static_cast<double>(z.size());

  if (order.p == 0 && order.q == 0) {
    double ss = 0.0;
    for (double v : z) ss += v * v;
    m.sigma2 = std::max(ss / n, kSigmaFloor);
    m.loglik = -0.5 * n * (kLog2Pi + 1.0 + std::log(m.sigma2));
    m.residuals = tail_window(z, 0);
    m.converged = true;
    return m;
  }

  std::vector<double> phi0, theta0;
  if (static_cast<int>(options.phi0.size()) == order.p && static_cast<int>(options.theta0.size()) == order.q &&
      (order.p + order.q) > 0) {
    phi0 = options.phi0;
    theta0 = options.theta0;
  } else {
    css_start(z, order.p, order.q, phi0, theta0);
  }
  const std::vector<double> x0 = encode_params(phi0, theta0);

  const auto objective = [&](const std::vector<double>& x) -> double {
    std::vector<double> phi, theta;
    decode_params(x, order.p, order.q, phi, theta);
    const ArmaFilter filter(phi, theta);
    FilterRun run;
    if (!filter.run(z, run, false)) return kInf;
    double s2 = 0.0;
    return -concentrated_loglik(run, s2);
  };

  const OptimResult opt = nelder_mead(objective, x0, options.optim);
  decode_params(opt.x, order.p, order.q, m.phi, m.theta);

  const ArmaFilter filter(m.phi, m.theta);
  FilterRun run;
  if (filter.run(z, run, true)) {
    m.loglik = concentrated_loglik(run, m.sigma2);
    m.residuals = tail_window(run.innovations, static_cast<std::size_t>(order.q));
    m.converged = opt.converged && std::isfinite(m.loglik) && m.sigma2 > 0.0;
  } else {
    m.loglik = -kInf;
    m.sigma2 = 0.0;
    m.residuals.assign(static_cast<std::size_t>(std::max(order.q, 1)), 0.0);
    m.converged = false;
  }
  return m;
}

}  // namespace

ArimaModel fit(const EnergySeries& series, ArimaOrder order, const FitOptions& options) {
  return fit_impl(series.values, series.start_time, series.resolution_minutes, order, options);
}

ArimaModel fit(const std::vector<double>& values, ArimaOrder order, const FitOptions& options) {
  return fit_impl(values, 0, 15, order, options);
}

namespace {

// Shared forecasting core: CSS residual reconstruction over the differenced
// history, recursive mean prediction with future shocks at zero, then
// integration back to the level scale. exog[t] is an optional known additive
// term on the differenced scale, covering history and horizon.
std::vector<double> forecast_core(const ArimaModel& m, const std::vector<double>& history, int steps_ahead,
                                  const std::vector<double>* exog) {
  if (steps_ahead < 0) throw InvalidParams("steps_ahead must be non-negative");
  const int p = m.order.p, d = m.order.d, q = m.order.q;
  if (static_cast<long>(history.size()) < p + d)
    throw InsufficientHistory("forecast needs at least p + d = " + std::to_string(p + d) +
                              " observations, got " + std::to_string(history.size()));
  if (steps_ahead == 0) return {};

  std::vector<double> z = diff_values(history, d, m.diff_mode);
  for (double& v : z) v -= m.intercept;
  const auto nz = static_cast<long>(z.size());
  auto ex = [&](long t) -> double {
    if (exog == nullptr) return 0.0;
    return (t >= 0 && t < static_cast<long>(exog->size())) ? (*exog)[static_cast<std::size_t>(t)] : 0.0;
  };

  // One-step errors over the history, zero presample convention.
  std::vector<double> b(z.size(), 0.0);
  for (long t = 0; t < nz; ++t) {
    double pred = ex(t);
    for (int i = 1; i <= p && t - i >= 0; ++i)
      pred += m.phi[static_cast<std::size_t>(i - 1)] * z[static_cast<std::size_t>(t - i)];
    for (int j = 1; j <= q && t - j >= 0; ++j)
      pred += m.theta[static_cast<std::size_t>(j - 1)] * b[static_cast<std::size_t>(t - j)];
    b[static_cast<std::size_t>(t)] = z[static_cast<std::size_t>(t)] - pred;
  }

  std::vector<double> zext = z;
  std::vector<double> bext = b;
  zext.reserve(z.size() + static_cast<std::size_t>(steps_ahead));
  bext.reserve(b.size() + static_cast<std::size_t>(steps_ahead));
  for (int s = 1; s <= steps_ahead; ++s) {
    const long t = nz + s - 1;
    double pred = ex(t);
    for (int i = 1; i <= p; ++i) {
      const long idx = t - i;
      if (idx >= 0) pred += m.phi[static_cast<std::size_t>(i - 1)] * zext[static_cast<std::size_t>(idx)];
    }
    for (int j = 1; j <= q; ++j) {
      const long idx = t - j;
      // Future shocks keep their zero expectation; bext holds 0 there.
      if (idx >= 0) pred += m.theta[static_cast<std::size_t>(j - 1)] * bext[static_cast<std::size_t>(idx)];
    }
    zext.push_back(pred);
    bext.push_back(0.0);
  }

  // Back to the level scale. The recursion below runs on unclamped values to
  // keep the linear-model identities; only the returned levels are clamped.
  std::vector<double> levels = history;
  levels.reserve(history.size() + static_cast<std::size_t>(steps_ahead));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps_ahead));
  const auto nh = static_cast<long>(history.size());
  for (int s = 1; s <= steps_ahead; ++s) {
    const double w = zext[static_cast<std::size_t>(nz + s - 1)] + m.intercept;
    const long t = nh + s - 1;  // index of the forecast level
    double x;
    if (d == 0) {
      x = w;
    } else if (m.diff_mode == DifferenceMode::single_lag_d) {
      x = w + levels[static_cast<std::size_t>(t - d)];
    } else {
      // Invert the iterated lag-1 difference: x_t = w + sum of binomial
      // terms of the d previous levels (d <= 2 in practice).
      x = w;
      double binom = 1.0;
      for (int i = 1; i <= d; ++i) {
        binom = binom * static_cast<double>(d - i + 1) / static_cast<double>(i);
        const double sign = (i % 2 == 1) ? 1.0 : -1.0;
        x += sign * binom * levels[static_cast<std::size_t>(t - i)];
      }
    }
    levels.push_back(x);
    out.push_back(std::max(0.0, x));
  }
  return out;
}

}  // namespace

std::vector<double> forecast_step(const ArimaModel& model, const std::vector<double>& history,
                                  int steps_ahead) {
  return forecast_core(model, history, steps_ahead, nullptr);
}

CumulativeForecast forecast_cumulative(const ArimaModel& model, const std::vector<double>& history,
                                       Timestamp t0, int r_max) {
  if (r_max < 0) throw InvalidParams("r_max must be non-negative");
  CumulativeForecast fc;
  fc.t0 = t0;
  fc.delta_minutes = model.resolution_minutes;
  fc.per_step = forecast_step(model, history, r_max + 1);
  fc.horizon_steps.resize(static_cast<std::size_t>(r_max) + 1);
  fc.energy_kwh.resize(static_cast<std::size_t>(r_max) + 1);
  double cum = 0.0;
  for (int r = 0; r <= r_max; ++r) {
    fc.horizon_steps[static_cast<std::size_t>(r)] = r;
    cum += fc.per_step[static_cast<std::size_t>(r)];
    fc.energy_kwh[static_cast<std::size_t>(r)] = cum;
  }
  return fc;
}

// ---------------------------------------------------------------------------
// ARIMAX: the ARIMA equation extended with p lagged temperature terms.
// Estimation profiles beta out of the likelihood: for fixed (phi, theta) the
// exogenous effect enters linearly, so filtering the AR-prefiltered regressor
// columns yields a weighted least-squares problem in beta.

namespace {

/// psi_t = sum_i phi_i psi_{t-i} + src_t with zero presample: the AR-inverse
/// filter applied to an input column.
std::vector<double> ar_prefilter(const std::vector<double>& src, const std::vector<double>& phi) {
  std::vector<double> psi(src.size(), 0.0);
  const auto p = static_cast<int>(phi.size());
  for (long t = 0; t < static_cast<long>(src.size()); ++t) {
    double v = src[static_cast<std::size_t>(t)];
    for (int i = 1; i <= p && t - i >= 0; ++i)
      v += phi[static_cast<std::size_t>(i - 1)] * psi[static_cast<std::size_t>(t - i)];
    psi[static_cast<std::size_t>(t)] = v;
  }
  return psi;
}

/// Lagged copy on the differenced scale: col[t] = u[t - lag], zero presample.
std::vector<double> lag_column(const std::vector<double>& u, int lag) {
  std::vector<double> col(u.size(), 0.0);
  for (long t = lag; t < static_cast<long>(u.size()); ++t)
    col[static_cast<std::size_t>(t)] = u[static_cast<std::size_t>(t - lag)];
  return col;
}

}  // namespace

ArimaxModel fit_arimax(const EnergySeries& series, const std::vector<double>& temps, ArimaOrder order,
                       const FitOptions& options) {
  check_order(order);
  if (temps.size() != series.values.size())
    throw LengthMismatch("temperature series length " + std::to_string(temps.size()) +
                         " does not match energy series length " + std::to_string(series.values.size()));
  const long need = std::max<long>(50, 10L * (order.p + order.q + 1)) + order.d;
  if (static_cast<long>(series.size()) < need)
    throw SeriesTooShort("ARIMAX fit needs " + std::to_string(need) + " observations");

  ArimaxModel m;
  m.order = order;
  m.exog_lags = order.p;
  m.resolution_minutes = series.resolution_minutes;
  m.train_start = series.start_time;
  m.train_end = series.end_time();

  const Prepared prep = prepare(series.values, order, m.diff_mode);
  const std::vector<double>& z = prep.z;
  m.intercept = prep.mu;

  // Temperatures are differenced alongside the energy series (and centered
  // when no differencing applies) so both sides live on the same scale.
  std::vector<double> u = diff_values(temps, order.d, m.diff_mode);
  if (order.d == 0) {
    const double umean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
    for (double& v : u) v -= umean;
  }

  const int p = order.p, q = order.q;
  const auto n = static_cast<long>(z.size());
  const double nd = static_cast<double>(n);

  if (p == 0) {
    // No exogenous lags; identical to the univariate fit.
    const ArimaModel base = fit_impl(series.values, series.start_time, series.resolution_minutes, order, options);
    static_cast<ArimaModel&>(m) = base;
    m.beta.clear();
    m.exog_lags = 0;
    return m;
  }

  std::vector<std::vector<double>> cols(static_cast<std::size_t>(p));
  for (int i = 1; i <= p; ++i) cols[static_cast<std::size_t>(i - 1)] = lag_column(u, i);

  const bool exog_all_zero = [&] {
    for (const auto& c : cols)
      for (double v : c)
        if (std::abs(v) > 1e-12) return false;
    return true;
  }();

  if (exog_all_zero) {
    // Zero regressors carry no information; the minimum-norm solution is
    // beta = 0 and the model collapses to the univariate one.
    const ArimaModel base = fit_impl(series.values, series.start_time, series.resolution_minutes, order, options);
    static_cast<ArimaModel&>(m) = base;
    m.beta.assign(static_cast<std::size_t>(p), 0.0);
    return m;
  }

  // Collinearity screen on the conditional design matrix [z lags | u lags]:
  // rank deficiency means (phi, beta) are jointly unidentified.
  {
    const long first = p;
    const long rows = n - first;
    Eigen::MatrixXd D(rows, 2 * p);
    for (long i = 0; i < rows; ++i) {
      const long t = first + i;
      for (int j = 1; j <= p; ++j) {
        D(i, j - 1) = z[static_cast<std::size_t>(t - j)];
        D(i, p + j - 1) = cols[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(t)];
      }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    qr.setThreshold(1e-8);
    if (qr.rank() < 2 * p) {
      m.converged = false;
      m.phi.assign(static_cast<std::size_t>(p), 0.0);
      m.theta.assign(static_cast<std::size_t>(q), 0.0);
      m.beta.assign(static_cast<std::size_t>(p), 0.0);
      m.sigma2 = 0.0;
      m.loglik = -kInf;
      m.residuals.assign(static_cast<std::size_t>(std::max(q, 1)), 0.0);
      return m;
    }
  }

  std::vector<double> phi0, theta0;
  css_start(z, p, q, phi0, theta0);
  const std::vector<double> x0 = encode_params(phi0, theta0);

  // For fixed (phi, theta) the innovations of z - sum_i beta_i psi_i are
  // v_z - sum_i beta_i v_{psi_i} by linearity of the filter, so beta is
  // profiled out by generalized least squares with weights 1/F_t.
  const auto evaluate = [&](const std::vector<double>& x, Eigen::VectorXd* beta_out,
                            std::vector<double>* resid_out, double* sigma2_out,
                            double* loglik_out) -> double {
    std::vector<double> phi, theta;
    decode_params(x, p, q, phi, theta);
    const ArmaFilter filter(phi, theta);
    FilterRun zrun;
    if (!filter.run(z, zrun, true)) return kInf;

    Eigen::MatrixXd Vw(n, p);
    Eigen::VectorXd yw(n);
    FilterRun crun;
    for (int c = 0; c < p; ++c) {
      const std::vector<double> psi = ar_prefilter(cols[static_cast<std::size_t>(c)], phi);
      if (!filter.run(psi, crun, true)) return kInf;
      for (long t = 0; t < n; ++t)
        Vw(t, c) = crun.innovations[static_cast<std::size_t>(t)] /
                   std::sqrt(zrun.fs[static_cast<std::size_t>(t)]);
    }
    for (long t = 0; t < n; ++t)
      yw(t) = zrun.innovations[static_cast<std::size_t>(t)] / std::sqrt(zrun.fs[static_cast<std::size_t>(t)]);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Vw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd beta = svd.solve(yw);
    if (!beta.allFinite()) return kInf;

    const Eigen::VectorXd ew = yw - Vw * beta;
    const double s2 = std::max(ew.squaredNorm() / nd, kSigmaFloor);
    const double ll = -0.5 * nd * (kLog2Pi + 1.0 + std::log(s2)) - 0.5 * zrun.sum_log_f;
    if (!std::isfinite(ll)) return kInf;
    if (beta_out != nullptr) *beta_out = beta;
    if (sigma2_out != nullptr) *sigma2_out = s2;
    if (loglik_out != nullptr) *loglik_out = ll;
    if (resid_out != nullptr) {
      resid_out->resize(static_cast<std::size_t>(n));
      for (long t = 0; t < n; ++t)
        (*resid_out)[static_cast<std::size_t>(t)] =
            ew(t) * std::sqrt(zrun.fs[static_cast<std::size_t>(t)]);
    }
    return -ll;
  };

  const auto objective = [&](const std::vector<double>& x) {
    return evaluate(x, nullptr, nullptr, nullptr, nullptr);
  };
  const OptimResult opt = nelder_mead(objective, x0, options.optim);

  decode_params(opt.x, p, q, m.phi, m.theta);
  Eigen::VectorXd beta_final = Eigen::VectorXd::Zero(p);
  std::vector<double> resid;
  double sigma2 = 0.0, loglik = 0.0;
  const double neg_ll = evaluate(opt.x, &beta_final, &resid, &sigma2, &loglik);
  if (std::isfinite(neg_ll)) {
    m.loglik = loglik;
    m.sigma2 = sigma2;
    m.residuals = tail_window(resid, static_cast<std::size_t>(q));
    m.converged = opt.converged && m.sigma2 > 0.0;
  } else {
    m.loglik = -kInf;
    m.sigma2 = 0.0;
    m.residuals.assign(static_cast<std::size_t>(std::max(q, 1)), 0.0);
    m.converged = false;
  }
  m.beta.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) m.beta[static_cast<std::size_t>(i)] = beta_final(i);
  return m;
}

std::vector<double> forecast_step(const ArimaxModel& model, const std::vector<double>& history,
                                  const std::vector<double>& temps, int steps_ahead) {
  if (temps.size() != history.size())
    throw LengthMismatch("temperature history length does not match energy history length");
  if (model.beta.empty()) return forecast_step(static_cast<const ArimaModel&>(model), history, steps_ahead);

  // Extend temperatures by persistence, difference, and fold the exogenous
  // term into the shared forecast recursion.
  std::vector<double> temps_ext = temps;
  const double last_temp = temps.empty() ? 0.0 : temps.back();
  for (int s = 0; s < steps_ahead; ++s) temps_ext.push_back(last_temp);
  std::vector<double> u = difference(temps_ext, model.order.d, model.diff_mode).values;
  if (model.order.d == 0) {
    // Match the centering used at fit time over the training span only.
    const double umean =
        std::accumulate(u.begin(), u.end() - steps_ahead, 0.0) / static_cast<double>(u.size() - static_cast<std::size_t>(steps_ahead));
    for (double& v : u) v -= umean;
  }
  std::vector<double> exog(u.size(), 0.0);
  for (long t = 0; t < static_cast<long>(u.size()); ++t) {
    double v = 0.0;
    for (int i = 1; i <= model.exog_lags && t - i >= 0; ++i)
      v += model.beta[static_cast<std::size_t>(i - 1)] * u[static_cast<std::size_t>(t - i)];
    exog[static_cast<std::size_t>(t)] = v;
  }
  return forecast_core(model, history, steps_ahead, &exog);
}

double mse(const std::vector<double>& actual, const std::vector<double>& predicted) {
  if (actual.empty()) throw EmptyInput("mse needs at least one observation");
  if (actual.size() != predicted.size())
    throw LengthMismatch("mse inputs differ in length: " + std::to_string(actual.size()) + " vs " +
                         std::to_string(predicted.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    s += e * e;
  }
  return s / static_cast<double>(actual.size());
}

// ---------------------------------------------------------------------------
// Persistence.

std::string to_json(const ArimaModel& m) {
  nlohmann::json j;
  j["order"] = {{"p", m.order.p}, {"d", m.order.d}, {"q", m.order.q}};
  j["diff_mode"] = m.diff_mode == DifferenceMode::iterated_lag1 ? "iterated_lag1" : "single_lag_d";
  j["phi"] = m.phi;
  j["theta"] = m.theta;
  j["intercept"] = m.intercept;
  j["sigma2"] = m.sigma2;
  j["residuals"] = m.residuals;
  j["train_start"] = format_iso8601(m.train_start);
  j["train_end"] = format_iso8601(m.train_end);
  j["resolution_minutes"] = m.resolution_minutes;
  j["converged"] = m.converged;
  j["loglik"] = m.loglik;
  return j.dump(2);
}

ArimaModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
  try {
    ArimaModel m;
    m.order.p = j.at("order").at("p").get<int>();
    m.order.d = j.at("order").at("d").get<int>();
    m.order.q = j.at("order").at("q").get<int>();
    m.diff_mode = j.at("diff_mode").get<std::string>() == "single_lag_d" ? DifferenceMode::single_lag_d
                                                                         : DifferenceMode::iterated_lag1;
    m.phi = j.at("phi").get<std::vector<double>>();
    m.theta = j.at("theta").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.sigma2 = j.at("sigma2").get<double>();
    m.residuals = j.at("residuals").get<std::vector<double>>();
    m.train_start = parse_iso8601(j.at("train_start").get<std::string>());
    m.train_end = parse_iso8601(j.at("train_end").get<std::string>());
    m.resolution_minutes = j.at("resolution_minutes").get<int>();
    m.converged = j.at("converged").get<bool>();
    m.loglik = j.at("loglik").is_string() ? -kInf : j.at("loglik").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file missing fields: ") + e.what());
  }
}

void save_model(const ArimaModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << to_json(m) << "\n";
}

ArimaModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace clpu
