#include <cmath>
#include <random>

#include "doctest.h"

#include "clpu/arima.hpp"
#include "clpu/errors.hpp"
#include "test_support.hpp"

using namespace clpu;

namespace {

/// Evaluates the concentrated likelihood at fixed coefficients: a zero-move
/// simplex pins the optimizer to the warm start.
ArimaModel eval_at(const std::vector<double>& x, ArimaOrder order, std::vector<double> phi0,
                   std::vector<double> theta0) {
  FitOptions opt;
  opt.optim.max_iterations = 0;
  opt.optim.initial_step = 1e-12;
  opt.phi0 = std::move(phi0);
  opt.theta0 = std::move(theta0);
  return fit(x, order, opt);
}

}  // namespace

TEST_CASE("exact likelihood matches the reference implementation at fixed parameters") {
  const std::vector<double> x = testsup::frozen_ar_series();

  // The steady-state freeze perturbs sigma2 at first order while the
  // concentrated loglik is only second-order sensitive, so sigma2 gets a
  // wider band than the likelihood itself.
  const ArimaModel m1 = eval_at(x, {1, 0, 1}, {0.5}, {0.3});
  CHECK(m1.intercept == doctest::Approx(0.012376708969751649).epsilon(1e-12));
  CHECK(m1.loglik == doctest::Approx(-40.9095194437).epsilon(1e-8));
  CHECK(m1.sigma2 == doctest::Approx(0.0878507165518).epsilon(1e-4));

  const ArimaModel m2 = eval_at(x, {2, 0, 0}, {0.4, -0.25}, {});
  CHECK(m2.loglik == doctest::Approx(-62.2462775024).epsilon(1e-8));
  CHECK(m2.sigma2 == doctest::Approx(0.108975795002).epsilon(1e-4));

  const ArimaModel m3 = eval_at(x, {0, 0, 2}, {}, {0.5, 0.2});
  CHECK(m3.loglik == doctest::Approx(-45.1914827777).epsilon(1e-8));
  CHECK(m3.sigma2 == doctest::Approx(0.0918724499285).epsilon(1e-4));
}

TEST_CASE("multi-step forecasts match the reference implementation") {
  const std::vector<double> x = testsup::frozen_ar_series();
  const ArimaModel m = eval_at(x, {1, 0, 1}, {0.5}, {0.3});
  const std::vector<double> fc = forecast_step(m, x, 4);
  const double ref[4] = {0.225010527077, 0.118693618023, 0.0655351634965, 0.0389559362331};
  REQUIRE(fc.size() == 4);
  for (int h = 0; h < 4; ++h) CHECK(fc[h] == doctest::Approx(ref[h]).epsilon(1e-6));
}

TEST_CASE("maximum likelihood recovers an AR(1) coefficient") {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(2000);
  double prev = 0.0;
  for (double& v : x) {
    prev = 0.7 * prev + gauss(rng);
    v = prev;
  }
  const ArimaModel m = fit(x, {1, 0, 0});
  REQUIRE(m.converged);
  CHECK(std::abs(m.phi[0] - 0.7) < 0.06);
  CHECK(m.sigma2 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("ARIMA(0,1,0) coincides with the random walk") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  std::vector<double> x(120);
  double acc = 10.0;
  for (double& v : x) {
    acc += uni(rng) - 1.2;
    v = std::max(acc, 0.1);
  }
  const ArimaModel m = fit(x, {0, 1, 0});
  REQUIRE(m.converged);
  CHECK(m.intercept == 0.0);
  const std::vector<double> fc = forecast_step(m, x, 6);
  for (double v : fc) CHECK(std::abs(v - x.back()) <= 1e-9);
  const CumulativeForecast cum = forecast_cumulative(m, x, 0, 5);
  for (int r = 0; r <= 5; ++r)
    CHECK(std::abs(cum.energy_kwh[r] - (r + 1) * x.back()) <= 1e-9);
}

TEST_CASE("cumulative forecast telescopes and mirrors the step forecast") {
  const std::vector<double> x = testsup::frozen_ar_series();
  std::vector<double> pos(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pos[i] = x[i] + 2.0;
  const ArimaModel m = fit(pos, {1, 0, 1});
  REQUIRE(m.converged);
  const int r_max = 9;
  const CumulativeForecast cum = forecast_cumulative(m, pos, 12345, r_max);
  const std::vector<double> step = forecast_step(m, pos, r_max + 1);
  REQUIRE(cum.energy_kwh.size() == static_cast<std::size_t>(r_max + 1));
  REQUIRE(cum.horizon_steps.front() == 0);
  REQUIRE(cum.horizon_steps.back() == r_max);
  CHECK(cum.t0 == 12345);
  CHECK(std::abs(cum.energy_kwh[0] - cum.per_step[0]) <= 1e-12);
  for (int r = 1; r <= r_max; ++r) {
    CHECK(std::abs(cum.energy_kwh[r] - cum.energy_kwh[r - 1] - cum.per_step[r]) <= 1e-9);
    CHECK(cum.energy_kwh[r] >= cum.energy_kwh[r - 1]);
  }
  for (int r = 0; r <= r_max; ++r) CHECK(std::abs(cum.per_step[r] - step[r]) <= 1e-12);
}

TEST_CASE("fit guards and the divergence flag") {
  CHECK_THROWS_AS(fit(std::vector<double>(30, 1.0), ArimaOrder{1, 0, 1}), SeriesTooShort);
  CHECK_THROWS_AS(fit(testsup::frozen_ar_series(), ArimaOrder{-1, 0, 0}), OrderOutOfBounds);

  // One simplex iteration cannot satisfy the tolerances; the fit must flag
  // divergence rather than throw.
  FitOptions opt;
  opt.optim.max_iterations = 1;
  const ArimaModel m = fit(testsup::frozen_ar_series(), {2, 0, 2}, opt);
  CHECK_FALSE(m.converged);
}

TEST_CASE("model json round trip preserves forecasts") {
  const std::vector<double> x = testsup::frozen_ar_series();
  std::vector<double> pos(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pos[i] = x[i] + 2.0;
  const ArimaModel m = fit(pos, {1, 0, 1});
  REQUIRE(m.converged);
  testsup::TempDir dir("arima_json");
  save_model(m, dir.file("m.json"));
  const ArimaModel r = load_model(dir.file("m.json"));
  CHECK(r.order == m.order);
  CHECK(r.converged == m.converged);
  CHECK(r.intercept == doctest::Approx(m.intercept).epsilon(1e-15));
  CHECK(r.sigma2 == doctest::Approx(m.sigma2).epsilon(1e-15));
  REQUIRE(r.phi.size() == m.phi.size());
  REQUIRE(r.theta.size() == m.theta.size());
  REQUIRE(r.residuals.size() == m.residuals.size());
  const std::vector<double> a = forecast_step(m, pos, 8);
  const std::vector<double> b = forecast_step(r, pos, 8);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("mse basics") {
  CHECK(mse({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(mse({1, 2}, {2, 4}) == doctest::Approx((1.0 + 4.0) / 2.0));
  CHECK_THROWS_AS(mse({1}, {1, 2}), LengthMismatch);
  CHECK_THROWS_AS(mse({}, {}), EmptyInput);
}

TEST_CASE("arimax with zero regressors reproduces the univariate model") {
  const std::vector<double> x = testsup::frozen_ar_series();
  std::vector<double> pos(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pos[i] = x[i] + 2.0;
  const EnergySeries s = testsup::as_series(pos);

  const ArimaModel uni = fit(s, {1, 0, 1});
  const ArimaxModel ax = fit_arimax(s, std::vector<double>(pos.size(), 0.0), {1, 0, 1});
  REQUIRE(uni.converged);
  REQUIRE(ax.converged);
  const std::vector<double> fu = forecast_step(uni, pos, 6);
  const std::vector<double> fx =
      forecast_step(ax, pos, std::vector<double>(pos.size(), 0.0), 6);
  for (int h = 0; h < 6; ++h) CHECK(fu[h] == doctest::Approx(fx[h]).epsilon(1e-6));
}

TEST_CASE("arimax flags collinear regressors instead of throwing") {
  const std::vector<double> x = testsup::frozen_ar_series();
  const EnergySeries s = testsup::as_series(x);
  // Temps proportional to the energy series make the lagged temperature
  // column a scalar multiple of the lagged energy column, so (phi, beta)
  // are jointly unidentified.
  std::vector<double> temps(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) temps[i] = 2.0 * x[i];
  const ArimaxModel m = fit_arimax(s, temps, {1, 0, 0});
  CHECK_FALSE(m.converged);

  // A constant regressor centers away to nothing and collapses to the
  // univariate model rather than tripping the rank screen.
  const ArimaxModel c = fit_arimax(s, std::vector<double>(x.size(), 5.0), {1, 0, 0});
  CHECK(c.converged);
  REQUIRE(c.beta.size() == 1);
  CHECK(c.beta[0] == 0.0);
}

TEST_CASE("arimax recovers a known exogenous coefficient") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> gauss(0.0, 0.3);
  const std::size_t n = 1500;
  std::vector<double> temps(n), y(n);
  for (std::size_t t = 0; t < n; ++t)
    temps[t] = std::sin(2.0 * 3.14159265358979 * static_cast<double>(t) / 96.0) + gauss(rng);
  y[0] = 0.0;
  for (std::size_t t = 1; t < n; ++t)
    y[t] = 0.5 * y[t - 1] + 2.0 * temps[t - 1] + gauss(rng);
  const ArimaxModel m = fit_arimax(testsup::as_series(y), temps, {1, 0, 0});
  REQUIRE(m.converged);
  REQUIRE(m.beta.size() == 1);
  CHECK(std::abs(m.beta[0] - 2.0) < 0.1);
  CHECK(std::abs(m.phi[0] - 0.5) < 0.1);
}
