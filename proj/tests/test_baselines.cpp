#include <cmath>
#include <random>

#include "doctest.h"

#include "clpu/baselines.hpp"
#include "clpu/errors.hpp"
#include "test_support.hpp"

using namespace clpu;

namespace {

/// y[t] = a + b*t + s[t mod m]: the additive recursion tracks this family
/// exactly, so one-step errors vanish for any smoothing weights.
std::vector<double> trend_seasonal(std::size_t n, int m, double a, double b) {
  std::vector<double> s(static_cast<std::size_t>(m));
  double mean = 0.0;
  for (int j = 0; j < m; ++j) {
    s[static_cast<std::size_t>(j)] = std::sin(2.0 * 3.14159265358979 * j / m);
    mean += s[static_cast<std::size_t>(j)];
  }
  for (double& v : s) v -= mean / m;
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t)
    y[t] = a + b * static_cast<double>(t) + s[t % static_cast<std::size_t>(m)];
  return y;
}

}  // namespace

TEST_CASE("hwes constant series is a fixed point") {
  const HwesModel m = fit_hwes(std::vector<double>(300, 2.5), HwesFitOptions{12});
  CHECK(m.level == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(m.trend == doctest::Approx(0.0).epsilon(1e-9));
  for (double s : m.seasonal) CHECK(std::abs(s) <= 1e-9);
  const std::vector<double> fc = forecast_hwes(m, 24);
  for (double v : fc) CHECK(v == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("hwes reproduces an exact seasonal pattern") {
  // With zero trend, the classical-decomposition start lies exactly on the
  // pattern, so one-step errors vanish for every smoothing triple.
  const int m = 12;
  const std::vector<double> y = trend_seasonal(20 * m, m, 5.0, 0.0);
  HwesFitOptions opt;
  opt.season_length = m;
  const HwesModel model = fit_hwes(y, opt);
  CHECK(model.sse <= 1e-18);
  CHECK(model.trend == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> fc = forecast_hwes(model, 2 * m);
  for (int h = 1; h <= 2 * m; ++h) {
    const std::size_t t = y.size() + static_cast<std::size_t>(h) - 1;
    const double expected = y[t % static_cast<std::size_t>(m)];
    CHECK(fc[static_cast<std::size_t>(h - 1)] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("hwes seasonal components stay centered and phase advances") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 0.2);
  std::vector<double> y = trend_seasonal(400, 8, 3.0, 0.0);
  for (double& v : y) v += gauss(rng);
  HwesFitOptions opt;
  opt.season_length = 8;
  HwesModel m = fit_hwes(y, opt);
  double sum = 0.0;
  for (double s : m.seasonal) sum += s;
  CHECK(std::abs(sum) <= 1e-6);
  CHECK(m.phase == static_cast<int>(y.size()) % 8);

  const int phase_before = m.phase;
  hwes_update(m, 3.1);
  CHECK(m.phase == (phase_before + 1) % 8);
}

TEST_CASE("hwes_update matches an explicit recursion oracle") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> gauss(0.0, 0.3);
  std::vector<double> y = trend_seasonal(300, 6, 2.0, 0.002);
  for (double& v : y) v += gauss(rng);
  HwesFitOptions opt;
  opt.season_length = 6;
  HwesModel m = fit_hwes(y, opt);
  HwesModel manual = m;

  std::vector<double> fresh(50);
  for (double& v : fresh) v = 2.5 + gauss(rng);
  for (double obs : fresh) {
    // textbook additive recursion, written out independently
    const int m_len = static_cast<int>(manual.seasonal.size());
    const double s_old = manual.seasonal[static_cast<std::size_t>(manual.phase % m_len)];
    const double level_new = manual.alpha * (obs - s_old) + (1.0 - manual.alpha) * (manual.level + manual.trend);
    const double trend_new = manual.beta * (level_new - manual.level) + (1.0 - manual.beta) * manual.trend;
    const double s_new = manual.gamma * (obs - level_new) + (1.0 - manual.gamma) * s_old;
    manual.level = level_new;
    manual.trend = trend_new;
    manual.seasonal[static_cast<std::size_t>(manual.phase % m_len)] = s_new;
    manual.phase = (manual.phase + 1) % m_len;

    hwes_update(m, obs);
    CHECK(m.level == doctest::Approx(manual.level).epsilon(1e-12));
    CHECK(m.trend == doctest::Approx(manual.trend).epsilon(1e-12));
    CHECK(m.phase == manual.phase);
  }
  const std::vector<double> fa = forecast_hwes(m, 12);
  const std::vector<double> fb = forecast_hwes(manual, 12);
  for (std::size_t i = 0; i < fa.size(); ++i) CHECK(fa[i] == doctest::Approx(fb[i]).epsilon(1e-12));
}

TEST_CASE("hwes guards") {
  CHECK_THROWS_AS(fit_hwes(std::vector<double>(10, 1.0), HwesFitOptions{96}), SeriesTooShort);
  HwesFitOptions opt;
  opt.season_length = 1;
  CHECK_THROWS_AS(fit_hwes(std::vector<double>(300, 1.0), opt), InvalidParams);
  const HwesModel m = fit_hwes(std::vector<double>(48, 1.0), HwesFitOptions{12});
  CHECK_THROWS_AS(forecast_hwes(m, 0), InvalidParams);
}

TEST_CASE("hwes forecasts are clamped at zero") {
  // steep negative trend pushes raw forecasts below zero
  std::vector<double> y(72);
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = std::max(0.0, 10.0 - 0.2 * static_cast<double>(t));
  const HwesModel m = fit_hwes(y, HwesFitOptions{12});
  const std::vector<double> fc = forecast_hwes(m, 120);
  for (double v : fc) CHECK(v >= 0.0);
}

TEST_CASE("random walk baseline") {
  const RandomWalkModel m = fit_random_walk({1.0, 2.0, 3.5});
  CHECK(m.last_value == doctest::Approx(3.5));
  const std::vector<double> fc = forecast_random_walk(m, 4);
  REQUIRE(fc.size() == 4);
  for (double v : fc) CHECK(v == doctest::Approx(3.5));
  CHECK_THROWS_AS(fit_random_walk(std::vector<double>{}), EmptyInput);
  CHECK_THROWS_AS(forecast_random_walk(m, 0), InvalidParams);
}
