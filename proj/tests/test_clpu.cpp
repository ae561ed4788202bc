#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"

#include "clpu/clpu.hpp"
#include "clpu/errors.hpp"
#include "test_support.hpp"

using namespace clpu;

namespace {

PeakSeries make_peaks(std::vector<double> peaks, std::int64_t first_day = 100) {
  PeakSeries s;
  for (std::size_t i = 0; i < peaks.size(); ++i) s.days.push_back(first_day + static_cast<std::int64_t>(i));
  s.peaks_kw = std::move(peaks);
  return s;
}

}  // namespace

TEST_CASE("constant peaks predict the constant") {
  const PeakSeries peaks = make_peaks(std::vector<double>(20, 5.0));
  const PeakModel m = fit_peak_model(peaks, 7);
  CHECK(m.residual_sigma == doctest::Approx(0.0).epsilon(1e-9));
  const PeakEstimate e = estimate_peak(m, (peaks.days.back() + 1) * kSecondsPerDay + 3600);
  CHECK(e.point_kw == doctest::Approx(5.0).epsilon(1e-9));
  // bands collapse onto the point when residual_sigma is 0
  CHECK(e.band75.lo == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(e.band75.hi == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("a linear ramp of peaks is continued exactly with two lags") {
  // The ramp has the exact AR(2) representation phi = (2, -1).
  std::vector<double> ramp(30);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i + 1);
  const PeakSeries peaks = make_peaks(std::move(ramp));
  const PeakModel m = fit_peak_model(peaks, 2);
  const PeakEstimate e = estimate_peak(m, (peaks.days.back() + 1) * kSecondsPerDay);
  CHECK(std::abs(e.point_kw - 31.0) <= 1e-6);
}

TEST_CASE("gaussian band widths follow the quantiles") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> peaks(40);
  for (double& v : peaks) v = 10.0 + gauss(rng);
  const PeakSeries s = make_peaks(std::move(peaks));
  PeakModel m = fit_peak_model(s, 7);
  m.residual_sigma = 1.0;  // pin for the quantile check
  const PeakEstimate e = estimate_peak(m, (s.days.back() + 1) * kSecondsPerDay);
  CHECK((e.band50.hi - e.band50.lo) / 2.0 == doctest::Approx(0.674489750).epsilon(1e-4));
  CHECK((e.band25.hi - e.band25.lo) / 2.0 == doctest::Approx(0.318639364).epsilon(1e-4));
  CHECK(e.band25.hi - e.band25.lo <= e.band50.hi - e.band50.lo);
  CHECK(e.band50.hi - e.band50.lo <= e.band75.hi - e.band75.lo);
}

TEST_CASE("stale peak history raises") {
  const PeakSeries peaks = make_peaks(std::vector<double>(20, 5.0), 100);
  const PeakModel m = fit_peak_model(peaks, 7);
  const Timestamp ok = (peaks.days.back() + 1) * kSecondsPerDay;
  CHECK_NOTHROW(estimate_peak(m, ok, 3));
  CHECK_THROWS_AS(estimate_peak(m, ok + 10 * kSecondsPerDay, 3), StaleHistory);
}

TEST_CASE("fit_peak_model requires enough history") {
  CHECK_THROWS_AS(fit_peak_model(make_peaks(std::vector<double>(10, 5.0)), 7), InsufficientHistory);
}

TEST_CASE("estimate_clpu keeps the duration identity exact") {
  const std::vector<double> base = testsup::frozen_ar_series();
  std::vector<double> hist(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) hist[i] = base[i] + 2.0;
  const ArimaModel em = fit(hist, {1, 0, 1});
  REQUIRE(em.converged);

  const PeakSeries peaks = make_peaks(std::vector<double>(20, 4.0), 0);
  const PeakModel pm = fit_peak_model(peaks, 7);
  const Timestamp t0 = (peaks.days.back() + 1) * kSecondsPerDay;

  const ClpuEstimate est = estimate_clpu(em, pm, hist, t0, 8);
  REQUIRE(est.entries.size() == 8);
  for (const ClpuEntry& e : est.entries) {
    CHECK(e.t_c_hat_hours * e.p_clpu_kw == doctest::Approx(e.e_o_hat_kwh).epsilon(1e-12));
    CHECK(e.tau1 == t0 + static_cast<Timestamp>(e.r) * est.delta_minutes * 60);
    CHECK(e.tau2 == e.tau1 + static_cast<Timestamp>(std::llround(e.t_c_hat_hours * 3600.0)));
    // band ordering: 25% inside 50% inside 75%
    CHECK(e.duration_band25.lo >= e.duration_band50.lo);
    CHECK(e.duration_band25.hi <= e.duration_band50.hi);
    CHECK(e.duration_band50.lo >= e.duration_band75.lo);
    CHECK(e.duration_band50.hi <= e.duration_band75.hi);
  }
  for (std::size_t i = 1; i < est.entries.size(); ++i)
    CHECK(est.entries[i].e_o_hat_kwh >= est.entries[i - 1].e_o_hat_kwh);
}

TEST_CASE("scale covariance of the energy and peak estimates") {
  const std::vector<double> base = testsup::frozen_ar_series();
  std::vector<double> hist(base.size()), scaled(base.size());
  const double k = 3.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    hist[i] = base[i] + 2.0;
    scaled[i] = k * hist[i];
  }
  FitOptions opts;  // shared defaults; orders pinned equal
  const ArimaModel m1 = fit(hist, {1, 0, 1}, opts);
  const ArimaModel m2 = fit(scaled, {1, 0, 1}, opts);
  REQUIRE(m1.converged);
  REQUIRE(m2.converged);
  const CumulativeForecast f1 = forecast_cumulative(m1, hist, 0, 5);
  const CumulativeForecast f2 = forecast_cumulative(m2, scaled, 0, 5);
  for (int r = 0; r <= 5; ++r)
    CHECK(f2.energy_kwh[r] == doctest::Approx(k * f1.energy_kwh[r]).epsilon(1e-6));

  const PeakSeries p1 = make_peaks({4, 5, 4.5, 4.2, 5.1, 4.4, 4.9, 4.6, 5.0, 4.1, 4.7, 4.3, 4.8, 5.2, 4.9, 4.5, 4.6, 5.0});
  PeakSeries p2 = p1;
  for (double& v : p2.peaks_kw) v *= k;
  const PeakModel q1 = fit_peak_model(p1, 7);
  const PeakModel q2 = fit_peak_model(p2, 7);
  const Timestamp asof = (p1.days.back() + 1) * kSecondsPerDay;
  CHECK(estimate_peak(q2, asof).point_kw ==
        doctest::Approx(k * estimate_peak(q1, asof).point_kw).epsilon(1e-6));
}

TEST_CASE("zero peak floors raise ZeroPeak") {
  const std::vector<double> base = testsup::frozen_ar_series();
  std::vector<double> hist(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) hist[i] = base[i] + 2.0;
  const ArimaModel em = fit(hist, {1, 0, 1});
  const PeakSeries peaks = make_peaks(std::vector<double>(20, 0.0), 0);
  const PeakModel pm = fit_peak_model(peaks, 7);
  const Timestamp t0 = (peaks.days.back() + 1) * kSecondsPerDay;
  CHECK_THROWS_AS(estimate_clpu(em, pm, hist, t0, 4), ZeroPeak);
}

TEST_CASE("normal consumption basics and the E_C identity") {
  const std::vector<double> base = testsup::frozen_ar_series();
  std::vector<double> hist(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) hist[i] = base[i] + 2.0;
  const ArimaModel em = fit(hist, {1, 0, 1});
  REQUIRE(em.converged);

  const Timestamp tau1 = 1000 * 900;
  SUBCASE("empty window is zero") {
    const NormalConsumption nc = normal_consumption(em, hist, tau1, tau1);
    CHECK(nc.e_n_hat_kwh == doctest::Approx(0.0));
  }
  SUBCASE("mean-only model sums its mean") {
    const ArimaModel mean_only = fit(hist, {0, 0, 0});
    const NormalConsumption nc =
        normal_consumption(mean_only, hist, tau1, tau1 + 4 * 900);
    CHECK(nc.e_n_hat_kwh == doctest::Approx(4.0 * mean_only.intercept).epsilon(1e-9));
  }
  SUBCASE("E_C additivity is exact") {
    const PeakSeries peaks = make_peaks(std::vector<double>(20, 4.0), 0);
    const PeakModel pm = fit_peak_model(peaks, 7);
    const Timestamp t0 = (peaks.days.back() + 1) * kSecondsPerDay;
    const ClpuEstimate est = estimate_clpu(em, pm, hist, t0, 6);
    for (const ClpuEntry& e : est.entries) {
      const NormalConsumption nc = normal_consumption(em, hist, e.tau1, e.tau2);
      const double e_c = e.e_o_hat_kwh + nc.e_n_hat_kwh;
      CHECK(std::abs((e_c - e.e_o_hat_kwh) - nc.e_n_hat_kwh) <= 1e-9);
      CHECK(nc.e_n_hat_kwh >= 0.0);
    }
  }
}

TEST_CASE("clpu csv export schema") {
  const std::vector<double> base = testsup::frozen_ar_series();
  std::vector<double> hist(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) hist[i] = base[i] + 2.0;
  const ArimaModel em = fit(hist, {1, 0, 1});
  const PeakSeries peaks = make_peaks(std::vector<double>(20, 4.0), 0);
  const PeakModel pm = fit_peak_model(peaks, 7);
  const ClpuEstimate est =
      estimate_clpu(em, pm, hist, (peaks.days.back() + 1) * kSecondsPerDay, 3);
  testsup::TempDir dir("clpu_csv");
  write_clpu_csv(est, dir.file("c.csv"));
  std::ifstream in(dir.file("c.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t0,r,tau1,E_o_hat_kwh,P_clpu_kw,t_C_hours,tau2,band25_lo,band25_hi,band50_lo,band50_hi,"
        "band75_lo,band75_hi");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("peak model json round trip") {
  const PeakSeries peaks =
      make_peaks({4, 5, 4.5, 4.2, 5.1, 4.4, 4.9, 4.6, 5.0, 4.1, 4.7, 4.3, 4.8, 5.2, 4.9, 4.5, 4.6, 5.0});
  const PeakModel m = fit_peak_model(peaks, 7);
  testsup::TempDir dir("peak_json");
  save_peak_model(m, dir.file("p.json"));
  const PeakModel r = load_peak_model(dir.file("p.json"));
  CHECK(r.n_lags == m.n_lags);
  REQUIRE(r.varphi.size() == m.varphi.size());
  for (std::size_t i = 0; i < m.varphi.size(); ++i)
    CHECK(r.varphi[i] == doctest::Approx(m.varphi[i]).epsilon(1e-15));
  CHECK(r.residual_sigma == doctest::Approx(m.residual_sigma).epsilon(1e-15));
  REQUIRE(r.peak_history.size() == m.peak_history.size());
  const Timestamp asof = (peaks.days.back() + 1) * kSecondsPerDay;
  CHECK(estimate_peak(r, asof).point_kw ==
        doctest::Approx(estimate_peak(m, asof).point_kw).epsilon(1e-12));
}
