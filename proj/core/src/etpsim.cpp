#include "clpu/etpsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "clpu/errors.hpp"

namespace clpu {
namespace {

constexpr double kPi = 3.14159265358979323846;

void validate(const EtpHouseParams& p) {
  const bool positive = p.U_A > 0 && p.C_A > 0 && p.H_M > 0 && p.C_M > 0 &&
                        p.heater_rating > 0 && p.deadband > 0 && p.water_heater_rating > 0 &&
                        p.tank_capacity > 0 && p.tank_deadband > 0 && p.tank_loss > 0;
  if (!positive) throw InvalidParams("conductances, capacities, ratings and deadbands must be positive");
  if (p.Q_internal < 0 || p.gain_air_fraction < 0 || p.gain_mass_fraction < 0)
    throw InvalidParams("internal gains and their fractions must be non-negative");
}

struct Mat2 {
  double a11, a12, a21, a22;
};

// exp(A*dt) for the thermal system matrix via its spectral form. The
// eigenvalues are real, distinct and negative for any valid parameters:
// tr^2 - 4 det = (a11 + a22)^2 - 4(a11 a22 - a12 a21) and a12 a21 > 0.
Mat2 expm2(const Mat2& A, double dt_hours) {
  const double tr = A.a11 + A.a22;
  const double det = A.a11 * A.a22 - A.a12 * A.a21;
  const double disc = tr * tr - 4.0 * det;
  const double s = std::sqrt(disc);
  const double l1 = 0.5 * (tr + s);
  const double l2 = 0.5 * (tr - s);
  const double e1 = std::exp(l1 * dt_hours);
  const double e2 = std::exp(l2 * dt_hours);
  // E = ((e1 - e2) A + (e2 l1 - e1 l2) I) / (l1 - l2).
  const double c0 = (e2 * l1 - e1 * l2) / (l1 - l2);
  const double c1 = (e1 - e2) / (l1 - l2);
  Mat2 E;
  E.a11 = c1 * A.a11 + c0;
  E.a12 = c1 * A.a12;
  E.a21 = c1 * A.a21;
  E.a22 = c1 * A.a22 + c0;
  return E;
}

Mat2 system_matrix(const EtpHouseParams& p) {
  return Mat2{-(p.U_A + p.H_M) / p.C_A, p.H_M / p.C_A, p.H_M / p.C_M, -p.H_M / p.C_M};
}

// Holds everything that is constant across substeps of a fixed simulation.
struct Stepper {
  const EtpHouseParams& p;
  double dt_hours;
  Mat2 E;           // exp(A dt)
  double tank_decay;  // exp(-U_W/C_W dt)

  Stepper(const EtpHouseParams& params, double dt_minutes)
      : p(params), dt_hours(dt_minutes / 60.0), E(expm2(system_matrix(params), dt_hours)),
        tank_decay(std::exp(-params.tank_loss / params.tank_capacity * dt_hours)) {}

  // Applies thermostat decisions at the substep boundary, then advances the
  // frozen-coefficient system exactly over dt. Returns electric power (kW).
  double advance(EtpHouseState& s, double T_O, bool power_available) const {
    const int hour = hour_of_day(s.t);
    if (power_available) {
      if (s.T_A < p.setpoint - 0.5 * p.deadband)
        s.heater_on = true;
      else if (s.T_A > p.setpoint + 0.5 * p.deadband)
        s.heater_on = false;
      if (s.T_W < p.tank_setpoint - 0.5 * p.tank_deadband)
        s.water_heater_on = true;
      else if (s.T_W > p.tank_setpoint + 0.5 * p.tank_deadband)
        s.water_heater_on = false;
    } else {
      s.heater_on = false;
      s.water_heater_on = false;
    }

    const double heat = s.heater_on ? p.heater_rating : 0.0;
    const double Q_A = heat + p.gain_air_fraction * p.Q_internal;
    const double Q_M = p.gain_mass_fraction * p.Q_internal;

    // Equilibrium of the frozen system: the mass equation forces
    // T_Aeq - T_Meq = -Q_M/H_M, the air equation then gives T_Aeq.
    const double T_Aeq = T_O + (Q_A + Q_M) / p.U_A;
    const double T_Meq = T_Aeq + Q_M / p.H_M;
    const double xa = s.T_A - T_Aeq;
    const double xm = s.T_M - T_Meq;
    const double T_A1 = T_Aeq + E.a11 * xa + E.a12 * xm;
    const double T_M1 = T_Meq + E.a21 * xa + E.a22 * xm;

    const double draw = p.water_draw_schedule[static_cast<std::size_t>(hour)];
    const double Q_W = s.water_heater_on ? p.water_heater_rating : 0.0;
    // Single-node tank against the (frozen) indoor air temperature.
    const double T_Weq = s.T_A + (Q_W - draw) / p.tank_loss;
    const double T_W1 = T_Weq + (s.T_W - T_Weq) * tank_decay;

    const double base = p.base_load_profile[static_cast<std::size_t>(hour)];
    const double power =
        power_available ? heat + Q_W + base : 0.0;

    s.T_A = T_A1;
    s.T_M = T_M1;
    s.T_W = T_W1;
    s.t += static_cast<Timestamp>(std::llround(dt_hours * 3600.0));
    return power;
  }
};

}  // namespace

double WeatherSeries::at(Timestamp t) const {
  if (values.empty() || t < start_time) throw CoverageGap("timestamp precedes weather coverage");
  const Timestamp res = static_cast<Timestamp>(resolution_minutes) * 60;
  const auto idx = static_cast<std::size_t>((t - start_time) / res);
  if (idx >= values.size()) throw CoverageGap("timestamp beyond weather coverage");
  return values[idx];
}

EtpHouseParams default_house() {
  EtpHouseParams p;
  // Hot water draw in thermal kW by hour of day; daytime plateau with
  // morning/evening bumps, quiet overnight.
  p.water_draw_schedule = {0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.9, 1.2, 1.2, 1.0,
                           1.0, 1.0, 1.0, 0.9, 0.9, 0.9, 1.0, 1.2, 1.4, 1.4,
                           1.2, 1.0, 0.6, 0.3};
  p.base_load_profile = {0.3, 0.3, 0.3, 0.3, 0.3, 0.35, 0.5, 0.6, 0.55, 0.5,
                         0.5, 0.5, 0.5, 0.5, 0.5,  0.5, 0.6, 0.8, 0.9,  0.9,
                         0.8, 0.6, 0.45, 0.35};
  return p;
}

std::pair<EtpHouseState, double> step(const EtpHouseParams& params, const EtpHouseState& state,
                                      double T_O, double dt_minutes, bool power_available) {
  validate(params);
  if (!(dt_minutes > 0.0) || dt_minutes > 1.0 + 1e-12)
    throw InvalidParams("substep must be positive and at most one minute");
  Stepper stepper(params, dt_minutes);
  EtpHouseState next = state;
  const double power = stepper.advance(next, T_O, power_available);
  return {next, power};
}

SimulationResult simulate(const EtpHouseParams& params, const WeatherSeries& weather,
                          double horizon_hours, const std::optional<OutageScenario>& scenario,
                          int meter_delta_minutes) {
  validate(params);
  if (meter_delta_minutes <= 0) throw InvalidParams("meter interval must be positive");
  const auto total_minutes = static_cast<std::int64_t>(std::llround(horizon_hours * 60.0));
  if (total_minutes <= 0 || total_minutes % meter_delta_minutes != 0)
    throw InvalidParams("horizon must be a positive multiple of the meter interval");
  const Timestamp start = weather.start_time;
  const Timestamp end = start + total_minutes * 60;
  if (weather.end_time() < end) throw CoverageGap("weather does not cover the horizon");

  Timestamp outage_start = 0;
  Timestamp restore = 0;
  if (scenario) {
    if (scenario->duration_hours <= 0.0) throw InvalidParams("outage duration must be positive");
    outage_start = scenario->t0;
    restore = outage_start + static_cast<Timestamp>(std::llround(scenario->duration_hours * 3600.0));
    if (outage_start < start || outage_start >= end)
      throw CoverageGap("outage start outside the simulated horizon");
  }

  SimulationResult result;
  result.meter.start_time = start;
  result.meter.resolution_minutes = meter_delta_minutes;
  result.meter.meter_id = "etp-sim";
  const auto n_intervals = static_cast<std::size_t>(total_minutes / meter_delta_minutes);
  result.meter.values.assign(n_intervals, 0.0);
  result.trace.reserve(n_intervals);

  EtpHouseState state;
  state.T_A = params.setpoint;
  state.T_M = params.setpoint;
  state.T_W = params.tank_setpoint;
  state.t = start;

  Stepper stepper(params, 1.0);
  bool air_ok = false;
  bool tank_ok = false;
  Timestamp recovery_time = 0;
  bool recovered = false;

  for (std::size_t i = 0; i < n_intervals; ++i) {
    double interval_kwh = 0.0;
    for (int m = 0; m < meter_delta_minutes; ++m) {
      const bool power_available =
          !scenario || state.t < outage_start || state.t >= restore;
      const double T_O = weather.at(state.t);
      const double power = stepper.advance(state, T_O, power_available);
      interval_kwh += power / 60.0;
      if (scenario && !recovered && state.t >= restore) {
        if (state.T_A >= params.setpoint - 0.5 * params.deadband) air_ok = true;
        if (state.T_W >= params.tank_setpoint - 0.5 * params.tank_deadband) tank_ok = true;
        if (air_ok && tank_ok) {
          recovered = true;
          recovery_time = state.t;
        }
      }
    }
    result.meter.values[i] = interval_kwh;
    result.trace.push_back(state);
  }

  if (scenario) {
    ClpuGroundTruth gt;
    gt.restoration_time = restore;
    gt.recovered = recovered;
    const Timestamp until = recovered ? recovery_time : end;
    gt.duration_hours = static_cast<double>(until - restore) / 3600.0;
    const double dh = result.meter.delta_hours();
    const Timestamp res_s = static_cast<Timestamp>(meter_delta_minutes) * 60;
    double peak = 0.0;
    for (std::size_t i = 0; i < n_intervals; ++i) {
      const Timestamp lo = start + static_cast<Timestamp>(i) * res_s;
      const Timestamp hi = lo + res_s;
      if (hi <= restore || lo > until) continue;
      peak = std::max(peak, result.meter.values[i] / dh);
    }
    gt.peak_kw = peak;
    result.ground_truth = gt;
  }
  return result;
}

std::vector<HouseScenario> winter_scenario_suite(std::uint64_t seed, const EtpSuiteConfig& config,
                                                 const EtpHouseParams& base) {
  if (config.n_houses < 1 || config.clean_days < 1)
    throw InvalidParams("suite needs at least one house and one clean day");
  if (config.outage_min_hours < 1 || config.outage_max_hours < config.outage_min_hours)
    throw InvalidParams("outage hour range invalid");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(1.0 - config.jitter_fraction,
                                                1.0 + config.jitter_fraction);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int total_days = config.clean_days + 2;
  const int weather_res_minutes = 60;
  const std::size_t weather_len = static_cast<std::size_t>(total_days) * 24;

  std::vector<HouseScenario> suite;
  suite.reserve(static_cast<std::size_t>(config.n_houses));

  for (int h = 0; h < config.n_houses; ++h) {
    HouseScenario sc;
    sc.params = base;
    if (h > 0) {
      // House 0 stays at the documented defaults; the rest jitter +-20%.
      sc.params.U_A *= jitter(rng);
      sc.params.C_A *= jitter(rng);
      sc.params.H_M *= jitter(rng);
      sc.params.C_M *= jitter(rng);
      sc.params.Q_internal *= jitter(rng);
      sc.params.heater_rating *= jitter(rng);
      sc.params.deadband *= jitter(rng);
      sc.params.water_heater_rating *= jitter(rng);
      sc.params.tank_capacity *= jitter(rng);
      const double draw_scale = jitter(rng);
      const double base_scale = jitter(rng);
      for (double& v : sc.params.water_draw_schedule) v *= draw_scale;
      for (double& v : sc.params.base_load_profile) v *= base_scale;
    }

    sc.weather.start_time = config.start_time;
    sc.weather.resolution_minutes = weather_res_minutes;
    sc.weather.values.resize(weather_len);
    // Sinusoid with afternoon maximum plus AR(1) noise.
    const double ar = 0.9;
    const double innovation_sd = config.t_noise_std * std::sqrt(1.0 - ar * ar);
    double noise = 0.0;
    for (std::size_t k = 0; k < weather_len; ++k) {
      const double hour = static_cast<double>(k % 24);
      noise = ar * noise + innovation_sd * gauss(rng);
      sc.weather.values[k] =
          config.t_mean + config.t_amplitude * std::sin(2.0 * kPi * (hour - 9.0) / 24.0) + noise;
    }

    const Timestamp outage_day_start =
        config.start_time + static_cast<Timestamp>(config.clean_days) * kSecondsPerDay;
    for (int L = config.outage_min_hours; L <= config.outage_max_hours; ++L) {
      OutageScenario o;
      o.t0 = outage_day_start + static_cast<Timestamp>(config.outage_start_hour) * kSecondsPerHour;
      o.duration_hours = static_cast<double>(L);
      sc.outages.push_back(o);
    }
    suite.push_back(std::move(sc));
  }
  return suite;
}

}  // namespace clpu
