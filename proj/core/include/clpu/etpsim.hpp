#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "clpu/series.hpp"
#include "clpu/time.hpp"

namespace clpu {

// Hour-of-day profile, piecewise constant over each clock hour (kW).
using HourlyProfile = std::array<double, 24>;

// Two-state thermal house (air + mass) with a resistive space heater, a
// single-node water heater tank, and a fixed base load profile.
// Conductances in kW/degC, capacities in kWh/degC, powers in kW.
struct EtpHouseParams {
  double U_A = 0.15;
  double C_A = 1.5;
  double H_M = 1.0;
  double C_M = 10.0;
  double Q_internal = 0.3;
  // Split of internal gains between the air and mass nodes.
  double gain_air_fraction = 0.7;
  double gain_mass_fraction = 0.3;
  double heater_rating = 12.0;
  double setpoint = 20.0;
  double deadband = 2.0;

  double water_heater_rating = 4.5;
  double tank_capacity = 0.25;
  double tank_setpoint = 50.0;
  double tank_deadband = 4.0;
  double tank_loss = 0.002;
  HourlyProfile water_draw_schedule{};
  HourlyProfile base_load_profile{};
};

// Documented default profiles (morning/evening draw peaks, evening base peak).
EtpHouseParams default_house();

struct EtpHouseState {
  double T_A = 20.0;
  double T_M = 20.0;
  double T_W = 50.0;
  bool heater_on = false;
  bool water_heater_on = false;
  Timestamp t = 0;
};

enum class RestorationBehavior { full_power_until_setpoint };

struct OutageScenario {
  Timestamp t0 = 0;
  double duration_hours = 0.0;
  RestorationBehavior restoration_behavior = RestorationBehavior::full_power_until_setpoint;
};

// Outdoor temperature trace, piecewise constant per interval (degC).
struct WeatherSeries {
  Timestamp start_time = 0;
  int resolution_minutes = 60;
  std::vector<double> values;

  Timestamp end_time() const {
    return start_time + static_cast<Timestamp>(values.size()) * 60 * resolution_minutes;
  }
  double at(Timestamp t) const;
};

struct ClpuGroundTruth {
  Timestamp restoration_time = 0;
  double duration_hours = 0.0;
  double peak_kw = 0.0;
  bool recovered = false;
};

struct SimulationResult {
  EnergySeries meter;
  std::vector<EtpHouseState> trace;  // one state per meter interval (end of interval)
  std::optional<ClpuGroundTruth> ground_truth;
};

// Advances one substep of at most one minute with heater states frozen, using
// the exact solution of the constant-coefficient linear system. Returns the
// new state and the electric power drawn over the substep.
std::pair<EtpHouseState, double> step(const EtpHouseParams& params, const EtpHouseState& state,
                                      double T_O, double dt_minutes, bool power_available);

// Integrates the house over the horizon starting at weather.start_time.
// Under a scenario, power is unavailable in [t0, t0 + duration) and the
// ground-truth CLPU record is computed from the post-restoration trajectory.
SimulationResult simulate(const EtpHouseParams& params, const WeatherSeries& weather,
                          double horizon_hours, const std::optional<OutageScenario>& scenario,
                          int meter_delta_minutes = 15);

struct EtpSuiteConfig {
  int n_houses = 6;
  int clean_days = 21;
  double jitter_fraction = 0.2;
  double t_mean = -5.0;
  double t_amplitude = 5.0;
  double t_noise_std = 1.0;
  int outage_min_hours = 1;
  int outage_max_hours = 10;
  int outage_start_hour = 6;
  int meter_delta_minutes = 15;
  Timestamp start_time = 0;
};

struct HouseScenario {
  EtpHouseParams params;
  WeatherSeries weather;
  std::vector<OutageScenario> outages;
};

// Deterministic winter suite: house 0 keeps the base parameters, the rest
// jitter them +-20%; sinusoid-plus-AR-noise weather covering clean_days plus
// two extra days; one outage per whole-hour length.
std::vector<HouseScenario> winter_scenario_suite(std::uint64_t seed,
                                                 const EtpSuiteConfig& config = {},
                                                 const EtpHouseParams& base = default_house());

}  // namespace clpu
