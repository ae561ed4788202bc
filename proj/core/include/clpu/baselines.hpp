#pragma once

#include <cstddef>
#include <vector>

#include "clpu/series.hpp"

namespace clpu {

// Additive Holt-Winters exponential smoothing state.  seasonal holds one full
// season and sums to zero; phase is the seasonal index of the next
// observation (the one a 1-step forecast targets).
struct HwesModel {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  int season_length = 96;
  double level = 0.0;
  double trend = 0.0;
  std::vector<double> seasonal;
  int phase = 0;
  double sse = 0.0;
};

struct HwesFitOptions {
  int season_length = 96;
  double grid_min = 0.05;
  double grid_max = 0.95;
  double grid_step = 0.05;
};

// Fits alpha/beta/gamma by coarse grid search minimizing one-step-ahead SSE.
// Requires at least two full seasons of data.
HwesModel fit_hwes(const std::vector<double>& values, const HwesFitOptions& options = {});
HwesModel fit_hwes(const EnergySeries& series, const HwesFitOptions& options = {});

// h-step-ahead point forecasts, h = 1..horizon, clamped at zero.
std::vector<double> forecast_hwes(const HwesModel& model, int horizon);

// Advances the smoothing state by one observed interval.
void hwes_update(HwesModel& model, double observation);

struct RandomWalkModel {
  double last_value = 0.0;
};

RandomWalkModel fit_random_walk(const std::vector<double>& values);
RandomWalkModel fit_random_walk(const EnergySeries& series);

// Flat forecast at the last observed value.
std::vector<double> forecast_random_walk(const RandomWalkModel& model, int horizon);

}  // namespace clpu
