#include "clpu/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "clpu/errors.hpp"

namespace clpu {
namespace {

// Classical-decomposition start values from the first two seasons: levels are
// season means, trend their per-step slope, seasonal the mean deviation from
// the matching season level.
void init_state(const std::vector<double>& y, int m, double& level, double& trend,
                std::vector<double>& seasonal) {
  const auto mu = static_cast<std::size_t>(m);
  double mean1 = 0.0;
  double mean2 = 0.0;
  for (std::size_t i = 0; i < mu; ++i) {
    mean1 += y[i];
    mean2 += y[mu + i];
  }
  mean1 /= m;
  mean2 /= m;
  level = mean1;
  trend = (mean2 - mean1) / m;
  seasonal.assign(mu, 0.0);
  for (std::size_t i = 0; i < mu; ++i)
    seasonal[i] = 0.5 * ((y[i] - mean1) + (y[mu + i] - mean2));
  double s_mean = 0.0;
  for (double s : seasonal) s_mean += s;
  s_mean /= m;
  for (double& s : seasonal) s -= s_mean;
}

// Runs the additive recursion over the whole sample.  SSE covers one-step
// errors from t >= m, where the seasonal index first wraps.
double run_recursion(const std::vector<double>& y, int m, double alpha, double beta,
                     double gamma, double& level, double& trend,
                     std::vector<double>& seasonal) {
  double sse = 0.0;
  const std::size_t n = y.size();
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t si = t % static_cast<std::size_t>(m);
    const double pred = level + trend + seasonal[si];
    const double err = y[t] - pred;
    if (t >= static_cast<std::size_t>(m)) sse += err * err;
    const double prev_level = level;
    level = alpha * (y[t] - seasonal[si]) + (1.0 - alpha) * (level + trend);
    trend = beta * (level - prev_level) + (1.0 - beta) * trend;
    seasonal[si] = gamma * (y[t] - level) + (1.0 - gamma) * seasonal[si];
  }
  return sse;
}

}  // namespace

HwesModel fit_hwes(const std::vector<double>& values, const HwesFitOptions& options) {
  const int m = options.season_length;
  if (m < 2) throw InvalidParams("season_length must be at least 2");
  if (values.size() < 2 * static_cast<std::size_t>(m))
    throw SeriesTooShort("HWES needs at least two full seasons");

  double level0 = 0.0;
  double trend0 = 0.0;
  std::vector<double> seasonal0;
  init_state(values, m, level0, trend0, seasonal0);

  HwesModel best;
  best.season_length = m;
  best.sse = std::numeric_limits<double>::infinity();

  // Deterministic coarse grid; ties keep the first (smallest) triple.
  const int steps =
      static_cast<int>(std::floor((options.grid_max - options.grid_min) / options.grid_step + 0.5)) + 1;
  std::vector<double> seasonal;
  for (int ia = 0; ia < steps; ++ia) {
    const double alpha = options.grid_min + ia * options.grid_step;
    for (int ib = 0; ib < steps; ++ib) {
      const double beta = options.grid_min + ib * options.grid_step;
      for (int ig = 0; ig < steps; ++ig) {
        const double gamma = options.grid_min + ig * options.grid_step;
        double level = level0;
        double trend = trend0;
        seasonal = seasonal0;
        const double sse = run_recursion(values, m, alpha, beta, gamma, level, trend, seasonal);
        if (sse < best.sse) {
          best.alpha = alpha;
          best.beta = beta;
          best.gamma = gamma;
          best.level = level;
          best.trend = trend;
          best.seasonal = seasonal;
          best.sse = sse;
        }
      }
    }
  }

  best.phase = static_cast<int>(values.size() % static_cast<std::size_t>(m));

  // Fold any drift of the seasonal profile back into the level so the
  // invariant sum(seasonal) == 0 holds exactly on output.
  double s_mean = 0.0;
  for (double s : best.seasonal) s_mean += s;
  s_mean /= m;
  for (double& s : best.seasonal) s -= s_mean;
  best.level += s_mean;
  return best;
}

HwesModel fit_hwes(const EnergySeries& series, const HwesFitOptions& options) {
  return fit_hwes(series.values, options);
}

std::vector<double> forecast_hwes(const HwesModel& model, int horizon) {
  if (horizon < 1) throw InvalidParams("horizon must be positive");
  if (model.seasonal.size() != static_cast<std::size_t>(model.season_length))
    throw InvalidParams("seasonal profile length mismatch");
  std::vector<double> out(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    const std::size_t si =
        static_cast<std::size_t>((model.phase + h - 1) % model.season_length);
    out[static_cast<std::size_t>(h - 1)] =
        std::max(0.0, model.level + h * model.trend + model.seasonal[si]);
  }
  return out;
}

void hwes_update(HwesModel& model, double observation) {
  if (model.seasonal.size() != static_cast<std::size_t>(model.season_length))
    throw InvalidParams("seasonal profile length mismatch");
  const auto si = static_cast<std::size_t>(model.phase);
  const double prev_level = model.level;
  model.level = model.alpha * (observation - model.seasonal[si]) +
                (1.0 - model.alpha) * (model.level + model.trend);
  model.trend = model.beta * (model.level - prev_level) + (1.0 - model.beta) * model.trend;
  model.seasonal[si] =
      model.gamma * (observation - model.level) + (1.0 - model.gamma) * model.seasonal[si];
  model.phase = (model.phase + 1) % model.season_length;
}

RandomWalkModel fit_random_walk(const std::vector<double>& values) {
  if (values.empty()) throw EmptyInput("random walk needs at least one observation");
  return RandomWalkModel{values.back()};
}

RandomWalkModel fit_random_walk(const EnergySeries& series) {
  return fit_random_walk(series.values);
}

std::vector<double> forecast_random_walk(const RandomWalkModel& model, int horizon) {
  if (horizon < 1) throw InvalidParams("horizon must be positive");
  return std::vector<double>(static_cast<std::size_t>(horizon), model.last_value);
}

}  // namespace clpu
