#include "clpu/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clpu/errors.hpp"

namespace clpu {

namespace {

double guarded(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& start, const OptimOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw InvalidParams("nelder_mead needs at least one dimension");

  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  // n+1 vertices; the start point plus one step along each axis.
  std::vector<std::vector<double>> simplex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = start[i];
    simplex[i + 1][i] = base + (base != 0.0 ? options.initial_step * std::abs(base) : options.initial_step);
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = guarded(f, simplex[i]);

  std::vector<std::size_t> order(n + 1);
  OptimResult result;
  result.trace.reserve(static_cast<std::size_t>(options.max_iterations));

  auto sort_order = [&] {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    sort_order();
    const std::size_t best = order[0];
    const std::size_t worst = order[n];
    const std::size_t second_worst = order[n - 1];
    result.iterations = iter + 1;
    result.trace.push_back(fv[best]);

    // Convergence: simplex collapsed in both x and f.
    double x_spread = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      x_spread = std::max(x_spread, std::abs(simplex[worst][i] - simplex[best][i]));
    const double f_spread = fv[worst] - fv[best];
    if (x_spread < options.x_tolerance && f_spread < options.f_tolerance) {
      result.converged = true;
      break;
    }

    // Centroid of all vertices except the worst.
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto along = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
      return p;
    };

    const std::vector<double> xr = along(kReflect);
    const double fr = guarded(f, xr);

    if (fr < fv[best]) {
      const std::vector<double> xe = along(kExpand);
      const double fe = guarded(f, xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second_worst]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }

    // Contraction, outside when the reflection improved on the worst vertex.
    const bool outside = fr < fv[worst];
    const std::vector<double> xc = along(outside ? kReflect * kContract : -kContract);
    const double fc = guarded(f, xc);
    if (fc < std::min(fr, fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }

    // Shrink toward the best vertex.
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[i][j] = simplex[best][j] + kShrink * (simplex[i][j] - simplex[best][j]);
      fv[i] = guarded(f, simplex[i]);
    }
  }

  sort_order();
  result.x = simplex[order[0]];
  result.value = fv[order[0]];
  if (result.trace.empty() || result.trace.back() > result.value) result.trace.push_back(result.value);
  return result;
}

}  // namespace clpu
