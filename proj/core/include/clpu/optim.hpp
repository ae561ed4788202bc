#pragma once

#include <functional>
#include <vector>

namespace clpu {

struct OptimOptions {
  int max_iterations = 500;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-8;
  double initial_step = 0.1;  ///< simplex edge length around the start point
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  ///< best objective value after each iteration, non-increasing
};

/// Minimizes f by the Nelder-Mead simplex method. Convergence requires both
/// the simplex diameter below x_tolerance and the objective spread below
/// f_tolerance; hitting max_iterations first leaves converged == false.
/// Non-finite objective values are treated as +infinity.
OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                        const std::vector<double>& start, const OptimOptions& options = {});

}  // namespace clpu
