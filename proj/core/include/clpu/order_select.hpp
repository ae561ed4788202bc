#pragma once

#include <string>
#include <vector>

#include "clpu/arima.hpp"
#include "clpu/series.hpp"
#include "clpu/time.hpp"

namespace clpu {

enum class SearchCriterion { holdout_mse, aic };
enum class SearchMethod { full, reduced };

struct SearchConfig {
  int p_limit = 8;
  int q_limit = 8;
  int d_max = 2;
  double ci_level = 0.95;
  /// Relative holdout-MSE improvement below which a marginal order increase
  /// is treated as insignificant.
  double mse_improvement_threshold = 0.01;
  int holdout_horizon_steps = 48;
  SearchCriterion criterion = SearchCriterion::holdout_mse;
  int jobs = 1;  ///< grid cells evaluated concurrently; result is order-independent
  FitOptions fit;
};

struct SearchCell {
  ArimaOrder order;
  double criterion = 0.0;
  bool converged = false;
  double fit_millis = 0.0;
};

struct SearchResult {
  ArimaOrder chosen;
  int p_max = 0;  ///< joint-grid cap on p
  int q_max = 0;  ///< joint-grid cap on q
  int d = 0;
  bool d_adequate = true;  ///< false when no d <= d_max reached stationarity
  /// Every evaluated cell in a fixed evaluation order; includes the marginal
  /// scan probes of the reduced method. chosen minimizes the criterion over
  /// the converged cells, ties broken by smaller p+q then smaller q.
  std::vector<SearchCell> cells_evaluated;
  double elapsed_millis = 0.0;
  SearchMethod method = SearchMethod::full;
};

/// Evaluates every (p, q) in [0..p_limit] x [0..q_limit] at the d chosen by
/// select_d. Criterion: MSE of the recursive multi-step forecast over the
/// trailing holdout_horizon_steps observations (fit on the remainder), or
/// AIC of the full-sample fit.
SearchResult full_grid_search(const EnergySeries& series, const SearchConfig& cfg);

/// Correlogram-bounded search: caps p by the significant PACF lag count and
/// q by the significant ACF lag count, tightens the caps by marginal scans
/// that stop at the first insignificant MSE improvement, then searches the
/// reduced joint grid. Cell fits are identical to full_grid_search's, so the
/// full search dominates on the criterion by construction.
SearchResult reduced_grid_search(const EnergySeries& series, const SearchConfig& cfg);

/// Weekly refresh, retriggered immediately by estimation divergence.
bool should_refresh(Timestamp last_refresh, Timestamp now, bool last_fit_converged,
                    int refresh_days = 7);

/// CSV export (p, d, q, criterion, converged, fit_millis). zero_timing
/// blanks the wall-clock column so exports are byte-stable under a seed.
void write_cells_csv(const SearchResult& result, const std::string& path, bool zero_timing = false);

}  // namespace clpu
