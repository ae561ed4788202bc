#include "clpu/order_select.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <thread>

#include "clpu/errors.hpp"
#include "clpu/stattests.hpp"

namespace clpu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long min_fit_length(int p, int q, int d) { return std::max<long>(50, 10L * (p + q + 1)) + d; }

struct CellFit {
  SearchCell cell;
  std::vector<double> phi;
  std::vector<double> theta;
};

/// Shared per-cell evaluation so a given (p, d, q) produces the identical
/// fit and criterion in both search methods.
class Evaluator {
 public:
  Evaluator(const EnergySeries& series, int d, const SearchConfig& cfg) : cfg_(cfg), d_(d) {
    if (cfg.criterion == SearchCriterion::holdout_mse) {
      const std::size_t h = static_cast<std::size_t>(cfg.holdout_horizon_steps);
      if (h < 1) throw InvalidParams("holdout_horizon_steps must be at least 1");
      if (series.size() <= h) throw SeriesTooShort("series does not cover the holdout window");
      train_ = series.slice(0, series.size() - h);
      holdout_.assign(series.values.end() - static_cast<long>(h), series.values.end());
    } else {
      train_ = series;
    }
    const long need = min_fit_length(cfg.p_limit, cfg.q_limit, d);
    if (static_cast<long>(train_.size()) < need)
      throw SeriesTooShort("series too short for the largest candidate fit: need " + std::to_string(need) +
                           " training observations, have " + std::to_string(train_.size()));
  }

  CellFit evaluate(int p, int q, const std::vector<double>& phi0, const std::vector<double>& theta0) const {
    const auto begin = std::chrono::steady_clock::now();
    CellFit out;
    out.cell.order = ArimaOrder{p, d_, q};
    FitOptions options = cfg_.fit;
    options.phi0 = phi0;
    options.theta0 = theta0;
    const ArimaModel model = fit(train_, out.cell.order, options);
    out.phi = model.phi;
    out.theta = model.theta;
    out.cell.converged = model.converged;
    if (cfg_.criterion == SearchCriterion::holdout_mse) {
      try {
        const std::vector<double> fc =
            forecast_step(model, train_.values, static_cast<int>(holdout_.size()));
        out.cell.criterion = mse(holdout_, fc);
      } catch (const Error&) {
        out.cell.criterion = kInf;
        out.cell.converged = false;
      }
    } else {
      out.cell.criterion = 2.0 * (p + q + 1) - 2.0 * model.loglik;
    }
    if (!std::isfinite(out.cell.criterion)) {
      out.cell.criterion = kInf;
      out.cell.converged = false;
    }
    out.cell.fit_millis =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();
    return out;
  }

 private:
  SearchConfig cfg_;
  int d_;
  EnergySeries train_;
  std::vector<double> holdout_;
};

void validate_config(const SearchConfig& cfg) {
  if (cfg.p_limit < 0 || cfg.q_limit < 0 || cfg.d_max < 0)
    throw InvalidParams("search limits must be non-negative");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) throw InvalidParams("ci_level must be in (0, 1)");
  if (!(cfg.mse_improvement_threshold > 0.0)) throw InvalidParams("mse_improvement_threshold must be > 0");
}

bool better(const SearchCell& a, const SearchCell& b) {
  // Minimal criterion; ties broken by smaller p+q, then smaller q.
  if (a.criterion != b.criterion) return a.criterion < b.criterion;
  const int sa = a.order.p + a.order.q, sb = b.order.p + b.order.q;
  if (sa != sb) return sa < sb;
  return a.order.q < b.order.q;
}

ArimaOrder choose(const std::vector<SearchCell>& cells) {
  const SearchCell* best = nullptr;
  for (const SearchCell& c : cells) {
    if (!c.converged) continue;
    if (best == nullptr || better(c, *best)) best = &c;
  }
  if (best == nullptr) throw NoConvergedCell("every candidate fit diverged");
  return best->order;
}

/// Grid storage addressed by (p, q).
class Grid {
 public:
  Grid(int p_limit, int q_limit) : q_stride_(q_limit + 1), cells_((p_limit + 1) * (q_limit + 1)) {}
  std::optional<CellFit>& at(int p, int q) { return cells_[static_cast<std::size_t>(p * q_stride_ + q)]; }
  const std::optional<CellFit>& at(int p, int q) const {
    return cells_[static_cast<std::size_t>(p * q_stride_ + q)];
  }

 private:
  int q_stride_;
  std::vector<std::optional<CellFit>> cells_;
};

/// Marginal row (q = 0) and column (p = 0) fits, each warm-started from its
/// predecessor. These seed the interior cells of the joint grid.
void evaluate_margins(const Evaluator& ev, Grid& grid, int p_hi, int q_hi) {
  if (!grid.at(0, 0)) grid.at(0, 0) = ev.evaluate(0, 0, {}, {});
  for (int p = 1; p <= p_hi; ++p) {
    if (grid.at(p, 0)) continue;
    std::vector<double> phi0 = grid.at(p - 1, 0)->phi;
    phi0.push_back(0.0);
    grid.at(p, 0) = ev.evaluate(p, 0, phi0, {});
  }
  for (int q = 1; q <= q_hi; ++q) {
    if (grid.at(0, q)) continue;
    std::vector<double> theta0 = grid.at(0, q - 1)->theta;
    theta0.push_back(0.0);
    grid.at(0, q) = ev.evaluate(0, q, {}, theta0);
  }
}

/// Interior cells (p >= 1, q >= 1) warm-started from the margins; cells are
/// independent, so they may be evaluated concurrently.
void evaluate_interior(const Evaluator& ev, Grid& grid, int p_hi, int q_hi, int jobs) {
  std::vector<std::pair<int, int>> todo;
  for (int p = 1; p <= p_hi; ++p)
    for (int q = 1; q <= q_hi; ++q)
      if (!grid.at(p, q)) todo.emplace_back(p, q);
  if (todo.empty()) return;

  const auto work = [&](const std::pair<int, int>& pq) {
    const auto [p, q] = pq;
    const CellFit& row = *grid.at(p, 0);
    const CellFit& col = *grid.at(0, q);
    const std::vector<double> phi0 =
        row.cell.converged ? row.phi : std::vector<double>(static_cast<std::size_t>(p), 0.0);
    const std::vector<double> theta0 =
        col.cell.converged ? col.theta : std::vector<double>(static_cast<std::size_t>(q), 0.0);
    grid.at(p, q) = ev.evaluate(p, q, phi0, theta0);
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(todo.size())));
  if (n_threads == 1) {
    for (const auto& pq : todo) work(pq);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i)
    pool.emplace_back([&] {
      for (std::size_t k = next.fetch_add(1); k < todo.size(); k = next.fetch_add(1)) work(todo[k]);
    });
  for (std::thread& t : pool) t.join();
}

double run_marginal_scan(const Evaluator& ev, Grid& grid, int cap, bool scan_p, double base_criterion,
                         const SearchConfig& cfg, int& out_max) {
  out_max = 0;
  double prev = base_criterion;
  for (int k = 1; k <= cap; ++k) {
    std::optional<CellFit>& slot = scan_p ? grid.at(k, 0) : grid.at(0, k);
    if (!slot) {
      const CellFit& before = scan_p ? *grid.at(k - 1, 0) : *grid.at(0, k - 1);
      if (scan_p) {
        std::vector<double> phi0 = before.phi;
        phi0.push_back(0.0);
        slot = ev.evaluate(k, 0, phi0, {});
      } else {
        std::vector<double> theta0 = before.theta;
        theta0.push_back(0.0);
        slot = ev.evaluate(0, k, {}, theta0);
      }
    }
    const SearchCell& cell = slot->cell;
    if (!cell.converged) break;
    bool material;
    if (cfg.criterion == SearchCriterion::holdout_mse) {
      if (!(prev > 0.0)) break;
      material = (prev - cell.criterion) / prev > cfg.mse_improvement_threshold;
    } else {
      // AIC is not scale-free; use the conventional two-unit difference.
      material = prev - cell.criterion > 2.0;
    }
    if (!material) break;
    out_max = k;
    prev = cell.criterion;
  }
  return prev;
}

SearchResult finish(Grid& grid, const std::vector<std::pair<int, int>>& order, SearchMethod method,
                    int p_max, int q_max, int d, bool d_adequate,
                    std::chrono::steady_clock::time_point begin) {
  SearchResult result;
  result.method = method;
  result.p_max = p_max;
  result.q_max = q_max;
  result.d = d;
  result.d_adequate = d_adequate;
  result.cells_evaluated.reserve(order.size());
  for (const auto& [p, q] : order) result.cells_evaluated.push_back(grid.at(p, q)->cell);
  result.chosen = choose(result.cells_evaluated);
  result.elapsed_millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin).count();
  return result;
}

}  // namespace

SearchResult full_grid_search(const EnergySeries& series, const SearchConfig& cfg) {
  validate_config(cfg);
  const auto begin = std::chrono::steady_clock::now();
  const DSelection ds = select_d(series.values, cfg.d_max);
  const Evaluator ev(series, ds.d, cfg);

  Grid grid(cfg.p_limit, cfg.q_limit);
  evaluate_margins(ev, grid, cfg.p_limit, cfg.q_limit);
  evaluate_interior(ev, grid, cfg.p_limit, cfg.q_limit, cfg.jobs);

  std::vector<std::pair<int, int>> order;
  for (int p = 0; p <= cfg.p_limit; ++p)
    for (int q = 0; q <= cfg.q_limit; ++q) order.emplace_back(p, q);
  return finish(grid, order, SearchMethod::full, cfg.p_limit, cfg.q_limit, ds.d, ds.adequate, begin);
}

SearchResult reduced_grid_search(const EnergySeries& series, const SearchConfig& cfg) {
  validate_config(cfg);
  const auto begin = std::chrono::steady_clock::now();
  const DSelection ds = select_d(series.values, cfg.d_max);
  const Evaluator ev(series, ds.d, cfg);

  // Candidate caps from the correlograms of the differenced series.
  const std::vector<double> w = difference(series.values, ds.d, DifferenceMode::iterated_lag1).values;
  const int lag_room = static_cast<int>(w.size()) / 2 - 1;
  const int max_lag = std::max(1, std::min(lag_room, std::max(24, std::max(cfg.p_limit, cfg.q_limit))));
  int p_cap = cfg.p_limit;
  int q_cap = cfg.q_limit;
  try {
    p_cap = std::min(pacf(w, max_lag, cfg.ci_level).n_significant, cfg.p_limit);
    q_cap = std::min(acf(w, max_lag, cfg.ci_level).n_significant, cfg.q_limit);
  } catch (const ConstantSeries&) {
    p_cap = 0;
    q_cap = 0;
  }

  Grid grid(cfg.p_limit, cfg.q_limit);
  grid.at(0, 0) = ev.evaluate(0, 0, {}, {});
  const double base = grid.at(0, 0)->cell.criterion;
  const bool base_ok = grid.at(0, 0)->cell.converged;

  int p_max = 0, q_max = 0;
  if (base_ok) {
    run_marginal_scan(ev, grid, p_cap, true, base, cfg, p_max);
    run_marginal_scan(ev, grid, q_cap, false, base, cfg, q_max);
  } else {
    // No converged anchor for the trend rule; fall back to the correlogram
    // caps alone.
    p_max = p_cap;
    q_max = q_cap;
  }

  evaluate_margins(ev, grid, p_max, q_max);
  evaluate_interior(ev, grid, p_max, q_max, cfg.jobs);

  // Deterministic listing: scan probes first (rows then columns), then the
  // joint-grid interior.
  std::vector<std::pair<int, int>> order;
  order.emplace_back(0, 0);
  for (int p = 1; p <= cfg.p_limit && grid.at(p, 0); ++p) order.emplace_back(p, 0);
  for (int q = 1; q <= cfg.q_limit && grid.at(0, q); ++q) order.emplace_back(0, q);
  for (int p = 1; p <= p_max; ++p)
    for (int q = 1; q <= q_max; ++q) order.emplace_back(p, q);
  return finish(grid, order, SearchMethod::reduced, p_max, q_max, ds.d, ds.adequate, begin);
}

bool should_refresh(Timestamp last_refresh, Timestamp now, bool last_fit_converged, int refresh_days) {
  if (!last_fit_converged) return true;
  return now - last_refresh >= static_cast<Timestamp>(refresh_days) * kSecondsPerDay;
}

void write_cells_csv(const SearchResult& result, const std::string& path, bool zero_timing) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "p,d,q,criterion,converged,fit_millis\n";
  char buf[160];
  for (const SearchCell& c : result.cells_evaluated) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.12g,%d,%.3f\n", c.order.p, c.order.d, c.order.q,
                  c.criterion, c.converged ? 1 : 0, zero_timing ? 0.0 : c.fit_millis);
    out << buf;
  }
}

}  // namespace clpu
