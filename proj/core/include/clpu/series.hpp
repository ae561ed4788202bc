#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "clpu/time.hpp"

namespace clpu {

/// Uniformly sampled per-interval energy record. values[i] is the energy in
/// kWh consumed over (time_at(i), time_at(i) + resolution]. Immutable by
/// convention once built.
struct EnergySeries {
  Timestamp start_time = 0;       ///< start of the first metering interval
  int resolution_minutes = 15;    ///< one of 5, 15, 30, 60
  std::vector<double> values;     ///< kWh per interval, all finite and >= 0
  std::string meter_id;

  std::size_t size() const { return values.size(); }
  std::int64_t resolution_seconds() const { return static_cast<std::int64_t>(resolution_minutes) * 60; }
  double delta_hours() const { return resolution_minutes / 60.0; }

  /// Start of interval i.
  Timestamp time_at(std::size_t i) const {
    return start_time + static_cast<std::int64_t>(i) * resolution_seconds();
  }
  /// End of the last interval, i.e. the wall-clock time of the newest
  /// metered value.
  Timestamp end_time() const {
    return start_time + static_cast<std::int64_t>(values.size()) * resolution_seconds();
  }

  /// Copy of intervals [first, first + count).
  EnergySeries slice(std::size_t first, std::size_t count) const;
  /// Copy of the last `count` intervals (or the whole series if shorter).
  EnergySeries tail(std::size_t count) const;
};

enum class DifferenceMode {
  iterated_lag1,  ///< lag-1 differencing applied d times (the conventional reading)
  single_lag_d,   ///< one lag-d difference
};

struct DifferencedSeries {
  std::size_t source_length = 0;
  int d = 0;
  DifferenceMode mode = DifferenceMode::iterated_lag1;
  std::vector<double> values;
};

/// Daily maximum interval-average power, one entry per complete calendar day.
struct PeakSeries {
  std::vector<std::int64_t> days;  ///< day indices (days since epoch), strictly increasing
  std::vector<double> peaks_kw;    ///< >= 0
  std::size_t size() const { return days.size(); }
};

struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string energy_column = "energy_kwh";
  /// Gaps of up to this many missing intervals are filled by linear
  /// interpolation; larger gaps raise NonUniformSpacing.
  int gap_fill_limit = 4;
};

/// Reads a meter CSV (header row, ISO 8601 timestamps, decimal kWh values).
/// Accepts comma-separated UTF-8 with LF or CRLF line endings.
EnergySeries ingest_csv(const std::string& path, const CsvSchema& schema = {});

/// Writes a series in the same schema ingest_csv reads.
void write_csv(const EnergySeries& series, const std::string& path, const CsvSchema& schema = {});

DifferencedSeries difference(const std::vector<double>& values, int d,
                             DifferenceMode mode = DifferenceMode::iterated_lag1);
DifferencedSeries difference(const EnergySeries& series, int d,
                             DifferenceMode mode = DifferenceMode::iterated_lag1);

/// Inverse of difference. seed_values are the d leading source values the
/// transform consumed; round-trips reproduce the source.
std::vector<double> integrate(const DifferencedSeries& diff, const std::vector<double>& seed_values);

/// Per complete calendar day, max over the day of value / (resolution in
/// hours). Partial leading and trailing days are dropped.
PeakSeries daily_peaks(const EnergySeries& series);

}  // namespace clpu
