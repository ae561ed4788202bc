#include "clpu/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clpu/errors.hpp"

namespace clpu {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

EnergySeries EnergySeries::slice(std::size_t first, std::size_t count) const {
  EnergySeries out;
  out.start_time = time_at(first);
  out.resolution_minutes = resolution_minutes;
  out.meter_id = meter_id;
  const std::size_t end = std::min(first + count, values.size());
  if (first < end) out.values.assign(values.begin() + first, values.begin() + end);
  return out;
}

EnergySeries EnergySeries::tail(std::size_t count) const {
  if (count >= values.size()) return *this;
  return slice(values.size() - count, count);
}

EnergySeries ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw EmptyFile("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw EmptyFile("empty file: " + path);

  // Strip a UTF-8 BOM if present.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  int ts_col = -1, en_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = trim(header[i]);
    if (name == schema.timestamp_column) ts_col = static_cast<int>(i);
    if (name == schema.energy_column) en_col = static_cast<int>(i);
  }
  if (ts_col < 0 || en_col < 0)
    throw MalformedRow("header is missing column '" +
                       (ts_col < 0 ? schema.timestamp_column : schema.energy_column) + "'");

  std::vector<Timestamp> times;
  std::vector<double> raw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() <= static_cast<std::size_t>(std::max(ts_col, en_col)))
      throw MalformedRow("line " + std::to_string(line_no) + ": too few columns");
    Timestamp t;
    try {
      t = parse_iso8601(fields[ts_col]);
    } catch (const MalformedRow&) {
      throw MalformedRow("line " + std::to_string(line_no) + ": bad timestamp '" + fields[ts_col] + "'");
    }
    double v;
    try {
      std::size_t used = 0;
      v = std::stod(trim(fields[en_col]), &used);
      if (used != trim(fields[en_col]).size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw MalformedRow("line " + std::to_string(line_no) + ": bad energy value '" + fields[en_col] + "'");
    }
    if (!std::isfinite(v) || v < 0.0)
      throw MalformedRow("line " + std::to_string(line_no) + ": energy must be finite and >= 0");
    times.push_back(t);
    raw.push_back(v);
  }
  if (times.empty()) throw EmptyFile("no data rows in: " + path);

  EnergySeries out;
  out.start_time = times.front();
  out.meter_id = path;

  // Infer the metering resolution from the first gap; a single-row file
  // defaults to 15 minutes.
  std::int64_t step = 15 * 60;
  if (times.size() >= 2) {
    step = times[1] - times[0];
    bool ok = false;
    for (int r : {5, 15, 30, 60})
      if (step == static_cast<std::int64_t>(r) * 60) ok = true;
    if (!ok)
      throw NonUniformSpacing("interval between first two rows is " + std::to_string(step) +
                              " s; expected 5, 15, 30 or 60 minutes");
  }
  out.resolution_minutes = static_cast<int>(step / 60);

  out.values.push_back(raw[0]);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const std::int64_t gap = times[i] - times[i - 1];
    if (gap <= 0)
      throw NonUniformSpacing("row " + std::to_string(i + 2) + ": timestamps not strictly increasing");
    if (gap % step != 0)
      throw NonUniformSpacing("row " + std::to_string(i + 2) + ": spacing " + std::to_string(gap) +
                              " s is not a multiple of the " + std::to_string(step) + " s resolution");
    const std::int64_t missing = gap / step - 1;
    if (missing > schema.gap_fill_limit)
      throw NonUniformSpacing("row " + std::to_string(i + 2) + ": gap of " + std::to_string(missing) +
                              " intervals exceeds the fill limit of " +
                              std::to_string(schema.gap_fill_limit));
    for (std::int64_t k = 1; k <= missing; ++k) {
      const double f = static_cast<double>(k) / static_cast<double>(missing + 1);
      out.values.push_back(raw[i - 1] + f * (raw[i] - raw[i - 1]));
    }
    out.values.push_back(raw[i]);
  }
  return out;
}

void write_csv(const EnergySeries& series, const std::string& path, const CsvSchema& schema) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write file: " + path);
  os << schema.timestamp_column << "," << schema.energy_column << "\n";
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g", series.values[i]);
    os << format_iso8601(series.time_at(i)) << "," << buf << "\n";
  }
}

DifferencedSeries difference(const std::vector<double>& values, int d, DifferenceMode mode) {
  if (d < 0) throw DataError("difference order must be >= 0");
  if (static_cast<std::size_t>(d) >= values.size() && d > 0)
    throw InsufficientLength("series length " + std::to_string(values.size()) +
                             " too short for d=" + std::to_string(d));
  DifferencedSeries out;
  out.source_length = values.size();
  out.d = d;
  out.mode = mode;
  if (d == 0) {
    out.values = values;
    return out;
  }
  if (mode == DifferenceMode::single_lag_d) {
    out.values.reserve(values.size() - d);
    for (std::size_t t = d; t < values.size(); ++t)
      out.values.push_back(values[t] - values[t - d]);
    return out;
  }
  std::vector<double> w = values;
  for (int k = 0; k < d; ++k) {
    std::vector<double> next(w.size() - 1);
    for (std::size_t t = 1; t < w.size(); ++t) next[t - 1] = w[t] - w[t - 1];
    w = std::move(next);
  }
  out.values = std::move(w);
  return out;
}

DifferencedSeries difference(const EnergySeries& series, int d, DifferenceMode mode) {
  return difference(series.values, d, mode);
}

std::vector<double> integrate(const DifferencedSeries& diff, const std::vector<double>& seed_values) {
  const int d = diff.d;
  if (seed_values.size() != static_cast<std::size_t>(d))
    throw SeedLengthMismatch("expected " + std::to_string(d) + " seed values, got " +
                             std::to_string(seed_values.size()));
  if (d == 0) return diff.values;

  if (diff.mode == DifferenceMode::single_lag_d) {
    std::vector<double> x(seed_values);
    x.reserve(d + diff.values.size());
    for (std::size_t t = 0; t < diff.values.size(); ++t)
      x.push_back(diff.values[t] + x[x.size() - d]);
    return x;
  }

  // Iterated mode: rebuild the difference triangle of the seed to get the
  // leading value at every level, then integrate one level at a time.
  std::vector<std::vector<double>> tri;  // tri[k] = k-th differences of the seed
  tri.push_back(seed_values);
  for (int k = 1; k < d; ++k) {
    const auto& prev = tri.back();
    std::vector<double> next(prev.size() - 1);
    for (std::size_t t = 1; t < prev.size(); ++t) next[t - 1] = prev[t] - prev[t - 1];
    tri.push_back(std::move(next));
  }

  std::vector<double> cur = diff.values;  // level d
  for (int k = d - 1; k >= 0; --k) {
    // Level k starts at tri[k][0]; the reconstructed level k+1 supplies every
    // following increment, so only that one leading value is prepended.
    std::vector<double> next;
    next.reserve(1 + cur.size());
    next.push_back(tri[k].front());
    for (double w : cur) next.push_back(next.back() + w);
    cur = std::move(next);
  }
  return cur;
}

PeakSeries daily_peaks(const EnergySeries& series) {
  const double dh = series.delta_hours();
  const std::int64_t per_day = (24LL * 3600) / series.resolution_seconds();

  PeakSeries out;
  std::int64_t cur_day = -1;
  std::int64_t count = 0;
  double best = 0.0;
  bool day_started_at_midnight = false;

  auto flush = [&]() {
    if (cur_day >= 0 && day_started_at_midnight && count == per_day) {
      out.days.push_back(cur_day);
      out.peaks_kw.push_back(best);
    }
  };

  for (std::size_t i = 0; i < series.size(); ++i) {
    const Timestamp t = series.time_at(i);
    const std::int64_t di = day_index(t);
    if (di != cur_day) {
      flush();
      cur_day = di;
      count = 0;
      best = 0.0;
      day_started_at_midnight = (t == di * kSecondsPerDay);
    }
    ++count;
    best = std::max(best, series.values[i] / dh);
  }
  flush();

  if (out.days.empty()) throw NoCompleteDay("series does not span a complete calendar day");
  return out;
}

}  // namespace clpu
