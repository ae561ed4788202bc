#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace clpu {

/// Seconds since the Unix epoch, UTC. All calendar arithmetic in this
/// toolkit is UTC; there is no local-time or DST handling.
using Timestamp = std::int64_t;

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kSecondsPerHour = 3600;

/// Parses "YYYY-MM-DD HH:MM[:SS]" or "YYYY-MM-DDTHH:MM[:SS]", with an
/// optional trailing "Z" or "+hh:mm"/"-hh:mm" offset. Throws MalformedRow.
Timestamp parse_iso8601(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

/// Formats the calendar date "YYYY-MM-DD" of the given day index.
std::string format_date(std::int64_t day_index);

/// Calendar day containing t (floor division, valid for t < 0 too).
inline std::int64_t day_index(Timestamp t) {
  std::int64_t d = t / kSecondsPerDay;
  if (t % kSecondsPerDay < 0) --d;
  return d;
}

/// Hour of day in [0, 24).
inline int hour_of_day(Timestamp t) {
  std::int64_t s = t - day_index(t) * kSecondsPerDay;
  return static_cast<int>(s / kSecondsPerHour);
}

}  // namespace clpu
