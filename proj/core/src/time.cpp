#include "clpu/time.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "clpu/errors.hpp"

namespace clpu {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const char* first = s.data() + pos;
  auto [p, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && p == first + len;
}

}  // namespace

Timestamp parse_iso8601(std::string_view text) {
  // Trim surrounding whitespace.
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  auto fail = [&]() -> Timestamp {
    throw MalformedRow("unparseable timestamp: '" + std::string(text) + "'");
  };

  int year, month, day, hour, minute, second = 0;
  if (text.size() < 16) return fail();
  if (!parse_int(text, 0, 4, year) || text[4] != '-' || !parse_int(text, 5, 2, month) ||
      text[7] != '-' || !parse_int(text, 8, 2, day))
    return fail();
  if (text[10] != 'T' && text[10] != ' ') return fail();
  if (!parse_int(text, 11, 2, hour) || text[13] != ':' || !parse_int(text, 14, 2, minute))
    return fail();

  std::size_t pos = 16;
  if (pos < text.size() && text[pos] == ':') {
    if (!parse_int(text, pos + 1, 2, second)) return fail();
    pos += 3;
  }

  std::int64_t offset = 0;
  if (pos < text.size()) {
    const char c = text[pos];
    if (c == 'Z' && pos + 1 == text.size()) {
      // UTC marker
    } else if ((c == '+' || c == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
      int oh, om;
      if (!parse_int(text, pos + 1, 2, oh) || !parse_int(text, pos + 4, 2, om)) return fail();
      offset = (c == '+' ? 1 : -1) * (oh * 3600 + om * 60);
    } else {
      return fail();
    }
  }

  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    return fail();

  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return days * kSecondsPerDay + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601(Timestamp t) {
  const std::int64_t d = day_index(t);
  std::int64_t s = t - d * kSecondsPerDay;
  int y;
  unsigned m, dd;
  civil_from_days(d, y, m, dd);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", y, m, dd,
                static_cast<int>(s / 3600), static_cast<int>((s / 60) % 60), static_cast<int>(s % 60));
  return buf;
}

std::string format_date(std::int64_t di) {
  int y;
  unsigned m, dd;
  civil_from_days(di, y, m, dd);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, dd);
  return buf;
}

}  // namespace clpu
