#include "impactlens/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "impactlens/errors.hpp"

namespace impactlens {

namespace {

bool is_leap(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[static_cast<std::size_t>(m - 1)];
}

// Days since 1970-01-01 for a civil date (Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  int year;
  int month;
  int day;
};

Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  if (month < 1 || month > 12)
    throw ValidationError("invalid month: " + std::to_string(month));
  if (day < 1 || day > days_in_month(year, month))
    throw ValidationError("invalid day " + std::to_string(day) + " for " +
                          std::to_string(year) + "-" + std::to_string(month));
  Date out;
  out.serial_ = days_from_civil(year, month, day);
  return out;
}

Date Date::from_serial(std::int64_t days_since_epoch) {
  Date out;
  out.serial_ = days_since_epoch;
  return out;
}

Date Date::parse(std::string_view text) {
  // Expect exactly YYYY-MM-DD; longer strings (timestamps) are trimmed by the
  // caller where that is intentional.
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw ValidationError("unparseable date: '" + std::string(text) + "'");
  int y = 0, m = 0, d = 0;
  auto field = [&](std::size_t pos, std::size_t len, int& out) {
    auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (res.ec != std::errc{} || res.ptr != text.data() + pos + len)
      throw ValidationError("unparseable date: '" + std::string(text) + "'");
  };
  field(0, 4, y);
  field(5, 2, m);
  field(8, 2, d);
  return from_ymd(y, m, d);
}

int Date::year() const { return civil_from_days(serial_).year; }
int Date::month() const { return civil_from_days(serial_).month; }
int Date::day() const { return civil_from_days(serial_).day; }

int Date::weekday() const {
  // 1970-01-01 was a Thursday (weekday 4).
  std::int64_t w = (serial_ + 4) % 7;
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

std::string Date::to_string() const {
  const Civil c = civil_from_days(serial_);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

Date nth_weekday_of_month(int year, int month, int weekday, int nth) {
  const Date first = Date::from_ymd(year, month, 1);
  int offset = (weekday - first.weekday() + 7) % 7;
  return first + (offset + 7 * (nth - 1));
}

Date last_weekday_of_month(int year, int month, int weekday) {
  const Date last = Date::from_ymd(year, month, days_in_month(year, month));
  int offset = (last.weekday() - weekday + 7) % 7;
  return last - offset;
}

}  // namespace impactlens
