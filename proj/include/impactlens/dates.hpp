#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace impactlens {

// Calendar date at day resolution, proleptic Gregorian, no time zones.
// Stored as days since 1970-01-01 so arithmetic is plain integer math.
class Date {
public:
  Date() = default;

  static Date from_ymd(int year, int month, int day);
  static Date from_serial(std::int64_t days_since_epoch);

  // Accepts "YYYY-MM-DD"; throws ValidationError otherwise.
  static Date parse(std::string_view text);

  std::int64_t serial() const { return serial_; }

  int year() const;
  int month() const;
  int day() const;

  // 0 = Sunday .. 6 = Saturday.
  int weekday() const;

  std::string to_string() const;

  Date operator+(std::int64_t days) const { return from_serial(serial_ + days); }
  Date operator-(std::int64_t days) const { return from_serial(serial_ - days); }
  std::int64_t operator-(const Date& other) const { return serial_ - other.serial_; }
  Date& operator++() { ++serial_; return *this; }

  auto operator<=>(const Date&) const = default;

private:
  std::int64_t serial_ = 0;
};

// Nth (1-based) occurrence of a weekday within a month, e.g. 3rd Monday of January.
Date nth_weekday_of_month(int year, int month, int weekday, int nth);

// Last occurrence of a weekday within a month, e.g. last Monday of May.
Date last_weekday_of_month(int year, int month, int weekday);

}  // namespace impactlens
