#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace airdemand {

// Naive local-time handling: no timezones, no DST. Timestamps have minute
// resolution and are stored as minutes since 1970-01-01T00:00.
using Minutes = std::int64_t;

struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  friend auto operator<=>(const Date&, const Date&) = default;
};

// Days since 1970-01-01 for a civil date (valid for any Gregorian date).
std::int64_t days_from_civil(const Date& d);
Date civil_from_days(std::int64_t days);

inline Minutes minutes_from(const Date& d, int hour, int minute) {
  return days_from_civil(d) * 1440 + hour * 60 + minute;
}

Date date_of(Minutes t);
int hour_of(Minutes t);
int minute_of(Minutes t);

// 0 = Sunday .. 6 = Saturday.
int day_of_week(const Date& d);

bool is_valid_date(int year, int month, int day);

// Strict "YYYY-MM-DDTHH:MM" (a space is accepted in place of 'T').
std::optional<Minutes> parse_timestamp(const std::string& text);
std::string format_timestamp(Minutes t);

std::optional<Date> parse_date(const std::string& text);
std::string format_date(const Date& d);

extern const char* const kMonthNames[12];  // Jan..Dec
extern const char* const kDayNames[7];     // Sun..Sat

}  // namespace airdemand
