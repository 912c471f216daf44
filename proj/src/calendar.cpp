#include "airdemand/calendar.hpp"

#include <cstdio>

namespace airdemand {

const char* const kMonthNames[12] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                     "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
const char* const kDayNames[7] = {"Sun", "Mon", "Tue", "Wed",
                                  "Thu", "Fri", "Sat"};

std::int64_t days_from_civil(const Date& d) {
  // Howard Hinnant's algorithm, epoch shifted to 1970-01-01.
  std::int64_t y = d.year;
  const int m = d.month;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(d)};
}

Date date_of(Minutes t) {
  std::int64_t days = t / 1440;
  if (t < 0 && t % 1440 != 0) --days;
  return civil_from_days(days);
}

int hour_of(Minutes t) {
  std::int64_t m = t % 1440;
  if (m < 0) m += 1440;
  return static_cast<int>(m / 60);
}

int minute_of(Minutes t) {
  std::int64_t m = t % 60;
  if (m < 0) m += 60;
  return static_cast<int>(m);
}

int day_of_week(const Date& d) {
  std::int64_t days = days_from_civil(d);
  std::int64_t w = (days + 4) % 7;  // 1970-01-01 was a Thursday
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

bool is_valid_date(int year, int month, int day) {
  if (month < 1 || month > 12 || day < 1) return false;
  static const int len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int n = len[month - 1];
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) n = 29;
  return day <= n;
}

namespace {

bool parse_int(const std::string& s, size_t pos, size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<Minutes> parse_timestamp(const std::string& text) {
  // YYYY-MM-DDTHH:MM
  if (text.size() != 16) return std::nullopt;
  int y, mo, d, h, mi;
  if (!parse_int(text, 0, 4, y) || text[4] != '-' ||
      !parse_int(text, 5, 2, mo) || text[7] != '-' ||
      !parse_int(text, 8, 2, d) ||
      (text[10] != 'T' && text[10] != ' ') ||
      !parse_int(text, 11, 2, h) || text[13] != ':' ||
      !parse_int(text, 14, 2, mi)) {
    return std::nullopt;
  }
  if (!is_valid_date(y, mo, d) || h > 23 || mi > 59) return std::nullopt;
  return minutes_from(Date{y, mo, d}, h, mi);
}

std::string format_timestamp(Minutes t) {
  const Date d = date_of(t);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", d.year, d.month,
                d.day, hour_of(t), minute_of(t));
  return buf;
}

std::optional<Date> parse_date(const std::string& text) {
  if (text.size() != 10) return std::nullopt;
  int y, mo, d;
  if (!parse_int(text, 0, 4, y) || text[4] != '-' ||
      !parse_int(text, 5, 2, mo) || text[7] != '-' ||
      !parse_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  if (!is_valid_date(y, mo, d)) return std::nullopt;
  return Date{y, mo, d};
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

}  // namespace airdemand
