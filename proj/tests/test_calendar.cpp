#include <doctest.h>

#include "airdemand/calendar.hpp"
#include "airdemand/rng.hpp"

using namespace airdemand;

TEST_CASE("civil date conversion round-trips") {
  CHECK(days_from_civil({1970, 1, 1}) == 0);
  CHECK(days_from_civil({1970, 1, 2}) == 1);
  CHECK(days_from_civil({1969, 12, 31}) == -1);
  CHECK(days_from_civil({2015, 1, 1}) == 16436);

  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const auto days = static_cast<std::int64_t>(rng.uniform_index(80000)) - 20000;
    const Date d = civil_from_days(days);
    CHECK(days_from_civil(d) == days);
    CHECK(is_valid_date(d.year, d.month, d.day));
  }
}

TEST_CASE("day of week agrees with known anchors") {
  CHECK(day_of_week({1970, 1, 1}) == 4);   // Thursday
  CHECK(day_of_week({2000, 1, 1}) == 6);   // Saturday
  CHECK(day_of_week({2015, 1, 1}) == 4);   // Thursday
  CHECK(day_of_week({2015, 1, 4}) == 0);   // Sunday
  CHECK(day_of_week({1969, 12, 31}) == 3); // Wednesday
}

TEST_CASE("leap-year validity") {
  CHECK(is_valid_date(2000, 2, 29));
  CHECK(is_valid_date(2012, 2, 29));
  CHECK_FALSE(is_valid_date(1900, 2, 29));
  CHECK_FALSE(is_valid_date(2015, 2, 29));
  CHECK_FALSE(is_valid_date(2015, 4, 31));
  CHECK_FALSE(is_valid_date(2015, 13, 1));
  CHECK_FALSE(is_valid_date(2015, 0, 1));
}

TEST_CASE("timestamp parse and format") {
  const auto t = parse_timestamp("2015-01-05T09:30");
  REQUIRE(t.has_value());
  CHECK(date_of(*t) == Date{2015, 1, 5});
  CHECK(hour_of(*t) == 9);
  CHECK(minute_of(*t) == 30);
  CHECK(format_timestamp(*t) == "2015-01-05T09:30");

  CHECK(parse_timestamp("2015-01-05 09:30") == t);  // space separator
  CHECK_FALSE(parse_timestamp("2015-1-5T09:30").has_value());
  CHECK_FALSE(parse_timestamp("2015-01-05T9:30").has_value());
  CHECK_FALSE(parse_timestamp("2015-01-05T24:00").has_value());
  CHECK_FALSE(parse_timestamp("2015-02-29T00:00").has_value());
  CHECK_FALSE(parse_timestamp("2015-01-05T09:60").has_value());
  CHECK_FALSE(parse_timestamp("garbage").has_value());
  CHECK_FALSE(parse_timestamp("").has_value());
}

TEST_CASE("negative timestamps resolve to the prior day") {
  const Minutes t = -1;  // 1969-12-31 23:59
  CHECK(date_of(t) == Date{1969, 12, 31});
  CHECK(hour_of(t) == 23);
  CHECK(minute_of(t) == 59);
}

TEST_CASE("date parse is strict") {
  CHECK(parse_date("2015-03-31") == Date{2015, 3, 31});
  CHECK_FALSE(parse_date("2015-03-32").has_value());
  CHECK_FALSE(parse_date("2015/03/31").has_value());
  CHECK_FALSE(parse_date("15-03-31").has_value());
  CHECK(format_date({2015, 3, 31}) == "2015-03-31");
}
