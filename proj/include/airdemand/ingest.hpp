#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "airdemand/calendar.hpp"

namespace airdemand {

// One estimated air-taxi trip. Only records satisfying the invariants
// (positive duration, >= 1 passenger, in-range coordinates) survive parsing.
struct TripRecord {
  Minutes pickup_at = 0;
  Minutes dropoff_at = 0;
  long passengers = 0;
  double origin_lat = 0, origin_lon = 0;
  double dest_lat = 0, dest_lon = 0;
};

enum class Condition { Normal = 0, Snow = 1, Rain = 2, Thunderstorm = 3 };

const char* condition_name(Condition c);
std::optional<Condition> condition_from_name(const std::string& name);

// Hourly environmental observation. Continuous fields and the categorical
// ones can be individually missing; sentinel values (e.g. visibility -9999)
// are flagged as missing rather than coerced.
struct WeatherRecord {
  Minutes observed_at = 0;  // aligned to the start of an hour
  std::optional<double> temperature;
  std::optional<Condition> condition;
  std::optional<double> visibility;   // >= 0 when present
  std::optional<double> wind_speed;   // >= 0 when present
  std::optional<double> humidity;     // in [0, 100] when present
  std::optional<bool> fog;
};

struct ValidationReport {
  long total = 0;
  long accepted = 0;
  long rejected = 0;
  std::map<std::string, long> reasons;

  void reject(const std::string& reason) {
    ++rejected;
    ++reasons[reason];
  }
};

struct TripParseResult {
  std::vector<TripRecord> records;
  ValidationReport report;
};

struct WeatherParseResult {
  std::vector<WeatherRecord> records;
  ValidationReport report;
};

// Header: pickup_at,dropoff_at,passengers,origin_lat,origin_lon,dest_lat,dest_lon
// Throws FormatError on a missing/unknown header or an empty stream.
TripParseResult parse_trips(std::istream& in);

// Header: observed_at,temperature,condition,visibility,wind_speed,humidity,fog
// Negative visibility and out-of-range values become missing fields; a
// second record for an already-seen hour is rejected (first wins).
WeatherParseResult parse_weather(std::istream& in);

void serialize_trips(const std::vector<TripRecord>& trips, std::ostream& out);
void serialize_weather(const std::vector<WeatherRecord>& weather,
                       std::ostream& out);

TripParseResult parse_trips_file(const std::string& path);
WeatherParseResult parse_weather_file(const std::string& path);
void write_trips_file(const std::vector<TripRecord>& trips,
                      const std::string& path);
void write_weather_file(const std::vector<WeatherRecord>& weather,
                        const std::string& path);

}  // namespace airdemand
