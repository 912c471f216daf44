#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "airdemand/ingest.hpp"

namespace airdemand {

struct Hotspot {
  double lat = 0, lon = 0;
  double spread = 0.01;     // stddev of the isotropic draw, degrees
  double intensity = 1.0;   // relative trip weight
  int hour_phase = 0;       // shift of the hour profile for this hotspot
};

// Declarative description of a synthetic dataset. Identical (spec, seed)
// pairs generate byte-identical trip and weather files.
struct SyntheticSpec {
  long n_trips = 10000;
  Date start_date{2015, 1, 1};
  Date end_date{2015, 3, 31};  // inclusive
  std::vector<Hotspot> hotspots;
  double weekday_multiplier = 1.0;
  std::array<double, 24> hour_profile{};  // all-equal when left zeroed
  double rain_suppression = 1.0;  // intensity multiplier during rain
  double missing_rate = 0.0;      // corrupt-trip / missing-weather fraction
  double rain_probability = 0.08;
  double snow_probability = 0.03;
  double thunderstorm_probability = 0.01;

  void validate() const;  // throws ConfigError
};

struct SyntheticData {
  std::vector<TripRecord> trips;
  std::vector<WeatherRecord> weather;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec,
                                 std::uint64_t seed);

// Sidecar manifest documenting the planted signals, as a JSON string.
std::string synthetic_manifest(const SyntheticSpec& spec, std::uint64_t seed);

SyntheticSpec synthetic_spec_from_json(const std::string& json_text);

}  // namespace airdemand
