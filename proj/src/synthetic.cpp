#include "airdemand/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "airdemand/errors.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

constexpr double kTau = 6.283185307179586;

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_trips < 1) throw ConfigError("synthetic: n_trips must be >= 1");
  if (days_from_civil(end_date) < days_from_civil(start_date))
    throw ConfigError("synthetic: empty date range");
  if (hotspots.empty()) throw ConfigError("synthetic: zero hotspots");
  double total_intensity = 0;
  for (const auto& h : hotspots) {
    if (h.intensity < 0) throw ConfigError("synthetic: negative hotspot intensity");
    if (h.spread <= 0) throw ConfigError("synthetic: hotspot spread must be > 0");
    total_intensity += h.intensity;
  }
  if (total_intensity <= 0)
    throw ConfigError("synthetic: all hotspot intensities are zero");
  if (weekday_multiplier <= 0)
    throw ConfigError("synthetic: weekday_multiplier must be > 0");
  for (const double p : hour_profile)
    if (p < 0) throw ConfigError("synthetic: negative hour profile weight");
  if (rain_suppression < 0)
    throw ConfigError("synthetic: rain_suppression must be >= 0");
  if (missing_rate < 0 || missing_rate > 1)
    throw ConfigError("synthetic: missing_rate must be in [0, 1]");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec,
                                 std::uint64_t seed) {
  spec.validate();

  std::array<double, 24> profile = spec.hour_profile;
  if (std::all_of(profile.begin(), profile.end(),
                  [](double v) { return v == 0.0; }))
    profile.fill(1.0);

  const std::int64_t first_day = days_from_civil(spec.start_date);
  const std::int64_t last_day = days_from_civil(spec.end_date);
  const int n_days = static_cast<int>(last_day - first_day + 1);
  const int n_hotspots = static_cast<int>(spec.hotspots.size());

  SyntheticData out;

  // Hourly weather series over the full range.
  Rng wrng(derive_seed(seed, "synthetic/weather"));
  std::vector<bool> rainy(static_cast<std::size_t>(n_days) * 24, false);
  out.weather.reserve(rainy.size());
  for (int d = 0; d < n_days; ++d) {
    const Date date = civil_from_days(first_day + d);
    const int doy = static_cast<int>(first_day + d - days_from_civil(Date{date.year, 1, 1}));
    for (int h = 0; h < 24; ++h) {
      WeatherRecord rec;
      rec.observed_at = (first_day + d) * 1440 + h * 60;
      const double u = wrng.uniform();
      Condition cond = Condition::Normal;
      if (u < spec.rain_probability)
        cond = Condition::Rain;
      else if (u < spec.rain_probability + spec.snow_probability)
        cond = Condition::Snow;
      else if (u < spec.rain_probability + spec.snow_probability +
                       spec.thunderstorm_probability)
        cond = Condition::Thunderstorm;
      rec.condition = cond;
      const bool wet = cond != Condition::Normal;
      rainy[static_cast<std::size_t>(d) * 24 + h] = wet;

      const double seasonal = 10.0 - 12.0 * std::cos(kTau * doy / 365.0);
      const double diurnal = 4.0 * std::sin(kTau * (h - 9) / 24.0);
      rec.temperature = seasonal + diurnal + wrng.normal(0, 2);

      double vis = 10.0 + wrng.normal(0, 1);
      if (cond == Condition::Rain) vis -= 4;
      if (cond == Condition::Snow) vis -= 5;
      if (cond == Condition::Thunderstorm) vis -= 6;
      rec.visibility = clamp(vis, 0.2, 12.0);

      rec.wind_speed = clamp(std::abs(wrng.normal(8, 4)), 0.0, 60.0);
      double hum = wrng.normal(55, 15) + (wet ? 25.0 : 0.0);
      rec.humidity = clamp(hum, 5.0, 100.0);
      rec.fog = *rec.humidity > 88.0 && *rec.visibility < 6.0;

      if (spec.missing_rate > 0 && wrng.bernoulli(spec.missing_rate)) {
        switch (wrng.uniform_index(5)) {
          case 0: rec.temperature.reset(); break;
          case 1: rec.visibility.reset(); break;  // serialized as -9999
          case 2: rec.wind_speed.reset(); break;
          case 3: rec.humidity.reset(); break;
          case 4: rec.condition.reset(); break;
        }
      }
      out.weather.push_back(rec);
    }
  }

  // Trip intensity per (day, hour, hotspot) cell.
  std::vector<double> cum;
  cum.reserve(static_cast<std::size_t>(n_days) * 24 * n_hotspots);
  double total = 0;
  for (int d = 0; d < n_days; ++d) {
    const Date date = civil_from_days(first_day + d);
    const int dow = day_of_week(date);
    const bool weekday = dow >= 1 && dow <= 5;
    const double day_w = weekday ? spec.weekday_multiplier : 1.0;
    for (int h = 0; h < 24; ++h) {
      const double rain_w =
          rainy[static_cast<std::size_t>(d) * 24 + h] ? spec.rain_suppression : 1.0;
      for (int s = 0; s < n_hotspots; ++s) {
        const int shifted = ((h - spec.hotspots[s].hour_phase) % 24 + 24) % 24;
        total += day_w * rain_w * spec.hotspots[s].intensity * profile[shifted];
        cum.push_back(total);
      }
    }
  }
  if (total <= 0) throw ConfigError("synthetic: all cell intensities are zero");

  Rng trng(derive_seed(seed, "synthetic/trips"));
  out.trips.reserve(spec.n_trips);
  for (long i = 0; i < spec.n_trips; ++i) {
    const double u = trng.uniform() * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t cell = static_cast<std::size_t>(it - cum.begin());
    if (cell >= cum.size()) cell = cum.size() - 1;
    const int s = static_cast<int>(cell % n_hotspots);
    const int h = static_cast<int>((cell / n_hotspots) % 24);
    const int d = static_cast<int>(cell / n_hotspots / 24);
    const Hotspot& spot = spec.hotspots[s];

    TripRecord trip;
    trip.pickup_at =
        (first_day + d) * 1440 + h * 60 + static_cast<int>(trng.uniform_index(60));
    trip.dropoff_at = trip.pickup_at + 8 + static_cast<int>(trng.uniform_index(33));
    const double pu = trng.uniform();
    trip.passengers = pu < 0.70 ? 1 : pu < 0.90 ? 2 : pu < 0.97 ? 3 : 4;
    trip.origin_lat = clamp(spot.lat + trng.normal(0, spot.spread), -90, 90);
    trip.origin_lon = clamp(spot.lon + trng.normal(0, spot.spread), -180, 180);
    const Hotspot& dest = spec.hotspots[trng.uniform_index(n_hotspots)];
    trip.dest_lat = clamp(dest.lat + trng.normal(0, dest.spread), -90, 90);
    trip.dest_lon = clamp(dest.lon + trng.normal(0, dest.spread), -180, 180);

    if (spec.missing_rate > 0 && trng.bernoulli(spec.missing_rate)) {
      switch (trng.uniform_index(3)) {
        case 0: trip.dropoff_at = trip.pickup_at; break;
        case 1: trip.passengers = 0; break;
        case 2: trip.origin_lat = 95.0; break;
      }
    }
    out.trips.push_back(trip);
  }
  std::stable_sort(out.trips.begin(), out.trips.end(),
                   [](const TripRecord& a, const TripRecord& b) {
                     return a.pickup_at < b.pickup_at;
                   });
  return out;
}

std::string synthetic_manifest(const SyntheticSpec& spec, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["n_trips"] = spec.n_trips;
  j["start_date"] = format_date(spec.start_date);
  j["end_date"] = format_date(spec.end_date);
  nlohmann::json spots = nlohmann::json::array();
  for (const auto& h : spec.hotspots) {
    spots.push_back({{"lat", h.lat},
                     {"lon", h.lon},
                     {"spread", h.spread},
                     {"intensity", h.intensity},
                     {"hour_phase", h.hour_phase}});
  }
  j["hotspots"] = spots;
  j["weekday_multiplier"] = spec.weekday_multiplier;
  j["hour_profile"] = spec.hour_profile;
  j["rain_suppression"] = spec.rain_suppression;
  j["missing_rate"] = spec.missing_rate;
  j["rain_probability"] = spec.rain_probability;
  j["snow_probability"] = spec.snow_probability;
  j["thunderstorm_probability"] = spec.thunderstorm_probability;
  return j.dump(2) + "\n";
}

SyntheticSpec synthetic_spec_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    if (j.contains("n_trips")) spec.n_trips = j["n_trips"].get<long>();
    if (j.contains("start_date")) {
      const auto d = parse_date(j["start_date"].get<std::string>());
      if (!d) throw ConfigError("synthetic spec: bad start_date");
      spec.start_date = *d;
    }
    if (j.contains("end_date")) {
      const auto d = parse_date(j["end_date"].get<std::string>());
      if (!d) throw ConfigError("synthetic spec: bad end_date");
      spec.end_date = *d;
    }
    if (j.contains("hotspots")) {
      for (const auto& s : j["hotspots"]) {
        Hotspot h;
        h.lat = s.at("lat").get<double>();
        h.lon = s.at("lon").get<double>();
        if (s.contains("spread")) h.spread = s["spread"].get<double>();
        if (s.contains("intensity")) h.intensity = s["intensity"].get<double>();
        if (s.contains("hour_phase")) h.hour_phase = s["hour_phase"].get<int>();
        spec.hotspots.push_back(h);
      }
    }
    if (j.contains("weekday_multiplier"))
      spec.weekday_multiplier = j["weekday_multiplier"].get<double>();
    if (j.contains("hour_profile")) {
      const auto& p = j["hour_profile"];
      if (!p.is_array() || p.size() != 24)
        throw ConfigError("synthetic spec: hour_profile must have 24 entries");
      for (int i = 0; i < 24; ++i) spec.hour_profile[i] = p[i].get<double>();
    }
    if (j.contains("rain_suppression"))
      spec.rain_suppression = j["rain_suppression"].get<double>();
    if (j.contains("missing_rate"))
      spec.missing_rate = j["missing_rate"].get<double>();
    if (j.contains("rain_probability"))
      spec.rain_probability = j["rain_probability"].get<double>();
    if (j.contains("snow_probability"))
      spec.snow_probability = j["snow_probability"].get<double>();
    if (j.contains("thunderstorm_probability"))
      spec.thunderstorm_probability = j["thunderstorm_probability"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return spec;
}

}  // namespace airdemand
