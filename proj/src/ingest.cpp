#include "airdemand/ingest.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "airdemand/csv.hpp"
#include "airdemand/errors.hpp"

namespace airdemand {

namespace {

constexpr std::array<const char*, 7> kTripColumns = {
    "pickup_at",  "dropoff_at", "passengers", "origin_lat",
    "origin_lon", "dest_lat",   "dest_lon"};
constexpr std::array<const char*, 7> kWeatherColumns = {
    "observed_at", "temperature", "condition", "visibility",
    "wind_speed",  "humidity",    "fog"};

// Maps expected column name -> position in the file. Columns may appear in
// any order but all must be present and nothing else.
template <std::size_t N>
std::array<int, N> read_header(std::istream& in,
                               const std::array<const char*, N>& columns,
                               const char* what) {
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw FormatError(std::string(what) + ": empty file or missing header");
  const auto fields = split_csv_line(line);
  std::array<int, N> index;
  index.fill(-1);
  for (std::size_t pos = 0; pos < fields.size(); ++pos) {
    bool known = false;
    for (std::size_t c = 0; c < N; ++c) {
      if (fields[pos] == columns[c]) {
        if (index[c] >= 0)
          throw FormatError(std::string(what) + ": duplicate column '" +
                            fields[pos] + "'");
        index[c] = static_cast<int>(pos);
        known = true;
        break;
      }
    }
    if (!known)
      throw FormatError(std::string(what) + ": unknown column '" +
                        fields[pos] + "'");
  }
  for (std::size_t c = 0; c < N; ++c) {
    if (index[c] < 0)
      throw FormatError(std::string(what) + ": missing column '" +
                        std::string(columns[c]) + "'");
  }
  return index;
}

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_weather_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

bool finite_in_range(double v, double lo, double hi) {
  return std::isfinite(v) && v >= lo && v <= hi;
}

}  // namespace

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::Normal: return "Normal";
    case Condition::Snow: return "Snow";
    case Condition::Rain: return "Rain";
    case Condition::Thunderstorm: return "Thunderstorm";
  }
  return "Normal";
}

std::optional<Condition> condition_from_name(const std::string& name) {
  if (name == "Normal") return Condition::Normal;
  if (name == "Snow") return Condition::Snow;
  if (name == "Rain") return Condition::Rain;
  if (name == "Thunderstorm") return Condition::Thunderstorm;
  return std::nullopt;
}

TripParseResult parse_trips(std::istream& in) {
  const auto idx = read_header(in, kTripColumns, "trips");
  TripParseResult out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++out.report.total;
    const auto fields = split_csv_line(line);
    if (fields.size() != kTripColumns.size()) {
      out.report.reject("bad field count");
      continue;
    }
    const auto pickup = parse_timestamp(fields[idx[0]]);
    const auto dropoff = parse_timestamp(fields[idx[1]]);
    if (!pickup || !dropoff) {
      out.report.reject("bad timestamp");
      continue;
    }
    if (*dropoff <= *pickup) {
      out.report.reject("non-positive duration");
      continue;
    }
    const auto passengers = parse_long(fields[idx[2]]);
    if (!passengers || *passengers < 1) {
      out.report.reject("invalid passengers");
      continue;
    }
    const auto olat = parse_double(fields[idx[3]]);
    const auto olon = parse_double(fields[idx[4]]);
    const auto dlat = parse_double(fields[idx[5]]);
    const auto dlon = parse_double(fields[idx[6]]);
    if (!olat || !olon || !dlat || !dlon ||
        !finite_in_range(*olat, -90, 90) || !finite_in_range(*olon, -180, 180) ||
        !finite_in_range(*dlat, -90, 90) || !finite_in_range(*dlon, -180, 180)) {
      out.report.reject("coordinate out of range");
      continue;
    }
    ++out.report.accepted;
    out.records.push_back(TripRecord{*pickup, *dropoff, *passengers, *olat,
                                     *olon, *dlat, *dlon});
  }
  return out;
}

WeatherParseResult parse_weather(std::istream& in) {
  const auto idx = read_header(in, kWeatherColumns, "weather");
  WeatherParseResult out;
  std::set<Minutes> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++out.report.total;
    const auto fields = split_csv_line(line);
    if (fields.size() != kWeatherColumns.size()) {
      out.report.reject("bad field count");
      continue;
    }
    const auto ts = parse_timestamp(fields[idx[0]]);
    if (!ts) {
      out.report.reject("bad timestamp");
      continue;
    }
    if (*ts % 60 != 0) {
      out.report.reject("unaligned hour");
      continue;
    }
    if (!seen.insert(*ts).second) {
      out.report.reject("duplicate hour");
      continue;
    }
    WeatherRecord rec;
    rec.observed_at = *ts;
    rec.temperature = parse_double(fields[idx[1]]);
    if (rec.temperature && !std::isfinite(*rec.temperature))
      rec.temperature.reset();
    rec.condition = condition_from_name(fields[idx[2]]);
    rec.visibility = parse_double(fields[idx[3]]);
    if (rec.visibility && !(std::isfinite(*rec.visibility) && *rec.visibility >= 0))
      rec.visibility.reset();  // covers the -9999 sentinel
    rec.wind_speed = parse_double(fields[idx[4]]);
    if (rec.wind_speed && !(std::isfinite(*rec.wind_speed) && *rec.wind_speed >= 0))
      rec.wind_speed.reset();
    rec.humidity = parse_double(fields[idx[5]]);
    if (rec.humidity && !finite_in_range(*rec.humidity, 0, 100))
      rec.humidity.reset();
    const std::string& fog = fields[idx[6]];
    if (fog == "0")
      rec.fog = false;
    else if (fog == "1")
      rec.fog = true;
    ++out.report.accepted;
    out.records.push_back(rec);
  }
  return out;
}

void serialize_trips(const std::vector<TripRecord>& trips, std::ostream& out) {
  out << "pickup_at,dropoff_at,passengers,origin_lat,origin_lon,dest_lat,dest_lon\n";
  for (const auto& t : trips) {
    out << format_timestamp(t.pickup_at) << ',' << format_timestamp(t.dropoff_at)
        << ',' << t.passengers << ',' << fmt_coord(t.origin_lat) << ','
        << fmt_coord(t.origin_lon) << ',' << fmt_coord(t.dest_lat) << ','
        << fmt_coord(t.dest_lon) << '\n';
  }
}

void serialize_weather(const std::vector<WeatherRecord>& weather,
                       std::ostream& out) {
  out << "observed_at,temperature,condition,visibility,wind_speed,humidity,fog\n";
  for (const auto& w : weather) {
    out << format_timestamp(w.observed_at) << ',';
    if (w.temperature) out << fmt_weather_value(*w.temperature);
    out << ',';
    if (w.condition) out << condition_name(*w.condition);
    out << ',';
    // canonical sentinel for missing visibility
    out << (w.visibility ? fmt_weather_value(*w.visibility) : "-9999");
    out << ',';
    if (w.wind_speed) out << fmt_weather_value(*w.wind_speed);
    out << ',';
    if (w.humidity) out << fmt_weather_value(*w.humidity);
    out << ',';
    if (w.fog) out << (*w.fog ? '1' : '0');
    out << '\n';
  }
}

TripParseResult parse_trips_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open trips file: " + path);
  return parse_trips(in);
}

WeatherParseResult parse_weather_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open weather file: " + path);
  return parse_weather(in);
}

void write_trips_file(const std::vector<TripRecord>& trips,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write trips file: " + path);
  serialize_trips(trips, out);
}

void write_weather_file(const std::vector<WeatherRecord>& weather,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write weather file: " + path);
  serialize_weather(weather, out);
}

}  // namespace airdemand
