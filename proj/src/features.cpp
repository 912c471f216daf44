#include "airdemand/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "airdemand/csv.hpp"
#include "airdemand/errors.hpp"

namespace airdemand {

const char* demand_name(DemandLevel d) {
  switch (d) {
    case DemandLevel::Low: return "low";
    case DemandLevel::Moderate: return "moderate";
    case DemandLevel::High: return "high";
  }
  return "low";
}

std::optional<DemandLevel> demand_from_name(const std::string& name) {
  if (name == "low") return DemandLevel::Low;
  if (name == "moderate") return DemandLevel::Moderate;
  if (name == "high") return DemandLevel::High;
  return std::nullopt;
}

bool has_missing(const Sample& s) {
  return !s.temperature || !s.condition || !s.visibility || !s.wind_speed ||
         !s.humidity || !s.fog;
}

TemporalParts derive_temporal(Minutes pickup_at) {
  TemporalParts p;
  p.date = date_of(pickup_at);
  p.month = p.date.month;
  p.day_of_week = day_of_week(p.date);
  p.weekday = p.day_of_week >= 1 && p.day_of_week <= 5;
  p.time_slot = hour_of(pickup_at) + 1;
  return p;
}

std::vector<Sample> aggregate_samples(const std::vector<TripRecord>& trips,
                                      const ClusterModel& model) {
  std::map<std::tuple<int, std::int64_t, int>, Sample> cells;
  for (const auto& t : trips) {
    const int loc = assign_location(LatLon{t.origin_lat, t.origin_lon}, model);
    const TemporalParts p = derive_temporal(t.pickup_at);
    const auto key = std::make_tuple(loc, days_from_civil(p.date), p.time_slot);
    const auto it = cells.find(key);
    if (it != cells.end()) {
      it->second.passengers += t.passengers;
      continue;
    }
    Sample s;
    s.location_id = loc;
    s.date = p.date;
    s.time_slot = p.time_slot;
    s.month = p.month;
    s.day_of_week = p.day_of_week;
    s.weekday = p.weekday;
    s.passengers = t.passengers;
    cells.emplace(key, s);
  }
  std::vector<Sample> out;
  out.reserve(cells.size());
  for (auto& [key, s] : cells) out.push_back(s);
  return out;
}

BinThresholds fit_bins(const std::vector<long>& passenger_counts) {
  if (passenger_counts.empty()) throw ArgumentError("fit_bins: empty input");
  std::vector<long> sorted = passenger_counts;
  std::sort(sorted.begin(), sorted.end());
  const long m = static_cast<long>(sorted.size());
  const long rank_low = (m + 2) / 3;       // ceil(m/3), nearest rank
  const long rank_high = (2 * m + 2) / 3;  // ceil(2m/3)
  return BinThresholds{sorted[rank_low - 1], sorted[rank_high - 1]};
}

DemandLevel bin_demand(long passengers, const BinThresholds& t) {
  if (t.t_low > t.t_high) throw ArgumentError("bin_demand: t_low > t_high");
  if (passengers <= t.t_low) return DemandLevel::Low;
  if (passengers > t.t_high) return DemandLevel::High;
  return DemandLevel::Moderate;
}

void label_samples(std::vector<Sample>& samples, const BinThresholds& t) {
  for (auto& s : samples) s.demand = bin_demand(s.passengers, t);
}

void join_weather(std::vector<Sample>& samples,
                  const std::vector<WeatherRecord>& weather) {
  std::unordered_map<Minutes, const WeatherRecord*> by_hour;
  by_hour.reserve(weather.size());
  for (const auto& w : weather) by_hour.emplace(w.observed_at, &w);
  for (auto& s : samples) {
    const Minutes hour = minutes_from(s.date, s.time_slot - 1, 0);
    const auto it = by_hour.find(hour);
    if (it == by_hour.end()) {
      s.temperature.reset();
      s.condition.reset();
      s.visibility.reset();
      s.wind_speed.reset();
      s.humidity.reset();
      s.fog.reset();
      continue;
    }
    const WeatherRecord& w = *it->second;
    s.temperature = w.temperature;
    s.condition = w.condition;
    s.visibility = w.visibility;
    s.wind_speed = w.wind_speed;
    s.humidity = w.humidity;
    s.fog = w.fog;
  }
}

const char* clean_strategy_name(CleanStrategy s) {
  switch (s) {
    case CleanStrategy::Listwise: return "listwise";
    case CleanStrategy::MedianMode: return "median_mode";
    case CleanStrategy::Regression: return "regression";
  }
  return "listwise";
}

std::optional<CleanStrategy> clean_strategy_from_name(const std::string& name) {
  if (name == "listwise") return CleanStrategy::Listwise;
  if (name == "median_mode") return CleanStrategy::MedianMode;
  if (name == "regression") return CleanStrategy::Regression;
  return std::nullopt;
}

namespace {

const std::optional<double>& continuous_field(const Sample& s, int col) {
  switch (col) {
    case 0: return s.temperature;
    case 1: return s.visibility;
    case 2: return s.wind_speed;
    default: return s.humidity;
  }
}

std::optional<double>& continuous_field(Sample& s, int col) {
  switch (col) {
    case 0: return s.temperature;
    case 1: return s.visibility;
    case 2: return s.wind_speed;
    default: return s.humidity;
  }
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  if (m % 2 == 1) return v[m / 2];
  return (v[m / 2 - 1] + v[m / 2]) / 2.0;
}

std::array<double, 5> predictors_of(const Sample& s) {
  return {1.0, static_cast<double>(s.month),
          static_cast<double>(s.day_of_week), s.weekday ? 1.0 : 0.0,
          static_cast<double>(s.time_slot)};
}

// Least squares via the normal equations; 5 coefficients, Gauss
// elimination with partial pivoting. Returns false when singular.
bool solve_normal(const std::vector<std::array<double, 5>>& xs,
                  const std::vector<double>& ys, std::array<double, 5>& coef) {
  constexpr int P = 5;
  double a[P][P + 1] = {};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int r = 0; r < P; ++r) {
      for (int c = 0; c < P; ++c) a[r][c] += xs[i][r] * xs[i][c];
      a[r][P] += xs[i][r] * ys[i];
    }
  }
  for (int col = 0; col < P; ++col) {
    int pivot = col;
    for (int r = col + 1; r < P; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-10) return false;
    if (pivot != col)
      for (int c = 0; c <= P; ++c) std::swap(a[col][c], a[pivot][c]);
    for (int r = 0; r < P; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c <= P; ++c) a[r][c] -= f * a[col][c];
    }
  }
  for (int r = 0; r < P; ++r) coef[r] = a[r][P] / a[r][r];
  return true;
}

}  // namespace

Cleaner fit_cleaner(const std::vector<Sample>& train, CleanStrategy strategy) {
  Cleaner c;
  c.strategy = strategy;
  if (strategy == CleanStrategy::Listwise) return c;

  bool any_complete = false;
  for (const auto& s : train) any_complete = any_complete || !has_missing(s);
  if (!any_complete)
    throw DataError("clean: no fully observed sample to fit on");

  for (int col = 0; col < 4; ++col) {
    std::vector<double> observed;
    for (const auto& s : train)
      if (const auto& v = continuous_field(s, col)) observed.push_back(*v);
    c.medians[col] = median_of(std::move(observed));
  }

  long cond_counts[4] = {};
  long fog_yes = 0, fog_no = 0;
  for (const auto& s : train) {
    if (s.condition) ++cond_counts[static_cast<int>(*s.condition)];
    if (s.fog) (*s.fog ? fog_yes : fog_no) += 1;
  }
  int best = 0;
  for (int k = 1; k < 4; ++k)
    if (cond_counts[k] > cond_counts[best]) best = k;
  c.condition_mode = static_cast<Condition>(best);
  c.fog_mode = fog_yes >= fog_no;

  if (strategy == CleanStrategy::Regression) {
    std::vector<std::array<double, 5>> xs;
    for (const auto& s : train)
      if (!has_missing(s)) xs.push_back(predictors_of(s));
    for (int col = 0; col < 4; ++col) {
      std::vector<double> ys;
      ys.reserve(xs.size());
      for (const auto& s : train)
        if (!has_missing(s)) ys.push_back(*continuous_field(s, col));
      c.reg_ok[col] =
          xs.size() >= 5 && solve_normal(xs, ys, c.reg_coef[col]);
    }
  }
  return c;
}

std::vector<Sample> apply_cleaner(const std::vector<Sample>& samples,
                                  const Cleaner& cleaner) {
  std::vector<Sample> out;
  if (cleaner.strategy == CleanStrategy::Listwise) {
    for (const auto& s : samples)
      if (!has_missing(s)) out.push_back(s);
    if (out.empty() && !samples.empty())
      throw DataError("clean: listwise deletion removed every row");
    return out;
  }
  out = samples;
  for (auto& s : out) {
    for (int col = 0; col < 4; ++col) {
      auto& v = continuous_field(s, col);
      if (v) continue;
      if (cleaner.strategy == CleanStrategy::Regression && cleaner.reg_ok[col]) {
        const auto x = predictors_of(s);
        double pred = 0;
        for (int p = 0; p < 5; ++p) pred += cleaner.reg_coef[col][p] * x[p];
        v = pred;
      } else {
        v = cleaner.medians[col];
      }
    }
    if (!s.condition) s.condition = cleaner.condition_mode;
    if (!s.fog) s.fog = cleaner.fog_mode;
  }
  return out;
}

std::string cleaner_to_json(const Cleaner& c) {
  nlohmann::json j;
  j["strategy"] = clean_strategy_name(c.strategy);
  j["medians"] = c.medians;
  j["condition_mode"] = condition_name(c.condition_mode);
  j["fog_mode"] = c.fog_mode;
  j["reg_coef"] = c.reg_coef;
  j["reg_ok"] = c.reg_ok;
  return j.dump(2) + "\n";
}

Cleaner cleaner_from_json(const std::string& text) {
  Cleaner c;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto strategy =
        clean_strategy_from_name(j.at("strategy").get<std::string>());
    if (!strategy) throw FormatError("cleaner: unknown strategy");
    c.strategy = *strategy;
    if (c.strategy == CleanStrategy::Listwise) return c;
    c.medians = j.at("medians").get<std::array<double, 4>>();
    const auto cond =
        condition_from_name(j.at("condition_mode").get<std::string>());
    if (!cond) throw FormatError("cleaner: unknown condition mode");
    c.condition_mode = *cond;
    c.fog_mode = j.at("fog_mode").get<bool>();
    c.reg_coef = j.at("reg_coef").get<std::array<std::array<double, 5>, 4>>();
    c.reg_ok = j.at("reg_ok").get<std::array<bool, 4>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cleaner: ") + e.what());
  }
  return c;
}

namespace {

constexpr const char* kSampleHeader =
    "location_id,date,time_slot,month,day_of_week,weekday,temperature,"
    "condition,visibility,wind_speed,humidity,fog,passengers,demand";

std::string opt_double_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

void write_samples(const std::vector<Sample>& samples, std::ostream& out) {
  out << kSampleHeader << "\n";
  for (const auto& s : samples) {
    out << s.location_id << ',' << format_date(s.date) << ',' << s.time_slot
        << ',' << kMonthNames[s.month - 1] << ',' << kDayNames[s.day_of_week]
        << ',' << (s.weekday ? "Yes" : "No") << ','
        << opt_double_text(s.temperature) << ','
        << (s.condition ? condition_name(*s.condition) : "") << ','
        << opt_double_text(s.visibility) << ','
        << opt_double_text(s.wind_speed) << ','
        << opt_double_text(s.humidity) << ','
        << (s.fog ? (*s.fog ? "Yes" : "No") : "") << ',' << s.passengers
        << ',' << (s.demand ? demand_name(*s.demand) : "") << '\n';
  }
}

std::vector<Sample> read_samples(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("samples: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSampleHeader) throw FormatError("samples: unexpected header");

  auto name_index = [](const char* const* names, int n,
                       const std::string& s) -> int {
    for (int i = 0; i < n; ++i)
      if (s == names[i]) return i;
    return -1;
  };

  std::vector<Sample> out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    const auto fail = [&](const std::string& what) {
      throw FormatError("samples line " + std::to_string(line_no) + ": " +
                        what);
    };
    if (f.size() != 14) fail("bad field count");
    Sample s;
    const auto loc = parse_long(f[0]);
    if (!loc || *loc < 1) fail("bad location_id");
    s.location_id = static_cast<int>(*loc);
    const auto date = parse_date(f[1]);
    if (!date) fail("bad date");
    s.date = *date;
    const auto slot = parse_long(f[2]);
    if (!slot || *slot < 1 || *slot > 24) fail("bad time_slot");
    s.time_slot = static_cast<int>(*slot);
    s.month = name_index(kMonthNames, 12, f[3]) + 1;
    if (s.month == 0) fail("bad month");
    s.day_of_week = name_index(kDayNames, 7, f[4]);
    if (s.day_of_week < 0) fail("bad day_of_week");
    if (f[5] != "Yes" && f[5] != "No") fail("bad weekday");
    s.weekday = f[5] == "Yes";
    if (s.month != s.date.month || s.day_of_week != day_of_week(s.date) ||
        s.weekday != (s.day_of_week >= 1 && s.day_of_week <= 5))
      fail("temporal fields inconsistent with date");
    for (int col = 0; col < 4; ++col) {
      static const int field_of[4] = {6, 8, 9, 10};
      const std::string& text = f[field_of[col]];
      if (text.empty()) continue;
      const auto v = parse_double(text);
      if (!v) fail("bad continuous value");
      continuous_field(s, col) = *v;
    }
    if (!f[7].empty()) {
      const auto cond = condition_from_name(f[7]);
      if (!cond) fail("bad condition");
      s.condition = *cond;
    }
    if (!f[11].empty()) {
      if (f[11] != "Yes" && f[11] != "No") fail("bad fog");
      s.fog = f[11] == "Yes";
    }
    const auto pax = parse_long(f[12]);
    if (!pax || *pax < 0) fail("bad passengers");
    s.passengers = *pax;
    if (!f[13].empty()) {
      const auto demand = demand_from_name(f[13]);
      if (!demand) fail("bad demand");
      s.demand = *demand;
    }
    out.push_back(s);
  }
  return out;
}

void write_samples_file(const std::vector<Sample>& samples,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  write_samples(samples, out);
}

std::vector<Sample> read_samples_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  return read_samples(in);
}

}  // namespace airdemand
