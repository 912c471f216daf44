#include "airdemand/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "airdemand/errors.hpp"

namespace airdemand {

namespace {

const char* kContinuousNames[4] = {"Temperature", "Visibility", "WindSpeed",
                                   "Humidity"};

double continuous_value(const Sample& s, int col) {
  switch (col) {
    case 0: return *s.temperature;
    case 1: return *s.visibility;
    case 2: return *s.wind_speed;
    default: return *s.humidity;
  }
}

void require_clean(const Sample& s) {
  if (has_missing(s))
    throw ArgumentError("encoder: sample has missing fields; clean first");
}

void rebuild_layout(Encoder& e) {
  e.column_names.clear();
  e.groups.clear();
  auto block = [&](const std::string& feature,
                   const std::vector<std::string>& level_names) {
    FeatureGroup g;
    g.name = feature;
    for (const auto& level : level_names) {
      g.columns.push_back(e.column_names.size());
      e.column_names.push_back(level.empty() ? feature
                                             : feature + "_" + level);
    }
    e.groups.push_back(std::move(g));
  };

  std::vector<std::string> names;
  for (const int m : e.months) names.push_back(kMonthNames[m - 1]);
  block("Month", names);
  names.clear();
  for (const int d : e.days) names.push_back(kDayNames[d]);
  block("DayOfWeek", names);
  names.clear();
  for (const int t : e.time_slots) names.push_back(std::to_string(t));
  block("TimeSlot", names);
  names.clear();
  for (const int v : e.weekday_levels) names.push_back(v ? "Yes" : "No");
  block("Weekday", names);
  names.clear();
  for (const int id : e.locations) names.push_back(std::to_string(id));
  block("LocationID", names);
  block("Temperature", {""});
  names.clear();
  for (const Condition c : e.conditions) names.push_back(condition_name(c));
  block("Condition", names);
  block("Visibility", {""});
  block("WindSpeed", {""});
  block("Humidity", {""});
  names.clear();
  for (const int v : e.fog_levels) names.push_back(v ? "Yes" : "No");
  block("Fog", names);
}

}  // namespace

Encoder fit_encoder(const std::vector<Sample>& train) {
  if (train.empty()) throw ArgumentError("encoder: no training samples");
  Encoder e;
  std::set<int> months, days, slots, locations;
  std::set<int> weekdays, fogs;
  std::set<int> conditions;
  for (const auto& s : train) {
    require_clean(s);
    months.insert(s.month);
    days.insert(s.day_of_week);
    slots.insert(s.time_slot);
    locations.insert(s.location_id);
    weekdays.insert(s.weekday ? 1 : 0);
    conditions.insert(static_cast<int>(*s.condition));
    fogs.insert(*s.fog ? 1 : 0);
  }
  e.months.assign(months.begin(), months.end());
  e.days.assign(days.begin(), days.end());
  e.time_slots.assign(slots.begin(), slots.end());
  e.locations.assign(locations.begin(), locations.end());
  for (const int v : {1, 0}) {  // Yes before No
    if (weekdays.count(v)) e.weekday_levels.push_back(v);
    if (fogs.count(v)) e.fog_levels.push_back(v);
  }
  for (const int c : conditions) e.conditions.push_back(static_cast<Condition>(c));

  const double m = static_cast<double>(train.size());
  for (int col = 0; col < 4; ++col) {
    double sum = 0;
    for (const auto& s : train) sum += continuous_value(s, col);
    e.means[col] = sum / m;
    double ss = 0;
    for (const auto& s : train) {
      const double d = continuous_value(s, col) - e.means[col];
      ss += d * d;
    }
    e.stds[col] = train.size() > 1 ? std::sqrt(ss / (m - 1)) : 0.0;
  }

  rebuild_layout(e);
  return e;
}

FeatureMatrix apply_encoder(const Encoder& enc,
                            const std::vector<Sample>& samples) {
  FeatureMatrix out;
  out.rows = samples.size();
  out.cols = enc.n_columns();
  out.column_names = enc.column_names;
  out.values.assign(out.rows * out.cols, 0.0);
  out.labels.assign(out.rows, -1);

  // Per-block offsets mirror rebuild_layout's order.
  std::size_t off = 0;
  const std::size_t off_month = off;
  off += enc.months.size();
  const std::size_t off_day = off;
  off += enc.days.size();
  const std::size_t off_slot = off;
  off += enc.time_slots.size();
  const std::size_t off_weekday = off;
  off += enc.weekday_levels.size();
  const std::size_t off_loc = off;
  off += enc.locations.size();
  const std::size_t off_temp = off++;
  const std::size_t off_cond = off;
  off += enc.conditions.size();
  const std::size_t off_vis = off++;
  const std::size_t off_wind = off++;
  const std::size_t off_hum = off++;
  const std::size_t off_fog = off;

  auto hot = [](auto& levels, const auto& value) -> long {
    const auto it = std::find(levels.begin(), levels.end(), value);
    return it == levels.end() ? -1 : it - levels.begin();
  };

  for (std::size_t r = 0; r < samples.size(); ++r) {
    const Sample& s = samples[r];
    require_clean(s);
    double* row = out.row(r);
    long i;
    if ((i = hot(enc.months, s.month)) >= 0) row[off_month + i] = 1;
    if ((i = hot(enc.days, s.day_of_week)) >= 0) row[off_day + i] = 1;
    if ((i = hot(enc.time_slots, s.time_slot)) >= 0) row[off_slot + i] = 1;
    if ((i = hot(enc.weekday_levels, s.weekday ? 1 : 0)) >= 0)
      row[off_weekday + i] = 1;
    if ((i = hot(enc.locations, s.location_id)) >= 0) row[off_loc + i] = 1;
    if ((i = hot(enc.conditions, *s.condition)) >= 0) row[off_cond + i] = 1;
    if ((i = hot(enc.fog_levels, *s.fog ? 1 : 0)) >= 0) row[off_fog + i] = 1;

    const std::size_t cont_off[4] = {off_temp, off_vis, off_wind, off_hum};
    for (int col = 0; col < 4; ++col) {
      const double centered = continuous_value(s, col) - enc.means[col];
      row[cont_off[col]] =
          enc.stds[col] > 0 ? centered / enc.stds[col] : centered;
    }
    if (s.demand) out.labels[r] = static_cast<int>(*s.demand);
  }
  return out;
}

std::string encoder_to_json(const Encoder& enc) {
  nlohmann::json j;
  j["months"] = enc.months;
  j["days"] = enc.days;
  j["time_slots"] = enc.time_slots;
  j["weekday_levels"] = enc.weekday_levels;
  j["locations"] = enc.locations;
  nlohmann::json conds = nlohmann::json::array();
  for (const Condition c : enc.conditions) conds.push_back(condition_name(c));
  j["conditions"] = conds;
  j["fog_levels"] = enc.fog_levels;
  nlohmann::json stats = nlohmann::json::object();
  for (int col = 0; col < 4; ++col)
    stats[kContinuousNames[col]] = {{"mean", enc.means[col]},
                                    {"std", enc.stds[col]}};
  j["continuous"] = stats;
  return j.dump(2) + "\n";
}

Encoder encoder_from_json(const std::string& text) {
  Encoder e;
  try {
    const auto j = nlohmann::json::parse(text);
    e.months = j.at("months").get<std::vector<int>>();
    e.days = j.at("days").get<std::vector<int>>();
    e.time_slots = j.at("time_slots").get<std::vector<int>>();
    e.weekday_levels = j.at("weekday_levels").get<std::vector<int>>();
    e.locations = j.at("locations").get<std::vector<int>>();
    for (const auto& name : j.at("conditions")) {
      const auto c = condition_from_name(name.get<std::string>());
      if (!c) throw FormatError("encoder: unknown condition level");
      e.conditions.push_back(*c);
    }
    e.fog_levels = j.at("fog_levels").get<std::vector<int>>();
    const auto& stats = j.at("continuous");
    for (int col = 0; col < 4; ++col) {
      e.means[col] = stats.at(kContinuousNames[col]).at("mean").get<double>();
      e.stds[col] = stats.at(kContinuousNames[col]).at("std").get<double>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("encoder: ") + ex.what());
  }
  rebuild_layout(e);
  return e;
}

}  // namespace airdemand
