#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "airdemand/ingest.hpp"
#include "airdemand/kmeans.hpp"

namespace airdemand {

enum class DemandLevel { Low = 0, Moderate = 1, High = 2 };

const char* demand_name(DemandLevel d);
std::optional<DemandLevel> demand_from_name(const std::string& name);

// One modeling row: aggregated demand for a (location, date, hour) cell
// plus the temporal and weather predictors.
struct Sample {
  int location_id = 0;  // 1..K
  Date date;
  int time_slot = 0;     // 1..24, slot t covers hours [t-1, t)
  int month = 0;         // 1..12
  int day_of_week = 0;   // 0 = Sunday .. 6 = Saturday
  bool weekday = false;  // Mon..Fri
  std::optional<double> temperature;
  std::optional<Condition> condition;
  std::optional<double> visibility;
  std::optional<double> wind_speed;
  std::optional<double> humidity;
  std::optional<bool> fog;
  long passengers = 0;
  std::optional<DemandLevel> demand;
};

bool has_missing(const Sample& s);

struct TemporalParts {
  int month = 0;
  int day_of_week = 0;
  bool weekday = false;
  int time_slot = 0;
  Date date;
};

TemporalParts derive_temporal(Minutes pickup_at);

// One sample per (location, date, slot) cell with at least one trip;
// passengers summed over the cell. Sorted by (location, date, slot).
std::vector<Sample> aggregate_samples(const std::vector<TripRecord>& trips,
                                      const ClusterModel& model);

// Tertile boundaries of the training passenger counts (nearest rank).
struct BinThresholds {
  long t_low = 0;
  long t_high = 0;
};

BinThresholds fit_bins(const std::vector<long>& passenger_counts);
DemandLevel bin_demand(long passengers, const BinThresholds& t);
void label_samples(std::vector<Sample>& samples, const BinThresholds& t);

// Copies the weather row observed at each sample's hour; samples with no
// matching observation get every weather field marked missing.
void join_weather(std::vector<Sample>& samples,
                  const std::vector<WeatherRecord>& weather);

enum class CleanStrategy { Listwise, MedianMode, Regression };

const char* clean_strategy_name(CleanStrategy s);
std::optional<CleanStrategy> clean_strategy_from_name(const std::string& name);

// Imputation statistics fitted on training data and reused verbatim at
// test time. For the regression strategy each continuous column gets a
// least-squares fit on the always-observed temporal predictors.
struct Cleaner {
  CleanStrategy strategy = CleanStrategy::Listwise;
  std::array<double, 4> medians{};  // temperature, visibility, wind, humidity
  Condition condition_mode = Condition::Normal;
  bool fog_mode = false;
  // Coefficients over [1, month, day_of_week, weekday, time_slot].
  std::array<std::array<double, 5>, 4> reg_coef{};
  std::array<bool, 4> reg_ok{};  // column fell back to median when false
};

Cleaner fit_cleaner(const std::vector<Sample>& train, CleanStrategy strategy);
std::vector<Sample> apply_cleaner(const std::vector<Sample>& samples,
                                  const Cleaner& cleaner);

std::string cleaner_to_json(const Cleaner& c);
Cleaner cleaner_from_json(const std::string& text);

// Prepared-dataset file: header + one delimited row per sample, missing
// fields empty.
void write_samples(const std::vector<Sample>& samples, std::ostream& out);
std::vector<Sample> read_samples(std::istream& in);
void write_samples_file(const std::vector<Sample>& samples,
                        const std::string& path);
std::vector<Sample> read_samples_file(const std::string& path);

}  // namespace airdemand
