#pragma once

#include <array>
#include <string>
#include <vector>

#include "airdemand/features.hpp"
#include "airdemand/matrix.hpp"

namespace airdemand {

// One-hot vocabularies (levels observed in training, in canonical order)
// plus centering statistics for the continuous columns. The column layout
// follows the feature declaration order: Month, DayOfWeek, TimeSlot,
// Weekday, LocationID, Temperature, Condition, Visibility, WindSpeed,
// Humidity, Fog.
struct Encoder {
  std::vector<int> months;             // subset of 1..12
  std::vector<int> days;               // subset of 0..6, Sun..Sat
  std::vector<int> time_slots;         // subset of 1..24
  std::vector<int> weekday_levels;     // subset of {1, 0}, Yes before No
  std::vector<int> locations;          // observed location IDs, ascending
  std::vector<Condition> conditions;   // canonical order subset
  std::vector<int> fog_levels;         // subset of {1, 0}, Yes before No
  std::array<double, 4> means{};       // temperature, visibility, wind, humidity
  std::array<double, 4> stds{};        // sample std; 0 marks a constant column

  // Derived layout, rebuilt on fit and deserialize.
  std::vector<std::string> column_names;
  std::vector<FeatureGroup> groups;

  std::size_t n_columns() const { return column_names.size(); }
};

// Vocabularies and continuous statistics from training samples only.
// Samples must be cleaned (no missing fields).
Encoder fit_encoder(const std::vector<Sample>& train);

// One-hot blocks (unseen level at apply time encodes as all zeros) and
// centered/scaled continuous columns; labels copied from demand, -1 when
// unset. Throws on missing fields.
FeatureMatrix apply_encoder(const Encoder& enc,
                            const std::vector<Sample>& samples);

std::string encoder_to_json(const Encoder& enc);
Encoder encoder_from_json(const std::string& text);

}  // namespace airdemand
