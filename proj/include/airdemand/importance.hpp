#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "airdemand/classifier.hpp"
#include "airdemand/matrix.hpp"

namespace airdemand {

struct GroupImportance {
  std::string name;
  double importance = 0;  // mean error increase; negative values kept as is
  double stddev = 0;      // sample std across repeats, 0 when repeats == 1
  int rank = 0;           // 1 = largest importance; ties keep group order
};

using ImportanceTable = std::vector<GroupImportance>;

// Permutation importance over labeled rows: for each group, all of its
// columns are shuffled jointly (one row permutation per repeat) and the
// importance is the mean rise in error rate over the model's baseline.
// The groups must partition the matrix columns exactly. The input matrix
// is never modified.
ImportanceTable permutation_importance(const Classifier& model,
                                       const FeatureMatrix& m,
                                       const std::vector<FeatureGroup>& groups,
                                       int repeats, std::uint64_t seed,
                                       int jobs = 1);

// The n most important (name, importance) pairs in rank order.
std::vector<std::pair<std::string, double>> top_features(
    const ImportanceTable& table, std::size_t n);

}  // namespace airdemand
