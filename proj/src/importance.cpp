#include "airdemand/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "airdemand/errors.hpp"
#include "airdemand/parallel.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

void check_partition(const std::vector<FeatureGroup>& groups, std::size_t cols) {
  std::vector<char> seen(cols, 0);
  for (const auto& g : groups) {
    for (std::size_t c : g.columns) {
      if (c >= cols) throw ArgumentError("importance: group column out of range");
      if (seen[c]) throw ArgumentError("importance: column appears in two groups");
      seen[c] = 1;
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!seen[c]) throw ArgumentError("importance: column missing from the groups");
  }
}

double error_rate_base(const Classifier& model, const FeatureMatrix& m) {
  long wrong = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    if (model.predict(m.row(i)) != m.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(m.rows);
}

double error_rate_permuted(const Classifier& model, const FeatureMatrix& m,
                           const FeatureGroup& group,
                           const std::vector<std::size_t>& perm) {
  std::vector<double> row(m.cols);
  long wrong = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* src = m.row(i);
    std::copy(src, src + m.cols, row.begin());
    const double* donor = m.row(perm[i]);
    for (std::size_t c : group.columns) row[c] = donor[c];
    if (model.predict(row.data()) != m.labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(m.rows);
}

}  // namespace

ImportanceTable permutation_importance(const Classifier& model,
                                       const FeatureMatrix& m,
                                       const std::vector<FeatureGroup>& groups,
                                       int repeats, std::uint64_t seed,
                                       int jobs) {
  if (m.rows == 0) throw ArgumentError("importance: empty matrix");
  if (m.cols != model.n_features()) {
    throw ArgumentError("importance: matrix width differs from the model");
  }
  if (repeats < 1) throw ArgumentError("importance: repeats must be >= 1");
  check_partition(groups, m.cols);
  for (int y : m.labels) {
    if (y < 0 || y >= kNumClasses) {
      throw ArgumentError("importance: every row needs a label in 0..2");
    }
  }

  const double baseline = error_rate_base(model, m);

  ImportanceTable table(groups.size());
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(seed, "imp/" + groups[g].name + "/rep/" + std::to_string(r)));
      std::vector<std::size_t> perm(m.rows);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = 0; i + 1 < perm.size(); ++i) {
        std::swap(perm[i], perm[i + rng.uniform_index(perm.size() - i)]);
      }
      deltas.push_back(error_rate_permuted(model, m, groups[g], perm) - baseline);
    }

    double mean = 0;
    for (double d : deltas) mean += d;
    mean /= static_cast<double>(deltas.size());
    double var = 0;
    for (double d : deltas) var += (d - mean) * (d - mean);

    auto& entry = table[g];
    entry.name = groups[g].name;
    entry.importance = mean;
    entry.stddev = deltas.size() > 1
                       ? std::sqrt(var / static_cast<double>(deltas.size() - 1))
                       : 0.0;
  });

  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table[a].importance > table[b].importance;
  });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    table[order[pos]].rank = static_cast<int>(pos) + 1;
  }
  return table;
}

std::vector<std::pair<std::string, double>> top_features(
    const ImportanceTable& table, std::size_t n) {
  ImportanceTable sorted = table;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const GroupImportance& a, const GroupImportance& b) {
                     return a.rank < b.rank;
                   });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < sorted.size() && i < n; ++i) {
    out.emplace_back(sorted[i].name, sorted[i].importance);
  }
  return out;
}

}  // namespace airdemand
