#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "airdemand/classifier.hpp"
#include "airdemand/features.hpp"
#include "airdemand/matrix.hpp"

namespace airdemand {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Uniform random partition; |train| = round(ratio * n).
SplitIndices split_train_test(std::size_t n, double ratio, std::uint64_t seed);

// k folds with sizes differing by at most one, each sorted ascending.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                    std::uint64_t seed);
// Per-class round-robin dealing; fold sizes still differ by at most one.
std::vector<std::vector<std::size_t>> kfold_indices_stratified(
    const std::vector<int>& labels, int k, std::uint64_t seed);

struct ConfusionMatrix {
  // counts[actual][predicted]
  std::array<std::array<long, kNumClasses>, kNumClasses> counts{};

  long total() const;
};

ConfusionMatrix confusion(const std::vector<int>& actual,
                          const std::vector<int>& predicted);

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  ClassMetrics macro{};  // unweighted means across classes
  double accuracy = 0;
};

// Zero denominators yield 0 for the affected metric.
MetricsReport compute_metrics(const ConfusionMatrix& cm);
double macro_f1(const ConfusionMatrix& cm);

// Wall-clock seconds spent inside fit.
double time_training(const std::function<void()>& fit);

// One hyper-parameter setting: a display id plus a factory that fits a
// classifier on an encoded training matrix with the given seed.
struct GridCell {
  std::string id;
  std::function<std::unique_ptr<Classifier>(const FeatureMatrix&, std::uint64_t)> fit;
};

struct CVOptions {
  int folds = 10;
  bool stratified = false;
  CleanStrategy strategy = CleanStrategy::Listwise;
  int jobs = 1;
};

struct GridCellScore {
  std::string id;
  double mean_macro_f1 = 0;
  std::vector<double> fold_scores;
  std::string note;  // non-empty when the cell failed
};

struct GridResult {
  std::vector<GridCellScore> cells;
  std::size_t best = 0;  // ties keep the earliest cell in grid order
};

// Cross-validate one cell over unprocessed samples. Cleaner, demand bins
// and encoder are refit on each fold's training part so no test-fold
// statistics leak into the fit.
GridCellScore cross_validate(const GridCell& cell,
                             const std::vector<Sample>& samples,
                             const CVOptions& opt, std::uint64_t seed);

GridResult grid_search(const std::vector<GridCell>& grid,
                       const std::vector<Sample>& samples,
                       const CVOptions& opt, std::uint64_t seed);

}  // namespace airdemand
