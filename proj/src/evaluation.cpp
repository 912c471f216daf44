#include "airdemand/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "airdemand/encoder.hpp"
#include "airdemand/errors.hpp"
#include "airdemand/parallel.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  }
  return idx;
}

}  // namespace

SplitIndices split_train_test(std::size_t n, double ratio, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("split_train_test: empty dataset");
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw ArgumentError("split_train_test: ratio must be in [0, 1]");
  }
  Rng rng(derive_seed(seed, "split"));
  auto idx = shuffled_indices(n, rng);
  auto n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(n)));
  n_train = std::min(n_train, n);

  SplitIndices out;
  out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k,
                                                    std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ArgumentError("kfold_indices: k must be in [2, n]");
  }
  Rng rng(derive_seed(seed, "folds"));
  auto idx = shuffled_indices(n, rng);

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t at = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(at),
                    idx.begin() + static_cast<std::ptrdiff_t>(at + size));
    std::sort(folds[f].begin(), folds[f].end());
    at += size;
  }
  return folds;
}

std::vector<std::vector<std::size_t>> kfold_indices_stratified(
    const std::vector<int>& labels, int k, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw ArgumentError("kfold_indices: k must be in [2, n]");
  }
  Rng rng(derive_seed(seed, "folds"));

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= kNumClasses) {
      throw ArgumentError("kfold_indices: label outside 0..2");
    }
    by_class[static_cast<std::size_t>(y)].push_back(i);
  }
  for (auto& group : by_class) {
    for (std::size_t i = 0; i + 1 < group.size(); ++i) {
      std::swap(group[i], group[i + rng.uniform_index(group.size() - i)]);
    }
  }

  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (const auto& group : by_class) {
    for (std::size_t i : group) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts)
    for (long v : row) t += v;
  return t;
}

ConfusionMatrix confusion(const std::vector<int>& actual,
                          const std::vector<int>& predicted) {
  if (actual.size() != predicted.size()) {
    throw ArgumentError("confusion: label vectors differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const int a = actual[i], p = predicted[i];
    if (a < 0 || a >= kNumClasses || p < 0 || p >= kNumClasses) {
      throw ArgumentError("confusion: label outside 0..2");
    }
    ++cm.counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  MetricsReport report;
  long diag = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    long col = 0, row = 0;
    for (std::size_t o = 0; o < kNumClasses; ++o) {
      col += cm.counts[o][c];
      row += cm.counts[c][o];
    }
    const auto tp = static_cast<double>(cm.counts[c][c]);
    diag += cm.counts[c][c];
    auto& pc = report.per_class[c];
    pc.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
    pc.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
    pc.f1 = pc.precision + pc.recall > 0
                ? 2 * pc.precision * pc.recall / (pc.precision + pc.recall)
                : 0.0;
    report.macro.precision += pc.precision / kNumClasses;
    report.macro.recall += pc.recall / kNumClasses;
    report.macro.f1 += pc.f1 / kNumClasses;
  }
  const long total = cm.total();
  report.accuracy = total > 0 ? static_cast<double>(diag) / static_cast<double>(total) : 0.0;
  return report;
}

double macro_f1(const ConfusionMatrix& cm) { return compute_metrics(cm).macro.f1; }

double time_training(const std::function<void()>& fit) {
  const auto start = std::chrono::steady_clock::now();
  fit();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count();
}

namespace {

std::vector<Sample> take_samples(const std::vector<Sample>& samples,
                                 const std::vector<std::size_t>& idx) {
  std::vector<Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(samples[i]);
  return out;
}

double score_fold(const GridCell& cell, const std::vector<Sample>& train,
                  const std::vector<Sample>& test, CleanStrategy strategy,
                  std::uint64_t fit_seed) {
  const Cleaner cleaner = fit_cleaner(train, strategy);
  std::vector<Sample> clean_train = apply_cleaner(train, cleaner);
  std::vector<Sample> clean_test = apply_cleaner(test, cleaner);
  if (clean_train.empty()) throw DataError("cleaning removed every training row");

  std::vector<long> counts;
  counts.reserve(clean_train.size());
  for (const auto& s : clean_train) counts.push_back(s.passengers);
  const BinThresholds bins = fit_bins(counts);
  label_samples(clean_train, bins);
  label_samples(clean_test, bins);

  const Encoder enc = fit_encoder(clean_train);
  const FeatureMatrix xtr = apply_encoder(enc, clean_train);
  auto model = cell.fit(xtr, fit_seed);

  if (clean_test.empty()) return 0.0;
  const FeatureMatrix xte = apply_encoder(enc, clean_test);
  std::vector<int> predicted(xte.rows);
  for (std::size_t i = 0; i < xte.rows; ++i) predicted[i] = model->predict(xte.row(i));
  return macro_f1(confusion(xte.labels, predicted));
}

}  // namespace

GridCellScore cross_validate(const GridCell& cell,
                             const std::vector<Sample>& samples,
                             const CVOptions& opt, std::uint64_t seed) {
  GridCellScore score;
  score.id = cell.id;
  try {
    std::vector<std::vector<std::size_t>> folds;
    if (opt.stratified) {
      std::vector<long> counts;
      counts.reserve(samples.size());
      for (const auto& s : samples) counts.push_back(s.passengers);
      const BinThresholds bins = fit_bins(counts);
      std::vector<int> labels;
      labels.reserve(samples.size());
      for (const auto& s : samples) {
        labels.push_back(static_cast<int>(bin_demand(s.passengers, bins)));
      }
      folds = kfold_indices_stratified(labels, opt.folds, seed);
    } else {
      folds = kfold_indices(samples.size(), opt.folds, seed);
    }

    double total = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> train_idx;
      train_idx.reserve(samples.size() - folds[f].size());
      for (std::size_t g = 0; g < folds.size(); ++g) {
        if (g == f) continue;
        train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
      }
      std::sort(train_idx.begin(), train_idx.end());

      const std::uint64_t fit_seed = derive_seed(
          seed, "cell/" + cell.id + "/fold/" + std::to_string(f));
      const double fold_score =
          score_fold(cell, take_samples(samples, train_idx),
                     take_samples(samples, folds[f]), opt.strategy, fit_seed);
      score.fold_scores.push_back(fold_score);
      total += fold_score;
    }
    score.mean_macro_f1 = total / static_cast<double>(folds.size());
  } catch (const std::exception& e) {
    score.mean_macro_f1 = 0;
    score.note = e.what();
  }
  return score;
}

GridResult grid_search(const std::vector<GridCell>& grid,
                       const std::vector<Sample>& samples,
                       const CVOptions& opt, std::uint64_t seed) {
  if (grid.empty()) throw ArgumentError("grid_search: empty grid");

  GridResult result;
  result.cells.resize(grid.size());
  parallel_for(grid.size(), opt.jobs, [&](std::size_t i) {
    result.cells[i] = cross_validate(grid[i], samples, opt, seed);
  });
  for (std::size_t i = 1; i < result.cells.size(); ++i) {
    if (result.cells[i].mean_macro_f1 > result.cells[result.best].mean_macro_f1) {
      result.best = i;
    }
  }
  return result;
}

}  // namespace airdemand
