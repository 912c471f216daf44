#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "airdemand/classifier.hpp"
#include "airdemand/matrix.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

struct TreeHyper {
  int max_depth = kUnlimitedDepth;
  double min_gain = 1e-7;
  double min_leaf = 1.0;  // minimum weight sum per child
};

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0;  // rows with value < threshold go left
  double gain = 0;       // entropy gain (bits) or SSE reduction
};

// Midpoint candidate between consecutive distinct values a < b, nudged to
// b when rounding would fail to separate them.
inline double split_midpoint(double a, double b) {
  const double mid = a + (b - a) / 2;
  return mid > a ? mid : b;
}

// Shannon entropy in bits of a weighted class distribution.
double entropy_bits(const std::array<double, kNumClasses>& class_weights);

// Best threshold split by information gain over the candidate features.
// Ties break toward the lowest feature index, then the lowest threshold,
// independent of candidate order. Returns nothing when the best gain is
// below min_gain or no split satisfies min_leaf.
std::optional<SplitChoice> best_split(
    const FeatureMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<double>* row_weights,
    const std::vector<std::size_t>& features, double min_gain,
    double min_leaf = 1.0);

// Same candidate space scored by weighted SSE reduction of a target.
std::optional<SplitChoice> best_split_regression(
    const FeatureMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<double>& targets, const std::vector<double>* row_weights,
    const std::vector<std::size_t>& features, double min_gain,
    double min_leaf = 1.0);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1, right = -1;
  Proba dist{};      // classification leaf: weighted class frequencies
  double value = 0;  // regression leaf
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;

  bool empty() const { return nodes.empty(); }
};

// Recursive best_split application over the given rows (indices may
// repeat, e.g. a bootstrap resample). With 0 < mtry < column count and an
// rng, each node draws mtry distinct candidate features.
DecisionTree tree_fit_rows(const FeatureMatrix& m,
                           const std::vector<std::size_t>& rows,
                           const std::vector<double>* row_weights,
                           const TreeHyper& hyper, int mtry = 0,
                           Rng* rng = nullptr);

DecisionTree tree_fit(const FeatureMatrix& m, const TreeHyper& hyper = {},
                      const std::vector<double>* row_weights = nullptr);

// Regression tree on per-row targets; leaf_value maps the rows reaching a
// leaf to its value (weighted target mean when absent).
DecisionTree regression_tree_fit(
    const FeatureMatrix& m, const std::vector<std::size_t>& rows,
    const std::vector<double>& targets, const TreeHyper& hyper,
    const std::function<double(const std::vector<std::size_t>&)>& leaf_value =
        nullptr);

const TreeNode& tree_leaf_for(const DecisionTree& tree, const double* row);
Proba tree_predict_proba(const DecisionTree& tree, const double* row);
int tree_predict(const DecisionTree& tree, const double* row);
double tree_predict_value(const DecisionTree& tree, const double* row);

int tree_depth(const DecisionTree& tree);

// Compact line format used inside forest/boosting model files.
void serialize_tree(const DecisionTree& tree, std::string& out);
DecisionTree parse_tree(const std::string& text, std::size_t& pos,
                        std::size_t n_features);

std::string tree_to_text(const DecisionTree& tree);
DecisionTree tree_from_text(const std::string& text, std::size_t n_features);

}  // namespace airdemand
