#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "airdemand/decision_tree.hpp"

namespace airdemand {

struct RFHyper {
  int T = 100;
  int mtry = 0;  // features sampled per node; 0 means floor(sqrt(N))
  bool bootstrap = true;
  std::uint64_t seed = 0;
  TreeHyper tree{};  // unlimited depth, min_gain 1e-7, min_leaf 1
};

struct RFModel {
  std::size_t n_features = 0;
  int mtry = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;
};

// Each tree grows on a bootstrap resample (size M, with replacement) from
// a per-tree derived seed; tree builds may run on several threads.
RFModel rf_fit(const FeatureMatrix& m, const RFHyper& hyper, int jobs = 1);

// Hard majority vote; proba holds the vote shares.
Proba rf_predict_proba(const RFModel& model, const double* row);
int rf_predict(const RFModel& model, const double* row);

std::string rf_serialize(const RFModel& model);
RFModel rf_parse(const std::string& text);
std::unique_ptr<Classifier> wrap_rf(RFModel model);

// Grid value for mtry given the column count: sqrt, n2, n3, n4.
int resolve_mtry(const std::string& name, std::size_t n_columns);

}  // namespace airdemand
