#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "airdemand/decision_tree.hpp"

namespace airdemand {

struct GBHyper {
  int T = 100;          // boosting stages
  double nu = 0.1;      // shrinkage
  double phi = 0.5;     // row subsample fraction per stage
  int depth = 3;        // regression tree depth
  double min_gain = 1e-7;
  double min_leaf = 5.0;
  std::uint64_t seed = 0;
};

struct GBStage {
  std::array<DecisionTree, kNumClasses> trees;
};

struct GBModel {
  std::size_t n_features = 0;
  Proba init_score{};  // log class priors
  double nu = 0.1;
  std::uint64_t seed = 0;
  std::vector<GBStage> stages;
  std::vector<double> deviance_trace;  // initial value plus one entry per stage
};

// Multinomial deviance boosting: one regression tree per class per stage,
// fitted to residuals on a shared subsample, Newton-style leaf values,
// shrunken additive score updates.
GBModel gb_fit(const FeatureMatrix& m, const GBHyper& hyper);

Proba gb_predict_proba(const GBModel& model, const double* row);
// Probabilities using only the first `stages` boosting stages.
Proba gb_predict_proba_staged(const GBModel& model, const double* row, std::size_t stages);
int gb_predict(const GBModel& model, const double* row);

std::string gb_serialize(const GBModel& model);
GBModel gb_parse(const std::string& text);
std::unique_ptr<Classifier> wrap_gb(GBModel model);

}  // namespace airdemand
