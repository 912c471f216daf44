#pragma once

#include <array>
#include <memory>
#include <vector>

#include "airdemand/classifier.hpp"
#include "airdemand/matrix.hpp"

namespace airdemand {

struct LRHyper {
  int max_iter = 100;
  double step = 1.0;    // initial gradient-descent step
  double tol = 1e-7;    // stop when the loss improves by less
};

// Per-class weight vectors of length N+1; the bias is the last entry.
struct LRModel {
  std::size_t n_features = 0;
  std::array<std::vector<double>, kNumClasses> weights;
  std::vector<double> loss_trace;  // non-increasing under step halving
};

using LRWeights = std::array<std::vector<double>, kNumClasses>;

// Mean multinomial negative log-likelihood and its gradient; exposed for
// the finite-difference oracle.
double lr_loss(const FeatureMatrix& m, const LRWeights& w);
double lr_loss_grad(const FeatureMatrix& m, const LRWeights& w,
                    LRWeights& grad);

// Full-batch gradient descent from zero weights with step halving on any
// loss increase.
LRModel lr_fit(const FeatureMatrix& m, const LRHyper& hyper = {});

Proba lr_predict_proba(const LRModel& model, const double* row);

std::string lr_to_json(const LRModel& model);
LRModel lr_from_json(const std::string& text);
std::unique_ptr<Classifier> wrap_lr(LRModel model);

}  // namespace airdemand
