#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "airdemand/classifier.hpp"
#include "airdemand/matrix.hpp"

namespace airdemand {

struct ANNHyper {
  int hidden = 10;
  double rate = 0.05;
  int epochs = 1000;
  std::uint64_t seed = 0;
};

// Three layers: sigmoid hidden, softmax output. Weight matrices are
// row-major by destination unit.
struct ANNModel {
  std::size_t n_features = 0;
  int hidden = 0;
  double rate = 0;
  std::vector<double> w1;  // hidden x n_features
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // kNumClasses x hidden
  std::vector<double> b2;  // kNumClasses
  std::vector<double> loss_trace;
};

// Weights uniform in [-0.5/sqrt(fan_in), +0.5/sqrt(fan_in)] from the
// seed, biases zero.
ANNModel ann_init(std::size_t n_features, int hidden, double rate,
                  std::uint64_t seed);

// Mean cross-entropy over the matrix; grad mirrors the model's vector
// shapes. Exposed for the finite-difference oracle.
double ann_loss(const FeatureMatrix& m, const ANNModel& model);
double ann_loss_grad(const FeatureMatrix& m, const ANNModel& model,
                     ANNModel& grad);

// Full-batch gradient descent at a fixed rate for the given epochs.
ANNModel ann_fit(const FeatureMatrix& m, const ANNHyper& hyper);

Proba ann_predict_proba(const ANNModel& model, const double* row);

std::string ann_to_json(const ANNModel& model);
ANNModel ann_from_json(const std::string& text);
std::unique_ptr<Classifier> wrap_ann(ANNModel model);

}  // namespace airdemand
