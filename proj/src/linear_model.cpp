#include "airdemand/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "airdemand/errors.hpp"

namespace airdemand {

namespace {

// Stable softmax of per-class scores.
Proba softmax(const Proba& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  Proba p;
  double z = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    p[c] = std::exp(scores[c] - top);
    z += p[c];
  }
  for (int c = 0; c < kNumClasses; ++c) p[c] /= z;
  return p;
}

Proba scores_of(const LRWeights& w, const double* row, std::size_t n) {
  Proba s;
  for (int c = 0; c < kNumClasses; ++c) {
    double acc = w[c][n];  // bias
    for (std::size_t j = 0; j < n; ++j) acc += w[c][j] * row[j];
    s[c] = acc;
  }
  return s;
}

void check_labels(const FeatureMatrix& m) {
  if (m.rows == 0) throw ArgumentError("lr: empty matrix");
  bool seen[kNumClasses] = {};
  for (const int y : m.labels) {
    if (y < 0 || y >= kNumClasses)
      throw ArgumentError("lr: unlabeled row in training data");
    seen[y] = true;
  }
  int present = 0;
  for (const bool b : seen) present += b;
  if (present < 2) throw ArgumentError("lr: fewer than 2 classes present");
}

}  // namespace

double lr_loss(const FeatureMatrix& m, const LRWeights& w) {
  double total = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const Proba p = softmax(scores_of(w, m.row(i), m.cols));
    total -= std::log(p[m.labels[i]]);
  }
  return total / static_cast<double>(m.rows);
}

double lr_loss_grad(const FeatureMatrix& m, const LRWeights& w,
                    LRWeights& grad) {
  const std::size_t n = m.cols;
  for (int c = 0; c < kNumClasses; ++c) grad[c].assign(n + 1, 0.0);
  double total = 0;
  const double inv_m = 1.0 / static_cast<double>(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    const Proba p = softmax(scores_of(w, row, n));
    total -= std::log(p[m.labels[i]]);
    for (int c = 0; c < kNumClasses; ++c) {
      const double d = (p[c] - (m.labels[i] == c ? 1.0 : 0.0)) * inv_m;
      for (std::size_t j = 0; j < n; ++j) grad[c][j] += d * row[j];
      grad[c][n] += d;
    }
  }
  return total * inv_m;
}

LRModel lr_fit(const FeatureMatrix& m, const LRHyper& hyper) {
  check_labels(m);
  if (hyper.max_iter < 1) throw ArgumentError("lr: max_iter must be >= 1");
  if (hyper.step <= 0) throw ArgumentError("lr: step must be > 0");

  LRModel model;
  model.n_features = m.cols;
  LRWeights w;
  for (int c = 0; c < kNumClasses; ++c) w[c].assign(m.cols + 1, 0.0);

  LRWeights grad;
  double loss = lr_loss_grad(m, w, grad);
  if (!std::isfinite(loss)) throw TrainingError("lr: non-finite loss at start");
  model.loss_trace.push_back(loss);

  double step = hyper.step;
  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    LRWeights candidate;
    double cand_loss;
    for (;;) {
      candidate = w;
      for (int c = 0; c < kNumClasses; ++c)
        for (std::size_t j = 0; j <= m.cols; ++j)
          candidate[c][j] -= step * grad[c][j];
      cand_loss = lr_loss(m, candidate);
      if (!std::isfinite(cand_loss))
        throw TrainingError("lr: non-finite loss at iteration " +
                            std::to_string(iter + 1));
      if (cand_loss <= loss) break;
      step /= 2;
      if (step < 1e-18) break;
    }
    if (cand_loss > loss) break;  // step underflow, nothing acceptable
    const double improvement = loss - cand_loss;
    w = std::move(candidate);
    loss = cand_loss;
    model.loss_trace.push_back(loss);
    if (improvement < hyper.tol) break;
    lr_loss_grad(m, w, grad);
    step = std::min(step * 2, hyper.step);
  }

  model.weights = std::move(w);
  return model;
}

Proba lr_predict_proba(const LRModel& model, const double* row) {
  return softmax(scores_of(model.weights, row, model.n_features));
}

std::string lr_to_json(const LRModel& model) {
  nlohmann::json j;
  j["kind"] = "lr";
  j["n_features"] = model.n_features;
  j["weights"] = model.weights;
  return j.dump() + "\n";
}

LRModel lr_from_json(const std::string& text) {
  LRModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "lr")
      throw FormatError("lr: wrong model kind");
    model.n_features = j.at("n_features").get<std::size_t>();
    const auto& w = j.at("weights");
    if (w.size() != kNumClasses) throw FormatError("lr: bad weight count");
    for (int c = 0; c < kNumClasses; ++c) {
      model.weights[c] = w[c].get<std::vector<double>>();
      if (model.weights[c].size() != model.n_features + 1)
        throw FormatError("lr: bad weight vector length");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("lr: ") + e.what());
  }
  return model;
}

namespace {

class LRClassifier final : public Classifier {
 public:
  explicit LRClassifier(LRModel model) : model_(std::move(model)) {}
  Proba predict_proba(const double* row) const override {
    return lr_predict_proba(model_, row);
  }
  std::size_t n_features() const override { return model_.n_features; }
  std::string kind() const override { return "lr"; }
  std::string serialize() const override { return lr_to_json(model_); }

 private:
  LRModel model_;
};

}  // namespace

std::unique_ptr<Classifier> wrap_lr(LRModel model) {
  return std::make_unique<LRClassifier>(std::move(model));
}

}  // namespace airdemand
