#include "airdemand/neural_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "airdemand/errors.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

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

void forward(const ANNModel& m, const double* row, std::vector<double>& a1,
             Proba& p) {
  const std::size_t n = m.n_features;
  const int h = m.hidden;
  a1.resize(h);
  for (int u = 0; u < h; ++u) {
    double z = m.b1[u];
    const double* wrow = m.w1.data() + static_cast<std::size_t>(u) * n;
    for (std::size_t j = 0; j < n; ++j) z += wrow[j] * row[j];
    a1[u] = sigmoid(z);
  }
  Proba scores;
  for (int c = 0; c < kNumClasses; ++c) {
    double z = m.b2[c];
    const double* wrow = m.w2.data() + static_cast<std::size_t>(c) * h;
    for (int u = 0; u < h; ++u) z += wrow[u] * a1[u];
    scores[c] = z;
  }
  p = softmax(scores);
}

void check_labels(const FeatureMatrix& m) {
  if (m.rows == 0) throw ArgumentError("ann: empty matrix");
  for (const int y : m.labels)
    if (y < 0 || y >= kNumClasses)
      throw ArgumentError("ann: unlabeled row in training data");
}

}  // namespace

ANNModel ann_init(std::size_t n_features, int hidden, double rate,
                  std::uint64_t seed) {
  if (hidden < 1) throw ArgumentError("ann: hidden size must be >= 1");
  ANNModel m;
  m.n_features = n_features;
  m.hidden = hidden;
  m.rate = rate;
  m.w1.resize(static_cast<std::size_t>(hidden) * n_features);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(static_cast<std::size_t>(kNumClasses) * hidden);
  m.b2.assign(kNumClasses, 0.0);
  Rng rng(seed);
  const double lim1 = 0.5 / std::sqrt(std::max<std::size_t>(n_features, 1));
  for (double& w : m.w1) w = rng.uniform(-lim1, lim1);
  const double lim2 = 0.5 / std::sqrt(hidden);
  for (double& w : m.w2) w = rng.uniform(-lim2, lim2);
  return m;
}

double ann_loss(const FeatureMatrix& m, const ANNModel& model) {
  std::vector<double> a1;
  Proba p;
  double total = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    forward(model, m.row(i), a1, p);
    total -= std::log(p[m.labels[i]]);
  }
  return total / static_cast<double>(m.rows);
}

double ann_loss_grad(const FeatureMatrix& m, const ANNModel& model,
                     ANNModel& grad) {
  const std::size_t n = model.n_features;
  const int h = model.hidden;
  grad.n_features = n;
  grad.hidden = h;
  grad.w1.assign(model.w1.size(), 0.0);
  grad.b1.assign(model.b1.size(), 0.0);
  grad.w2.assign(model.w2.size(), 0.0);
  grad.b2.assign(model.b2.size(), 0.0);

  std::vector<double> a1, d1(h);
  Proba p;
  double total = 0;
  const double inv_m = 1.0 / static_cast<double>(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    forward(model, row, a1, p);
    total -= std::log(p[m.labels[i]]);

    Proba d2;
    for (int c = 0; c < kNumClasses; ++c)
      d2[c] = (p[c] - (m.labels[i] == c ? 1.0 : 0.0)) * inv_m;
    for (int c = 0; c < kNumClasses; ++c) {
      double* wrow = grad.w2.data() + static_cast<std::size_t>(c) * h;
      for (int u = 0; u < h; ++u) wrow[u] += d2[c] * a1[u];
      grad.b2[c] += d2[c];
    }
    for (int u = 0; u < h; ++u) {
      double back = 0;
      for (int c = 0; c < kNumClasses; ++c)
        back += model.w2[static_cast<std::size_t>(c) * h + u] * d2[c];
      d1[u] = back * a1[u] * (1.0 - a1[u]);
    }
    for (int u = 0; u < h; ++u) {
      double* wrow = grad.w1.data() + static_cast<std::size_t>(u) * n;
      for (std::size_t j = 0; j < n; ++j) wrow[j] += d1[u] * row[j];
      grad.b1[u] += d1[u];
    }
  }
  return total * inv_m;
}

ANNModel ann_fit(const FeatureMatrix& m, const ANNHyper& hyper) {
  check_labels(m);
  if (hyper.rate < 0) throw ArgumentError("ann: rate must be >= 0");
  if (hyper.epochs < 0) throw ArgumentError("ann: epochs must be >= 0");

  ANNModel model = ann_init(m.cols, hyper.hidden, hyper.rate, hyper.seed);
  ANNModel grad;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const double loss = ann_loss_grad(m, model, grad);
    if (!std::isfinite(loss))
      throw TrainingError("ann: non-finite loss at epoch " +
                          std::to_string(epoch + 1));
    model.loss_trace.push_back(loss);
    const double rate = hyper.rate;
    for (std::size_t j = 0; j < model.w1.size(); ++j)
      model.w1[j] -= rate * grad.w1[j];
    for (std::size_t j = 0; j < model.b1.size(); ++j)
      model.b1[j] -= rate * grad.b1[j];
    for (std::size_t j = 0; j < model.w2.size(); ++j)
      model.w2[j] -= rate * grad.w2[j];
    for (std::size_t j = 0; j < model.b2.size(); ++j)
      model.b2[j] -= rate * grad.b2[j];
  }
  const double final_loss = ann_loss(m, model);
  if (!std::isfinite(final_loss))
    throw TrainingError("ann: non-finite final loss");
  model.loss_trace.push_back(final_loss);
  return model;
}

Proba ann_predict_proba(const ANNModel& model, const double* row) {
  std::vector<double> a1;
  Proba p;
  forward(model, row, a1, p);
  return p;
}

std::string ann_to_json(const ANNModel& model) {
  nlohmann::json j;
  j["kind"] = "ann";
  j["n_features"] = model.n_features;
  j["hidden"] = model.hidden;
  j["rate"] = model.rate;
  j["w1"] = model.w1;
  j["b1"] = model.b1;
  j["w2"] = model.w2;
  j["b2"] = model.b2;
  return j.dump() + "\n";
}

ANNModel ann_from_json(const std::string& text) {
  ANNModel model;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("kind").get<std::string>() != "ann")
      throw FormatError("ann: wrong model kind");
    model.n_features = j.at("n_features").get<std::size_t>();
    model.hidden = j.at("hidden").get<int>();
    model.rate = j.at("rate").get<double>();
    model.w1 = j.at("w1").get<std::vector<double>>();
    model.b1 = j.at("b1").get<std::vector<double>>();
    model.w2 = j.at("w2").get<std::vector<double>>();
    model.b2 = j.at("b2").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ann: ") + e.what());
  }
  const std::size_t h = static_cast<std::size_t>(model.hidden);
  if (model.hidden < 1 || model.w1.size() != h * model.n_features ||
      model.b1.size() != h || model.w2.size() != kNumClasses * h ||
      model.b2.size() != kNumClasses)
    throw FormatError("ann: inconsistent layer shapes");
  return model;
}

namespace {

class ANNClassifier final : public Classifier {
 public:
  explicit ANNClassifier(ANNModel model) : model_(std::move(model)) {}
  Proba predict_proba(const double* row) const override {
    return ann_predict_proba(model_, row);
  }
  std::size_t n_features() const override { return model_.n_features; }
  std::string kind() const override { return "ann"; }
  std::string serialize() const override { return ann_to_json(model_); }

 private:
  ANNModel model_;
};

}  // namespace

std::unique_ptr<Classifier> wrap_ann(ANNModel model) {
  return std::make_unique<ANNClassifier>(std::move(model));
}

}  // namespace airdemand
