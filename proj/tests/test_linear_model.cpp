#include <doctest.h>

#include <cmath>
#include <vector>

#include "airdemand/errors.hpp"
#include "airdemand/linear_model.hpp"
#include "airdemand/rng.hpp"

using namespace airdemand;

namespace {

FeatureMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.resize(rows * cols);
  m.labels.resize(rows);
  for (auto& v : m.values) v = rng.uniform(-2, 2);
  for (std::size_t r = 0; r < rows; ++r)
    m.labels[r] = static_cast<int>(rng.uniform_index(kNumClasses));
  // make sure every class appears
  for (int c = 0; c < kNumClasses && static_cast<std::size_t>(c) < rows; ++c)
    m.labels[c] = c;
  return m;
}

LRWeights random_weights(Rng& rng, std::size_t cols) {
  LRWeights w;
  for (auto& wc : w) {
    wc.resize(cols + 1);
    for (auto& v : wc) v = rng.uniform(-1, 1);
  }
  return w;
}

}  // namespace

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(321);
  const double h = 1e-6;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t rows = 4 + rng.uniform_index(8);
    const std::size_t cols = 2 + rng.uniform_index(4);
    auto m = random_matrix(rng, rows, cols);
    auto w = random_weights(rng, cols);

    LRWeights grad;
    lr_loss_grad(m, w, grad);

    for (int c = 0; c < kNumClasses; ++c) {
      for (std::size_t j = 0; j <= cols; ++j) {
        auto wp = w, wm = w;
        wp[c][j] += h;
        wm[c][j] -= h;
        const double fd = (lr_loss(m, wp) - lr_loss(m, wm)) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[c][j]), 1.0});
        CHECK(std::abs(grad[c][j] - fd) / denom < 1e-5);
      }
    }
  }
}

TEST_CASE("loss at the gradient call matches lr_loss") {
  Rng rng(7);
  auto m = random_matrix(rng, 12, 3);
  auto w = random_weights(rng, 3);
  LRWeights grad;
  CHECK(lr_loss_grad(m, w, grad) == doctest::Approx(lr_loss(m, w)));
}

TEST_CASE("softmax probabilities from hand-computed weights") {
  // Single feature x = 1. Class-0 score ln 2, others 0:
  // p = (2, 1, 1) / 4.
  LRModel model;
  model.n_features = 1;
  model.weights[0] = {std::log(2.0), 0.0};
  model.weights[1] = {0.0, 0.0};
  model.weights[2] = {0.0, 0.0};
  const double x = 1.0;
  const auto p = lr_predict_proba(model, &x);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.25));
  CHECK(p[2] == doctest::Approx(0.25));
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0));
}

TEST_CASE("zero weights give the uniform distribution") {
  LRModel model;
  model.n_features = 2;
  for (auto& w : model.weights) w = {0.0, 0.0, 0.0};
  const double row[2] = {3.0, -1.0};
  const auto p = lr_predict_proba(model, row);
  for (const double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("training loss trace is non-increasing") {
  Rng rng(99);
  auto m = random_matrix(rng, 60, 4);
  LRHyper hyper;
  hyper.max_iter = 80;
  const auto model = lr_fit(m, hyper);
  REQUIRE(model.loss_trace.size() >= 2);
  for (std::size_t i = 1; i < model.loss_trace.size(); ++i)
    CHECK(model.loss_trace[i] <= model.loss_trace[i - 1] + 1e-12);
}

TEST_CASE("fit separates a linearly separable problem") {
  // Class determined by which of three directions the point leans toward.
  FeatureMatrix m;
  m.rows = 120;
  m.cols = 2;
  m.values.resize(m.rows * m.cols);
  m.labels.resize(m.rows);
  Rng rng(5);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const int c = static_cast<int>(r % 3);
    const double angle = 2.0943951023931953 * c;  // 2*pi/3 spacing
    m.at(r, 0) = 3.0 * std::cos(angle) + rng.uniform(-0.5, 0.5);
    m.at(r, 1) = 3.0 * std::sin(angle) + rng.uniform(-0.5, 0.5);
    m.labels[r] = c;
  }
  LRHyper hyper;
  hyper.max_iter = 400;
  const auto model = lr_fit(m, hyper);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto p = lr_predict_proba(model, m.row(r));
    if (argmax_class(p) == m.labels[r]) ++correct;
  }
  CHECK(correct >= m.rows * 95 / 100);
}

TEST_CASE("fit rejects degenerate input") {
  FeatureMatrix empty;
  CHECK_THROWS_AS(lr_fit(empty), ArgumentError);

  FeatureMatrix unlabeled;
  unlabeled.rows = 2;
  unlabeled.cols = 1;
  unlabeled.values = {0.0, 1.0};
  unlabeled.labels = {-1, -1};
  CHECK_THROWS_AS(lr_fit(unlabeled), ArgumentError);
}

TEST_CASE("model json round-trips exactly") {
  Rng rng(11);
  auto m = random_matrix(rng, 30, 3);
  const auto model = lr_fit(m, {});
  const auto back = lr_from_json(lr_to_json(model));
  CHECK(back.n_features == model.n_features);
  for (int c = 0; c < kNumClasses; ++c) {
    REQUIRE(back.weights[c].size() == model.weights[c].size());
    for (std::size_t j = 0; j < model.weights[c].size(); ++j)
      CHECK(back.weights[c][j] == model.weights[c][j]);
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto a = lr_predict_proba(model, m.row(r));
    const auto b = lr_predict_proba(back, m.row(r));
    for (int c = 0; c < kNumClasses; ++c) CHECK(a[c] == b[c]);
  }
}

TEST_CASE("classifier wrapper serializes and predicts consistently") {
  Rng rng(13);
  auto m = random_matrix(rng, 30, 3);
  auto model = lr_fit(m, {});
  const auto direct = lr_predict_proba(model, m.row(0));
  const auto clf = wrap_lr(std::move(model));
  CHECK(clf->kind() == std::string("lr"));
  CHECK(clf->n_features() == 3);
  const auto wrapped = clf->predict_proba(m.row(0));
  for (int c = 0; c < kNumClasses; ++c) CHECK(wrapped[c] == direct[c]);
}
