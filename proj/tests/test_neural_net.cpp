#include <doctest.h>

#include <cmath>
#include <vector>

#include "airdemand/errors.hpp"
#include "airdemand/neural_net.hpp"
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
  for (int c = 0; c < kNumClasses && static_cast<std::size_t>(c) < rows; ++c)
    m.labels[c] = c;
  return m;
}

double* param_of(ANNModel& model, std::size_t flat) {
  if (flat < model.w1.size()) return &model.w1[flat];
  flat -= model.w1.size();
  if (flat < model.b1.size()) return &model.b1[flat];
  flat -= model.b1.size();
  if (flat < model.w2.size()) return &model.w2[flat];
  flat -= model.w2.size();
  return &model.b2[flat];
}

std::size_t param_count(const ANNModel& model) {
  return model.w1.size() + model.b1.size() + model.w2.size() + model.b2.size();
}

}  // namespace

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(654);
  const double h = 1e-6;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t rows = 4 + rng.uniform_index(6);
    const std::size_t cols = 2 + rng.uniform_index(3);
    const int hidden = 2 + static_cast<int>(rng.uniform_index(3));
    auto m = random_matrix(rng, rows, cols);
    auto model = ann_init(cols, hidden, 0.05, rng.next());

    ANNModel grad;
    ann_loss_grad(m, model, grad);

    const std::size_t n = param_count(model);
    for (std::size_t j = 0; j < n; ++j) {
      auto mp = model, mm = model;
      *param_of(mp, j) += h;
      *param_of(mm, j) -= h;
      const double fd = (ann_loss(m, mp) - ann_loss(m, mm)) / (2 * h);
      const double g = *param_of(grad, j);
      const double denom = std::max({std::abs(fd), std::abs(g), 1.0});
      CHECK(std::abs(g - fd) / denom < 1e-5);
    }
  }
}

TEST_CASE("loss at the gradient call matches ann_loss") {
  Rng rng(31);
  auto m = random_matrix(rng, 10, 3);
  auto model = ann_init(3, 4, 0.05, 77);
  ANNModel grad;
  CHECK(ann_loss_grad(m, model, grad) == doctest::Approx(ann_loss(m, model)));
}

TEST_CASE("initialization is seeded, bounded and zero-biased") {
  const auto a = ann_init(8, 5, 0.05, 42);
  const auto b = ann_init(8, 5, 0.05, 42);
  const auto c = ann_init(8, 5, 0.05, 43);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.w1 != c.w1);

  const double bound1 = 0.5 / std::sqrt(8.0);
  for (const double v : a.w1) {
    CHECK(v >= -bound1);
    CHECK(v <= bound1);
  }
  const double bound2 = 0.5 / std::sqrt(5.0);
  for (const double v : a.w2) {
    CHECK(v >= -bound2);
    CHECK(v <= bound2);
  }
  for (const double v : a.b1) CHECK(v == 0.0);
  for (const double v : a.b2) CHECK(v == 0.0);
  CHECK(a.w1.size() == 5u * 8u);
  CHECK(a.b1.size() == 5u);
  CHECK(a.w2.size() == 3u * 5u);
  CHECK(a.b2.size() == 3u);
}

TEST_CASE("zero learning rate leaves the weights unchanged") {
  Rng rng(8);
  auto m = random_matrix(rng, 20, 3);
  ANNHyper hyper;
  hyper.hidden = 4;
  hyper.rate = 0.0;
  hyper.epochs = 10;
  hyper.seed = 99;
  const auto model = ann_fit(m, hyper);
  const auto init = ann_init(3, 4, 0.0, 99);
  CHECK(model.w1 == init.w1);
  CHECK(model.b1 == init.b1);
  CHECK(model.w2 == init.w2);
  CHECK(model.b2 == init.b2);
}

TEST_CASE("training drives down the loss on a separable problem") {
  // XOR-style layout needing the hidden layer: class 0 on two opposite
  // corners, class 1 on the other diagonal, class 2 in the center.
  FeatureMatrix m;
  m.rows = 150;
  m.cols = 2;
  m.values.resize(m.rows * m.cols);
  m.labels.resize(m.rows);
  Rng rng(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const int c = static_cast<int>(r % 3);
    double x, y;
    if (c == 0) {
      x = rng.bernoulli(0.5) ? 2.0 : -2.0;
      y = x;
    } else if (c == 1) {
      x = rng.bernoulli(0.5) ? 2.0 : -2.0;
      y = -x;
    } else {
      x = 0.0;
      y = 0.0;
    }
    m.at(r, 0) = x + rng.uniform(-0.3, 0.3);
    m.at(r, 1) = y + rng.uniform(-0.3, 0.3);
    m.labels[r] = c;
  }
  ANNHyper hyper;
  hyper.hidden = 8;
  hyper.rate = 0.5;
  hyper.epochs = 2000;
  hyper.seed = 4;
  const auto model = ann_fit(m, hyper);
  REQUIRE(model.loss_trace.size() >= 2);
  CHECK(model.loss_trace.back() < 0.35 * model.loss_trace.front());

  std::size_t correct = 0;
  for (std::size_t r = 0; r < m.rows; ++r)
    if (argmax_class(ann_predict_proba(model, m.row(r))) == m.labels[r])
      ++correct;
  CHECK(correct >= m.rows * 90 / 100);
}

TEST_CASE("probabilities are a valid distribution") {
  Rng rng(55);
  auto m = random_matrix(rng, 25, 4);
  ANNHyper hyper;
  hyper.hidden = 5;
  hyper.epochs = 50;
  hyper.seed = 3;
  const auto model = ann_fit(m, hyper);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto p = ann_predict_proba(model, m.row(r));
    double sum = 0;
    for (const double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("fit rejects degenerate input") {
  FeatureMatrix empty;
  CHECK_THROWS_AS(ann_fit(empty, {}), ArgumentError);

  Rng rng(1);
  auto m = random_matrix(rng, 10, 2);
  ANNHyper hyper;
  hyper.hidden = 0;
  CHECK_THROWS_AS(ann_fit(m, hyper), ArgumentError);
  hyper.hidden = 3;
  hyper.rate = -1.0;
  CHECK_THROWS_AS(ann_fit(m, hyper), ArgumentError);
}

TEST_CASE("model json round-trips exactly") {
  Rng rng(23);
  auto m = random_matrix(rng, 30, 3);
  ANNHyper hyper;
  hyper.hidden = 6;
  hyper.epochs = 40;
  hyper.seed = 10;
  const auto model = ann_fit(m, hyper);
  const auto back = ann_from_json(ann_to_json(model));
  CHECK(back.n_features == model.n_features);
  CHECK(back.hidden == model.hidden);
  CHECK(back.w1 == model.w1);
  CHECK(back.b1 == model.b1);
  CHECK(back.w2 == model.w2);
  CHECK(back.b2 == model.b2);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto a = ann_predict_proba(model, m.row(r));
    const auto b = ann_predict_proba(back, m.row(r));
    for (int c = 0; c < kNumClasses; ++c) CHECK(a[c] == b[c]);
  }

  const auto clf = classifier_from_json(ann_to_json(model));
  CHECK(clf->kind() == std::string("ann"));
}
