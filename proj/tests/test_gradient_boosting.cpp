#include <doctest.h>

#include <cmath>
#include <vector>

#include "airdemand/errors.hpp"
#include "airdemand/gradient_boosting.hpp"
#include "airdemand/rng.hpp"

using namespace airdemand;

namespace {

FeatureMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  FeatureMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.resize(rows * cols);
  m.labels.resize(rows);
  for (auto& v : m.values) v = rng.uniform(-1, 1);
  for (std::size_t r = 0; r < rows; ++r)
    m.labels[r] = m.at(r, 0) * m.at(r, 1) < -0.1
                      ? 0
                      : (m.at(r, 0) * m.at(r, 1) > 0.1 ? 2 : 1);
  return m;
}

}  // namespace

TEST_CASE("zero stages predict the class-frequency prior") {
  FeatureMatrix m;
  m.rows = 10;
  m.cols = 1;
  m.values.resize(10);
  m.labels = {0, 0, 0, 0, 0, 1, 1, 1, 2, 2};  // priors 0.5, 0.3, 0.2
  for (int i = 0; i < 10; ++i) m.values[i] = i;

  GBHyper hyper;
  hyper.T = 0;
  const auto model = gb_fit(m, hyper);
  CHECK(model.stages.empty());
  CHECK(model.init_score[0] == doctest::Approx(std::log(0.5)));
  CHECK(model.init_score[1] == doctest::Approx(std::log(0.3)));
  CHECK(model.init_score[2] == doctest::Approx(std::log(0.2)));

  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto p = gb_predict_proba(model, m.row(r));
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.3));
    CHECK(p[2] == doctest::Approx(0.2));
  }
  CHECK(gb_predict(model, m.row(0)) == 0);
}

TEST_CASE("deviance trace is non-increasing without subsampling") {
  Rng rng(901);
  FeatureMatrix m = random_matrix(rng, 250, 4);
  GBHyper hyper;
  hyper.T = 40;
  hyper.nu = 0.05;
  hyper.phi = 1.0;  // full-batch: each stage fits the exact gradient
  hyper.seed = 7;
  const auto model = gb_fit(m, hyper);
  REQUIRE(model.deviance_trace.size() == 41u);  // initial + one per stage
  for (std::size_t i = 1; i < model.deviance_trace.size(); ++i)
    CHECK(model.deviance_trace[i] <= model.deviance_trace[i - 1] + 1e-9);
}

TEST_CASE("boosting reduces deviance and fits the training data") {
  Rng rng(17);
  FeatureMatrix m = random_matrix(rng, 300, 4);
  GBHyper hyper;
  hyper.T = 80;
  hyper.nu = 0.2;
  hyper.phi = 1.0;
  hyper.seed = 11;
  const auto model = gb_fit(m, hyper);
  CHECK(model.deviance_trace.back() < 0.5 * model.deviance_trace.front());
  std::size_t correct = 0;
  for (std::size_t r = 0; r < m.rows; ++r)
    if (gb_predict(model, m.row(r)) == m.labels[r]) ++correct;
  CHECK(correct >= m.rows * 85 / 100);
}

TEST_CASE("staged prediction with all stages equals the full model") {
  Rng rng(23);
  FeatureMatrix m = random_matrix(rng, 120, 3);
  GBHyper hyper;
  hyper.T = 15;
  hyper.phi = 0.7;
  hyper.seed = 2;
  const auto model = gb_fit(m, hyper);

  for (std::size_t r = 0; r < 10; ++r) {
    const auto full = gb_predict_proba(model, m.row(r));
    const auto staged = gb_predict_proba_staged(model, m.row(r), model.stages.size());
    for (int c = 0; c < kNumClasses; ++c) CHECK(staged[c] == full[c]);

    const auto prior_only = gb_predict_proba_staged(model, m.row(r), 0);
    double prior_sum = 0;
    for (const double v : prior_only) prior_sum += v;
    CHECK(prior_sum == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(
      gb_predict_proba_staged(model, m.row(0), model.stages.size() + 1),
      ArgumentError);
}

TEST_CASE("subsampling is seeded and deterministic") {
  Rng rng(5);
  FeatureMatrix m = random_matrix(rng, 200, 3);
  GBHyper hyper;
  hyper.T = 10;
  hyper.phi = 0.5;
  hyper.seed = 99;
  const auto a = gb_fit(m, hyper);
  const auto b = gb_fit(m, hyper);
  REQUIRE(a.stages.size() == b.stages.size());
  CHECK(a.deviance_trace == b.deviance_trace);
  for (std::size_t s = 0; s < a.stages.size(); ++s) {
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& ta = a.stages[s].trees[c];
      const auto& tb = b.stages[s].trees[c];
      REQUIRE(ta.nodes.size() == tb.nodes.size());
      for (std::size_t i = 0; i < ta.nodes.size(); ++i) {
        CHECK(ta.nodes[i].feature == tb.nodes[i].feature);
        CHECK(ta.nodes[i].threshold == tb.nodes[i].threshold);
        CHECK(ta.nodes[i].value == tb.nodes[i].value);
      }
    }
  }

  GBHyper other = hyper;
  other.seed = 100;
  const auto c = gb_fit(m, other);
  CHECK(a.deviance_trace != c.deviance_trace);
}

TEST_CASE("shrinkage controls the step size") {
  // With tiny nu the deviance moves slowly; with larger nu it drops
  // faster over the same number of stages.
  Rng rng(8);
  FeatureMatrix m = random_matrix(rng, 200, 3);
  GBHyper slow;
  slow.T = 10;
  slow.nu = 0.01;
  slow.phi = 1.0;
  GBHyper fast = slow;
  fast.nu = 0.3;
  const auto a = gb_fit(m, slow);
  const auto b = gb_fit(m, fast);
  CHECK(b.deviance_trace.back() < a.deviance_trace.back());
}

TEST_CASE("invalid hyperparameters are rejected") {
  Rng rng(3);
  FeatureMatrix m = random_matrix(rng, 50, 2);
  GBHyper hyper;
  hyper.T = -1;
  CHECK_THROWS_AS(gb_fit(m, hyper), ArgumentError);
  hyper.T = 5;
  hyper.nu = -0.1;
  CHECK_THROWS_AS(gb_fit(m, hyper), ArgumentError);
  hyper.nu = 0.1;
  hyper.phi = 0.0;
  CHECK_THROWS_AS(gb_fit(m, hyper), ArgumentError);
  hyper.phi = 1.5;
  CHECK_THROWS_AS(gb_fit(m, hyper), ArgumentError);

  FeatureMatrix empty;
  CHECK_THROWS_AS(gb_fit(empty, GBHyper{}), ArgumentError);
}

TEST_CASE("serialization round-trips the whole model") {
  Rng rng(41);
  FeatureMatrix m = random_matrix(rng, 150, 3);
  GBHyper hyper;
  hyper.T = 8;
  hyper.nu = 0.1;
  hyper.phi = 0.6;
  hyper.seed = 13;
  const auto model = gb_fit(m, hyper);

  const auto text = gb_serialize(model);
  const auto back = gb_parse(text);
  CHECK(back.n_features == model.n_features);
  CHECK(back.nu == model.nu);
  CHECK(back.seed == model.seed);
  for (int c = 0; c < kNumClasses; ++c)
    CHECK(back.init_score[c] == model.init_score[c]);
  REQUIRE(back.stages.size() == model.stages.size());
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& ta = model.stages[s].trees[c];
      const auto& tb = back.stages[s].trees[c];
      REQUIRE(tb.nodes.size() == ta.nodes.size());
      for (std::size_t i = 0; i < ta.nodes.size(); ++i) {
        CHECK(tb.nodes[i].feature == ta.nodes[i].feature);
        CHECK(tb.nodes[i].threshold == ta.nodes[i].threshold);
        CHECK(tb.nodes[i].value == ta.nodes[i].value);
      }
    }
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto a = gb_predict_proba(model, m.row(r));
    const auto b = gb_predict_proba(back, m.row(r));
    for (int c = 0; c < kNumClasses; ++c) CHECK(a[c] == b[c]);
  }

  const auto clf = classifier_from_json(text);
  CHECK(clf->kind() == std::string("gb"));
  const auto direct = gb_predict_proba(model, m.row(0));
  const auto wrapped = clf->predict_proba(m.row(0));
  for (int c = 0; c < kNumClasses; ++c) CHECK(wrapped[c] == direct[c]);
}
