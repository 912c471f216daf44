#include "airdemand/gradient_boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "airdemand/csv.hpp"
#include "airdemand/errors.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

Proba softmax_of(const Proba& scores) {
  const double top = std::max({scores[0], scores[1], scores[2]});
  Proba p{};
  double total = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    p[c] = std::exp(scores[c] - top);
    total += p[c];
  }
  for (auto& v : p) v /= total;
  return p;
}

double mean_deviance(const std::vector<Proba>& scores, const std::vector<int>& labels) {
  double total = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Proba p = softmax_of(scores[i]);
    total += -std::log(std::max(p[static_cast<std::size_t>(labels[i])], 1e-300));
  }
  return total / static_cast<double>(scores.size());
}

}  // namespace

GBModel gb_fit(const FeatureMatrix& m, const GBHyper& hyper) {
  if (m.rows == 0) throw ArgumentError("gb_fit: empty matrix");
  if (hyper.T < 0) throw ArgumentError("gb_fit: T must be >= 0");
  if (!(hyper.nu > 0)) throw ArgumentError("gb_fit: nu must be > 0");
  if (!(hyper.phi > 0 && hyper.phi <= 1)) throw ArgumentError("gb_fit: phi must be in (0, 1]");
  if (hyper.depth < 0) throw ArgumentError("gb_fit: depth must be >= 0");
  for (int y : m.labels) {
    if (y < 0 || y >= static_cast<int>(kNumClasses)) {
      throw ArgumentError("gb_fit: every row needs a label in 0..2");
    }
  }

  const std::size_t rows_n = m.rows;
  GBModel model;
  model.n_features = m.cols;
  model.nu = hyper.nu;
  model.seed = hyper.seed;

  Proba prior{};
  for (int y : m.labels) prior[static_cast<std::size_t>(y)] += 1.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    model.init_score[c] = std::log(std::max(prior[c] / static_cast<double>(rows_n), 1e-12));
  }

  std::vector<Proba> score(rows_n, model.init_score);
  model.deviance_trace.push_back(mean_deviance(score, m.labels));

  std::size_t sample_n = rows_n;
  if (hyper.phi < 1) {
    sample_n = static_cast<std::size_t>(std::llround(hyper.phi * static_cast<double>(rows_n)));
    sample_n = std::clamp<std::size_t>(sample_n, 1, rows_n);
  }

  TreeHyper tree_hyper;
  tree_hyper.max_depth = hyper.depth;
  tree_hyper.min_gain = hyper.min_gain;
  tree_hyper.min_leaf = hyper.min_leaf;

  std::vector<std::size_t> pool(rows_n);
  std::vector<double> residual(rows_n, 0.0);
  constexpr double kFactor =
      (static_cast<double>(kNumClasses) - 1.0) / static_cast<double>(kNumClasses);

  for (int stage = 0; stage < hyper.T; ++stage) {
    Rng rng(derive_seed(hyper.seed, "gb/stage/" + std::to_string(stage)));
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    if (sample_n < rows_n) {
      for (std::size_t i = 0; i < sample_n; ++i) {
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
      }
      pool.resize(sample_n);
    }

    GBStage fitted;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      for (std::size_t i : pool) {
        const double y = m.labels[i] == static_cast<int>(c) ? 1.0 : 0.0;
        residual[i] = y - softmax_of(score[i])[c];
      }
      auto leaf_value = [&](const std::vector<std::size_t>& leaf_rows) {
        double num = 0, den = 0;
        for (std::size_t i : leaf_rows) {
          const double r = residual[i];
          num += r;
          den += std::abs(r) * (1.0 - std::abs(r));
        }
        return den <= 1e-12 ? 0.0 : kFactor * num / den;
      };
      fitted.trees[c] = regression_tree_fit(m, pool, residual, tree_hyper, leaf_value);
    }

    for (std::size_t i = 0; i < rows_n; ++i) {
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        score[i][c] += hyper.nu * tree_predict_value(fitted.trees[c], m.row(i));
      }
    }
    model.stages.push_back(std::move(fitted));

    const double deviance = mean_deviance(score, m.labels);
    if (!std::isfinite(deviance)) {
      throw TrainingError("gb_fit: deviance became non-finite at stage " +
                          std::to_string(stage));
    }
    model.deviance_trace.push_back(deviance);
    pool.resize(rows_n);
  }
  return model;
}

Proba gb_predict_proba_staged(const GBModel& model, const double* row, std::size_t stages) {
  if (stages > model.stages.size()) {
    throw ArgumentError("gb_predict: stage count exceeds fitted stages");
  }
  Proba scores = model.init_score;
  for (std::size_t s = 0; s < stages; ++s) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      scores[c] += model.nu * tree_predict_value(model.stages[s].trees[c], row);
    }
  }
  return softmax_of(scores);
}

Proba gb_predict_proba(const GBModel& model, const double* row) {
  return gb_predict_proba_staged(model, row, model.stages.size());
}

int gb_predict(const GBModel& model, const double* row) {
  return argmax_class(gb_predict_proba(model, row));
}

std::string gb_serialize(const GBModel& model) {
  std::string out;
  out += "gb\n";
  out += "n_features " + std::to_string(model.n_features) + "\n";
  out += "T " + std::to_string(model.stages.size()) + "\n";
  out += "nu " + format_double(model.nu) + "\n";
  out += "seed " + std::to_string(model.seed) + "\n";
  out += "init " + format_double(model.init_score[0]) + " " +
         format_double(model.init_score[1]) + " " +
         format_double(model.init_score[2]) + "\n";
  for (const auto& stage : model.stages) {
    for (const auto& tree : stage.trees) serialize_tree(tree, out);
  }
  return out;
}

GBModel gb_parse(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  if (!(in >> word) || word != "gb") throw FormatError("gb_parse: expected 'gb' header");
  GBModel model;
  std::size_t t_count = 0;
  auto expect = [&](const char* key) {
    if (!(in >> word) || word != key) {
      throw FormatError(std::string("gb_parse: expected '") + key + "'");
    }
  };
  expect("n_features");
  if (!(in >> model.n_features)) throw FormatError("gb_parse: bad n_features");
  expect("T");
  if (!(in >> t_count)) throw FormatError("gb_parse: bad T");
  expect("nu");
  if (!(in >> model.nu)) throw FormatError("gb_parse: bad nu");
  expect("seed");
  if (!(in >> model.seed)) throw FormatError("gb_parse: bad seed");
  expect("init");
  for (auto& v : model.init_score) {
    if (!(in >> v)) throw FormatError("gb_parse: bad init scores");
  }

  std::size_t pos = static_cast<std::size_t>(in.tellg());
  model.stages.resize(t_count);
  for (auto& stage : model.stages) {
    for (auto& tree : stage.trees) tree = parse_tree(text, pos, model.n_features);
  }
  return model;
}

namespace {

class GBClassifier final : public Classifier {
 public:
  explicit GBClassifier(GBModel model) : model_(std::move(model)) {}
  Proba predict_proba(const double* row) const override {
    return gb_predict_proba(model_, row);
  }
  std::size_t n_features() const override { return model_.n_features; }
  std::string kind() const override { return "gb"; }
  std::string serialize() const override { return gb_serialize(model_); }

 private:
  GBModel model_;
};

}  // namespace

std::unique_ptr<Classifier> wrap_gb(GBModel model) {
  return std::make_unique<GBClassifier>(std::move(model));
}

}  // namespace airdemand
