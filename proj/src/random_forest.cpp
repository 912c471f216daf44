#include "airdemand/random_forest.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "airdemand/csv.hpp"
#include "airdemand/errors.hpp"
#include "airdemand/parallel.hpp"
#include "airdemand/rng.hpp"

namespace airdemand {

namespace {

int effective_mtry(int mtry, std::size_t n_columns) {
  if (mtry == 0) {
    int r = static_cast<int>(std::sqrt(static_cast<double>(n_columns)));
    return r < 1 ? 1 : r;
  }
  if (mtry < 0 || static_cast<std::size_t>(mtry) > n_columns) {
    throw ArgumentError("mtry must be in [1, n_columns]");
  }
  return mtry;
}

}  // namespace

int resolve_mtry(const std::string& name, std::size_t n_columns) {
  const auto n = static_cast<double>(n_columns);
  int value = 0;
  if (name == "sqrt") {
    value = static_cast<int>(std::sqrt(n));
  } else if (name == "n2") {
    value = static_cast<int>(n_columns / 2);
  } else if (name == "n3") {
    value = static_cast<int>(n_columns / 3);
  } else if (name == "n4") {
    value = static_cast<int>(n_columns / 4);
  } else {
    throw ArgumentError("unknown mtry rule: " + name);
  }
  return value < 1 ? 1 : value;
}

RFModel rf_fit(const FeatureMatrix& m, const RFHyper& hyper, int jobs) {
  if (m.rows == 0) throw ArgumentError("rf_fit: empty matrix");
  if (hyper.T < 1) throw ArgumentError("rf_fit: T must be >= 1");
  const int mtry = effective_mtry(hyper.mtry, m.cols);

  RFModel model;
  model.n_features = m.cols;
  model.mtry = mtry;
  model.bootstrap = hyper.bootstrap;
  model.seed = hyper.seed;
  model.trees.resize(static_cast<std::size_t>(hyper.T));

  parallel_for(static_cast<std::size_t>(hyper.T), jobs, [&](std::size_t t) {
    Rng rng(derive_seed(hyper.seed, "rf/tree/" + std::to_string(t)));
    std::vector<std::size_t> rows(m.rows);
    if (hyper.bootstrap) {
      for (std::size_t i = 0; i < m.rows; ++i) rows[i] = rng.uniform_index(m.rows);
    } else {
      for (std::size_t i = 0; i < m.rows; ++i) rows[i] = i;
    }
    model.trees[t] = tree_fit_rows(m, rows, nullptr, hyper.tree, mtry, &rng);
  });
  return model;
}

Proba rf_predict_proba(const RFModel& model, const double* row) {
  if (model.trees.empty()) throw ArgumentError("rf_predict: model has no trees");
  Proba votes{0.0, 0.0, 0.0};
  for (const auto& tree : model.trees) {
    votes[static_cast<std::size_t>(tree_predict(tree, row))] += 1.0;
  }
  const auto total = static_cast<double>(model.trees.size());
  for (auto& v : votes) v /= total;
  return votes;
}

int rf_predict(const RFModel& model, const double* row) {
  return argmax_class(rf_predict_proba(model, row));
}

std::string rf_serialize(const RFModel& model) {
  std::string out;
  out += "rf\n";
  out += "n_features " + std::to_string(model.n_features) + "\n";
  out += "T " + std::to_string(model.trees.size()) + "\n";
  out += "mtry " + std::to_string(model.mtry) + "\n";
  out += "bootstrap " + std::string(model.bootstrap ? "1" : "0") + "\n";
  out += "seed " + std::to_string(model.seed) + "\n";
  for (const auto& tree : model.trees) serialize_tree(tree, out);
  return out;
}

RFModel rf_parse(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  if (!(in >> word) || word != "rf") throw FormatError("rf_parse: expected 'rf' header");
  RFModel model;
  std::size_t t_count = 0;
  auto expect = [&](const char* key) {
    if (!(in >> word) || word != key) {
      throw FormatError(std::string("rf_parse: expected '") + key + "'");
    }
  };
  expect("n_features");
  if (!(in >> model.n_features)) throw FormatError("rf_parse: bad n_features");
  expect("T");
  if (!(in >> t_count)) throw FormatError("rf_parse: bad T");
  expect("mtry");
  if (!(in >> model.mtry)) throw FormatError("rf_parse: bad mtry");
  expect("bootstrap");
  int flag = 0;
  if (!(in >> flag)) throw FormatError("rf_parse: bad bootstrap");
  model.bootstrap = flag != 0;
  expect("seed");
  if (!(in >> model.seed)) throw FormatError("rf_parse: bad seed");

  std::size_t pos = static_cast<std::size_t>(in.tellg());
  model.trees.reserve(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    model.trees.push_back(parse_tree(text, pos, model.n_features));
  }
  return model;
}

namespace {

class RFClassifier final : public Classifier {
 public:
  explicit RFClassifier(RFModel model) : model_(std::move(model)) {}
  Proba predict_proba(const double* row) const override {
    return rf_predict_proba(model_, row);
  }
  std::size_t n_features() const override { return model_.n_features; }
  std::string kind() const override { return "rf"; }
  std::string serialize() const override { return rf_serialize(model_); }

 private:
  RFModel model_;
};

}  // namespace

std::unique_ptr<Classifier> wrap_rf(RFModel model) {
  return std::make_unique<RFClassifier>(std::move(model));
}

}  // namespace airdemand
