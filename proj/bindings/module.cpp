#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "airdemand/classifier.hpp"
#include "airdemand/errors.hpp"
#include "airdemand/evaluation.hpp"
#include "airdemand/gradient_boosting.hpp"
#include "airdemand/importance.hpp"
#include "airdemand/kmeans.hpp"
#include "airdemand/linear_model.hpp"
#include "airdemand/neural_net.hpp"
#include "airdemand/pipeline.hpp"
#include "airdemand/random_forest.hpp"

#include <json.hpp>

namespace py = pybind11;
using namespace airdemand;
using nlohmann::json;

namespace {

FeatureMatrix matrix_of(const std::vector<std::vector<double>>& x,
                        const std::vector<int>& y) {
  FeatureMatrix m;
  m.rows = x.size();
  m.cols = x.empty() ? 0 : x.front().size();
  m.values.reserve(m.rows * m.cols);
  for (const auto& row : x) {
    if (row.size() != m.cols) throw ArgumentError("rows differ in width");
    m.values.insert(m.values.end(), row.begin(), row.end());
  }
  if (y.empty()) {
    m.labels.assign(m.rows, -1);
  } else {
    if (y.size() != m.rows) throw ArgumentError("x and y differ in length");
    m.labels = y;
  }
  return m;
}

json params_of(const std::string& params_json) {
  try {
    return params_json.empty() ? json::object() : json::parse(params_json);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("params is not valid JSON: ") + e.what());
  }
}

std::string fit_classifier(const std::string& kind,
                           const std::vector<std::vector<double>>& x,
                           const std::vector<int>& y,
                           const std::string& params_json, std::uint64_t seed) {
  const FeatureMatrix m = matrix_of(x, y);
  const json p = params_of(params_json);
  if (kind == "lr") {
    LRHyper h;
    h.max_iter = p.value("max_iter", h.max_iter);
    h.step = p.value("step", h.step);
    h.tol = p.value("tol", h.tol);
    return wrap_lr(lr_fit(m, h))->serialize();
  }
  if (kind == "ann") {
    ANNHyper h;
    h.hidden = p.value("hidden", h.hidden);
    h.rate = p.value("rate", h.rate);
    h.epochs = p.value("epochs", h.epochs);
    h.seed = seed;
    return wrap_ann(ann_fit(m, h))->serialize();
  }
  if (kind == "rf") {
    RFHyper h;
    h.T = p.value("trees", h.T);
    h.mtry = p.value("mtry", h.mtry);
    h.bootstrap = p.value("bootstrap", h.bootstrap);
    h.tree.min_leaf = p.value("min_leaf", h.tree.min_leaf);
    h.tree.min_gain = p.value("min_gain", h.tree.min_gain);
    h.tree.max_depth = p.value("max_depth", h.tree.max_depth);
    h.seed = seed;
    return wrap_rf(rf_fit(m, h))->serialize();
  }
  if (kind == "gb") {
    GBHyper h;
    h.T = p.value("trees", h.T);
    h.nu = p.value("nu", h.nu);
    h.phi = p.value("phi", h.phi);
    h.depth = p.value("depth", h.depth);
    h.min_leaf = p.value("min_leaf", h.min_leaf);
    h.min_gain = p.value("min_gain", h.min_gain);
    h.seed = seed;
    return wrap_gb(gb_fit(m, h))->serialize();
  }
  throw ArgumentError("unknown learner kind: " + kind);
}

std::vector<int> predict_labels(const std::string& model_text,
                                const std::vector<std::vector<double>>& x) {
  const auto model = classifier_from_json(model_text);
  const FeatureMatrix m = matrix_of(x, {});
  std::vector<int> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = model->predict(m.row(i));
  return out;
}

std::vector<std::vector<double>> predict_probabilities(
    const std::string& model_text, const std::vector<std::vector<double>>& x) {
  const auto model = classifier_from_json(model_text);
  const FeatureMatrix m = matrix_of(x, {});
  std::vector<std::vector<double>> out;
  out.reserve(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const Proba p = model->predict_proba(m.row(i));
    out.push_back({p[0], p[1], p[2]});
  }
  return out;
}

py::dict metrics_dict(const std::vector<int>& actual,
                      const std::vector<int>& predicted) {
  const MetricsReport r = compute_metrics(confusion(actual, predicted));
  static const char* kClassNames[] = {"low", "moderate", "high"};
  py::dict out;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& pc = r.per_class[static_cast<std::size_t>(c)];
    py::dict row;
    row["precision"] = pc.precision;
    row["recall"] = pc.recall;
    row["f1"] = pc.f1;
    out[kClassNames[c]] = row;
  }
  py::dict macro;
  macro["precision"] = r.macro.precision;
  macro["recall"] = r.macro.recall;
  macro["f1"] = r.macro.f1;
  out["average"] = macro;
  out["accuracy"] = r.accuracy;
  return out;
}

py::dict kmeans_dict(const std::vector<std::pair<double, double>>& points,
                     int k, std::uint64_t seed, int max_iter, double tol) {
  std::vector<LatLon> pts;
  pts.reserve(points.size());
  for (const auto& [lat, lon] : points) pts.push_back({lat, lon});
  const ClusterModel model = kmeans_fit(pts, k, seed, max_iter, tol);
  py::dict out;
  py::list centroids;
  for (const auto& c : model.centroids) {
    centroids.append(py::make_tuple(c.lat, c.lon));
  }
  out["centroids"] = centroids;
  out["wcss"] = model.wcss;
  out["iterations"] = model.iterations_run;
  out["model_json"] = cluster_model_to_json(model);
  return out;
}

py::list importance_list(const std::string& model_text,
                         const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y,
                         const std::vector<std::pair<std::string, std::vector<std::size_t>>>& groups,
                         int repeats, std::uint64_t seed) {
  const auto model = classifier_from_json(model_text);
  const FeatureMatrix m = matrix_of(x, y);
  std::vector<FeatureGroup> fg;
  fg.reserve(groups.size());
  for (const auto& [name, columns] : groups) fg.push_back({name, columns});
  const ImportanceTable table =
      permutation_importance(*model, m, fg, repeats, seed);
  py::list out;
  for (const auto& g : table) {
    py::dict row;
    row["feature"] = g.name;
    row["importance"] = g.importance;
    row["std"] = g.stddev;
    row["rank"] = g.rank;
    out.append(row);
  }
  return out;
}

void run_command(const std::string& command, const std::string& config_json) {
  const RunConfig cfg = config_json.empty() ? default_config()
                                            : config_from_json(config_json);
  if (command == "generate") {
    cmd_generate(cfg);
  } else if (command == "prepare") {
    cmd_prepare(cfg);
  } else if (command == "train") {
    cmd_train(cfg);
  } else if (command == "evaluate") {
    cmd_evaluate(cfg);
  } else if (command == "importance") {
    cmd_importance(cfg);
  } else if (command == "report") {
    cmd_report(cfg);
  } else {
    throw ArgumentError("unknown command: " + command);
  }
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "air-taxi demand level classification pipeline";

  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<ArgumentError>(mod, "ArgumentError", PyExc_ValueError);
  py::register_exception<FormatError>(mod, "FormatError", PyExc_RuntimeError);

  mod.def("run", &run_command, py::arg("command"), py::arg("config_json") = "",
          "Run one pipeline subcommand (generate, prepare, train, evaluate, "
          "importance, report) with a JSON config.");
  mod.def("kmeans", &kmeans_dict, py::arg("points"), py::arg("k"),
          py::arg("seed") = 0, py::arg("max_iter") = 100, py::arg("tol") = 1e-8,
          "Seeded Lloyd k-means over (lat, lon) points.");
  mod.def("fit", &fit_classifier, py::arg("kind"), py::arg("x"), py::arg("y"),
          py::arg("params_json") = "{}", py::arg("seed") = 0,
          "Fit a classifier (lr, ann, rf, gb); returns its serialized form.");
  mod.def("predict", &predict_labels, py::arg("model_text"), py::arg("x"),
          "Predicted class indices (0 low, 1 moderate, 2 high).");
  mod.def("predict_proba", &predict_probabilities, py::arg("model_text"),
          py::arg("x"), "Per-class probabilities.");
  mod.def("evaluate_predictions", &metrics_dict, py::arg("actual"),
          py::arg("predicted"),
          "Per-class precision/recall/F1, macro averages and accuracy.");
  mod.def("permutation_importance", &importance_list, py::arg("model_text"),
          py::arg("x"), py::arg("y"), py::arg("groups"),
          py::arg("repeats") = 10, py::arg("seed") = 0,
          "Mean error increase per feature group under joint shuffling.");
}
