#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airdemand/evaluation.hpp"
#include "airdemand/features.hpp"
#include "airdemand/gradient_boosting.hpp"
#include "airdemand/linear_model.hpp"
#include "airdemand/neural_net.hpp"
#include "airdemand/random_forest.hpp"
#include "airdemand/synthetic.hpp"

namespace airdemand {

struct GridSettings {
  std::vector<int> rf_trees;         // default 100, 200, ..., 1000
  std::vector<std::string> rf_mtry;  // default sqrt, n2, n3, n4
  std::vector<int> gb_trees;         // default 100, 200, ..., 1000
  std::vector<int> ann_hidden;       // empty: 1, 6, 11, ... up to the column count
  std::vector<double> ann_rates;     // default 0.01, 0.05, 0.10
};

struct RunConfig {
  std::string output = "out";
  std::string trips_path;    // empty: <output>/trips.csv
  std::string weather_path;  // empty: <output>/weather.csv
  std::vector<int> k_values{5, 10, 15, 20};
  CleanStrategy strategy = CleanStrategy::Listwise;
  double split_ratio = 0.70;
  int cv_folds = 10;
  bool stratified = false;
  std::vector<std::string> learners{"lr", "ann", "rf", "gb"};
  std::uint64_t seed = 42;
  int jobs = 1;
  int kmeans_max_iter = 100;
  double kmeans_tol = 1e-8;
  int importance_repeats = 10;
  std::vector<std::string> importance_learners;  // empty: best test macro-F1 per K
  int top_n = 5;
  GridSettings grid;
  LRHyper lr;
  ANNHyper ann;  // epochs apply to every grid cell
  RFHyper rf;    // bootstrap/tree limits apply to every grid cell
  GBHyper gb;    // nu/phi/depth/min_leaf apply to every grid cell
  SyntheticSpec generate;

  void validate() const;  // throws ConfigError
};

// Defaults above plus a demo synthetic scenario for `generate`.
RunConfig default_config();
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);

std::string resolved_trips_path(const RunConfig& cfg);
std::string resolved_weather_path(const RunConfig& cfg);
std::string k_dir(const RunConfig& cfg, int k);

// Hyper-parameter cells for one learner; empty for "lr" (no grid).
// n_columns sizes the default ANN hidden-layer sweep.
std::vector<GridCell> make_grid(const std::string& learner,
                                const RunConfig& cfg, std::size_t n_columns);

// Subcommand bodies; they throw (ConfigError/ArgumentError for bad input,
// other exceptions for runtime failures) and the CLI maps those to exit
// codes. Each writes its artifacts under cfg.output.
void cmd_generate(const RunConfig& cfg);
void cmd_prepare(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_importance(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

}  // namespace airdemand
