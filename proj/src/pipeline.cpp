#include "airdemand/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "airdemand/calendar.hpp"
#include "airdemand/csv.hpp"
#include "airdemand/encoder.hpp"
#include "airdemand/errors.hpp"
#include "airdemand/importance.hpp"
#include "airdemand/kmeans.hpp"
#include "airdemand/rng.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace airdemand {

namespace {

constexpr const char* kLearnerNames[] = {"lr", "ann", "rf", "gb"};

bool known_learner(const std::string& name) {
  for (const char* l : kLearnerNames)
    if (name == l) return true;
  return false;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write file: " + path);
  out << content;
  if (!out) throw FormatError("write failed: " + path);
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace

void RunConfig::validate() const {
  if (output.empty()) throw ConfigError("output directory must not be empty");
  if (k_values.empty()) throw ConfigError("k_values must not be empty");
  std::set<int> seen_k;
  for (int k : k_values) {
    if (k < 1) throw ConfigError("k_values entries must be >= 1");
    if (!seen_k.insert(k).second) throw ConfigError("duplicate entry in k_values");
  }
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw ConfigError("split_ratio must be in (0, 1)");
  }
  if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
  if (learners.empty()) throw ConfigError("learners must not be empty");
  std::set<std::string> seen_l;
  for (const auto& l : learners) {
    if (!known_learner(l)) throw ConfigError("unknown learner: " + l);
    if (!seen_l.insert(l).second) throw ConfigError("duplicate learner: " + l);
  }
  for (const auto& l : importance_learners) {
    if (!known_learner(l)) throw ConfigError("unknown importance learner: " + l);
  }
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (kmeans_max_iter < 1) throw ConfigError("kmeans max_iter must be >= 1");
  if (!(kmeans_tol >= 0)) throw ConfigError("kmeans tol must be >= 0");
  if (importance_repeats < 1) throw ConfigError("importance repeats must be >= 1");
  if (top_n < 1) throw ConfigError("importance top_n must be >= 1");
  for (int t : grid.rf_trees)
    if (t < 1) throw ConfigError("rf_trees entries must be >= 1");
  for (int t : grid.gb_trees)
    if (t < 0) throw ConfigError("gb_trees entries must be >= 0");
  for (int h : grid.ann_hidden)
    if (h < 1) throw ConfigError("ann_hidden entries must be >= 1");
  for (double r : grid.ann_rates)
    if (!(r > 0)) throw ConfigError("ann_rates entries must be > 0");
  for (const auto& name : grid.rf_mtry) {
    if (name != "sqrt" && name != "n2" && name != "n3" && name != "n4") {
      throw ConfigError("rf_mtry entries must be one of sqrt, n2, n3, n4");
    }
  }
  if (lr.max_iter < 1) throw ConfigError("lr max_iter must be >= 1");
  if (!(lr.step > 0)) throw ConfigError("lr step must be > 0");
  if (!(lr.tol >= 0)) throw ConfigError("lr tol must be >= 0");
  if (ann.epochs < 1) throw ConfigError("ann epochs must be >= 1");
  if (!(gb.nu > 0)) throw ConfigError("gb nu must be > 0");
  if (!(gb.phi > 0 && gb.phi <= 1)) throw ConfigError("gb phi must be in (0, 1]");
  if (gb.depth < 0) throw ConfigError("gb depth must be >= 0");
}

RunConfig default_config() {
  RunConfig cfg;
  for (int t = 100; t <= 1000; t += 100) {
    cfg.grid.rf_trees.push_back(t);
    cfg.grid.gb_trees.push_back(t);
  }
  cfg.grid.rf_mtry = {"sqrt", "n2", "n3", "n4"};
  cfg.grid.ann_rates = {0.01, 0.05, 0.10};

  SyntheticSpec& spec = cfg.generate;
  spec.n_trips = 50000;
  spec.hotspots = {
      {40.758, -73.985, 0.012, 3.0, 0},  {40.712, -74.013, 0.010, 2.2, 4},
      {40.773, -73.872, 0.015, 1.6, 9},  {40.690, -73.982, 0.012, 1.0, 14},
      {40.751, -73.940, 0.010, 0.7, 19},
  };
  spec.weekday_multiplier = 2.0;
  for (int h = 0; h < 24; ++h) spec.hour_profile[static_cast<std::size_t>(h)] = 0.3;
  spec.hour_profile[7] = 1.2;
  spec.hour_profile[8] = 1.5;
  spec.hour_profile[9] = 1.0;
  spec.hour_profile[17] = 2.5;
  spec.hour_profile[18] = 3.5;
  spec.hour_profile[19] = 3.0;
  spec.hour_profile[20] = 1.8;
  spec.rain_suppression = 0.5;
  spec.missing_rate = 0.02;
  return cfg;
}

RunConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc,
             {"output", "trips", "weather", "k_values", "strategy",
              "split_ratio", "cv_folds", "stratified", "learners", "seed",
              "jobs", "kmeans", "importance", "grids", "lr", "ann", "rf", "gb",
              "generate"},
             "config");

  RunConfig cfg = default_config();
  try {
    if (doc.contains("output")) cfg.output = doc["output"].get<std::string>();
    if (doc.contains("trips")) cfg.trips_path = doc["trips"].get<std::string>();
    if (doc.contains("weather")) cfg.weather_path = doc["weather"].get<std::string>();
    if (doc.contains("k_values")) cfg.k_values = doc["k_values"].get<std::vector<int>>();
    if (doc.contains("strategy")) {
      const auto name = doc["strategy"].get<std::string>();
      const auto strategy = clean_strategy_from_name(name);
      if (!strategy) throw ConfigError("unknown cleaning strategy: " + name);
      cfg.strategy = *strategy;
    }
    if (doc.contains("split_ratio")) cfg.split_ratio = doc["split_ratio"].get<double>();
    if (doc.contains("cv_folds")) cfg.cv_folds = doc["cv_folds"].get<int>();
    if (doc.contains("stratified")) cfg.stratified = doc["stratified"].get<bool>();
    if (doc.contains("learners")) {
      cfg.learners = doc["learners"].get<std::vector<std::string>>();
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("jobs")) cfg.jobs = doc["jobs"].get<int>();
    if (doc.contains("kmeans")) {
      const json& km = doc["kmeans"];
      check_keys(km, {"max_iter", "tol"}, "kmeans");
      if (km.contains("max_iter")) cfg.kmeans_max_iter = km["max_iter"].get<int>();
      if (km.contains("tol")) cfg.kmeans_tol = km["tol"].get<double>();
    }
    if (doc.contains("importance")) {
      const json& imp = doc["importance"];
      check_keys(imp, {"repeats", "learners", "top_n"}, "importance");
      if (imp.contains("repeats")) cfg.importance_repeats = imp["repeats"].get<int>();
      if (imp.contains("learners")) {
        cfg.importance_learners = imp["learners"].get<std::vector<std::string>>();
      }
      if (imp.contains("top_n")) cfg.top_n = imp["top_n"].get<int>();
    }
    if (doc.contains("grids")) {
      const json& g = doc["grids"];
      check_keys(g, {"rf_trees", "rf_mtry", "gb_trees", "ann_hidden", "ann_rates"},
                 "grids");
      if (g.contains("rf_trees")) cfg.grid.rf_trees = g["rf_trees"].get<std::vector<int>>();
      if (g.contains("rf_mtry")) {
        cfg.grid.rf_mtry = g["rf_mtry"].get<std::vector<std::string>>();
      }
      if (g.contains("gb_trees")) cfg.grid.gb_trees = g["gb_trees"].get<std::vector<int>>();
      if (g.contains("ann_hidden")) {
        cfg.grid.ann_hidden = g["ann_hidden"].get<std::vector<int>>();
      }
      if (g.contains("ann_rates")) {
        cfg.grid.ann_rates = g["ann_rates"].get<std::vector<double>>();
      }
    }
    if (doc.contains("lr")) {
      const json& lr = doc["lr"];
      check_keys(lr, {"max_iter", "step", "tol"}, "lr");
      if (lr.contains("max_iter")) cfg.lr.max_iter = lr["max_iter"].get<int>();
      if (lr.contains("step")) cfg.lr.step = lr["step"].get<double>();
      if (lr.contains("tol")) cfg.lr.tol = lr["tol"].get<double>();
    }
    if (doc.contains("ann")) {
      const json& ann = doc["ann"];
      check_keys(ann, {"epochs"}, "ann");
      if (ann.contains("epochs")) cfg.ann.epochs = ann["epochs"].get<int>();
    }
    if (doc.contains("rf")) {
      const json& rf = doc["rf"];
      check_keys(rf, {"bootstrap", "max_depth", "min_gain", "min_leaf"}, "rf");
      if (rf.contains("bootstrap")) cfg.rf.bootstrap = rf["bootstrap"].get<bool>();
      if (rf.contains("max_depth")) cfg.rf.tree.max_depth = rf["max_depth"].get<int>();
      if (rf.contains("min_gain")) cfg.rf.tree.min_gain = rf["min_gain"].get<double>();
      if (rf.contains("min_leaf")) cfg.rf.tree.min_leaf = rf["min_leaf"].get<double>();
    }
    if (doc.contains("gb")) {
      const json& gb = doc["gb"];
      check_keys(gb, {"nu", "phi", "depth", "min_gain", "min_leaf"}, "gb");
      if (gb.contains("nu")) cfg.gb.nu = gb["nu"].get<double>();
      if (gb.contains("phi")) cfg.gb.phi = gb["phi"].get<double>();
      if (gb.contains("depth")) cfg.gb.depth = gb["depth"].get<int>();
      if (gb.contains("min_gain")) cfg.gb.min_gain = gb["min_gain"].get<double>();
      if (gb.contains("min_leaf")) cfg.gb.min_leaf = gb["min_leaf"].get<double>();
    }
    if (doc.contains("generate")) {
      cfg.generate = synthetic_spec_from_json(doc["generate"].dump());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

std::string resolved_trips_path(const RunConfig& cfg) {
  return cfg.trips_path.empty() ? cfg.output + "/trips.csv" : cfg.trips_path;
}

std::string resolved_weather_path(const RunConfig& cfg) {
  return cfg.weather_path.empty() ? cfg.output + "/weather.csv" : cfg.weather_path;
}

std::string k_dir(const RunConfig& cfg, int k) {
  return cfg.output + "/K" + std::to_string(k);
}

std::vector<GridCell> make_grid(const std::string& learner, const RunConfig& cfg,
                                std::size_t n_columns) {
  std::vector<GridCell> cells;
  if (learner == "lr") return cells;

  if (learner == "ann") {
    std::vector<int> hidden = cfg.grid.ann_hidden;
    if (hidden.empty()) {
      for (int h = 1; static_cast<std::size_t>(h) <= n_columns; h += 5) {
        hidden.push_back(h);
      }
      if (hidden.empty()) hidden.push_back(1);
    }
    for (int h : hidden) {
      for (double rate : cfg.grid.ann_rates) {
        ANNHyper hyper = cfg.ann;
        hyper.hidden = h;
        hyper.rate = rate;
        GridCell cell;
        cell.id = "H=" + std::to_string(h) + ",eta=" + format_double(rate);
        cell.fit = [hyper](const FeatureMatrix& m, std::uint64_t seed) {
          ANNHyper local = hyper;
          local.seed = seed;
          return wrap_ann(ann_fit(m, local));
        };
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  }

  if (learner == "rf") {
    for (int t : cfg.grid.rf_trees) {
      for (const std::string& rule : cfg.grid.rf_mtry) {
        RFHyper hyper = cfg.rf;
        hyper.T = t;
        GridCell cell;
        cell.id = "T=" + std::to_string(t) + ",mtry=" + rule;
        cell.fit = [hyper, rule](const FeatureMatrix& m, std::uint64_t seed) {
          RFHyper local = hyper;
          local.mtry = resolve_mtry(rule, m.cols);
          local.seed = seed;
          return wrap_rf(rf_fit(m, local));
        };
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  }

  if (learner == "gb") {
    for (int t : cfg.grid.gb_trees) {
      GBHyper hyper = cfg.gb;
      hyper.T = t;
      GridCell cell;
      cell.id = "T=" + std::to_string(t);
      cell.fit = [hyper](const FeatureMatrix& m, std::uint64_t seed) {
        GBHyper local = hyper;
        local.seed = seed;
        return wrap_gb(gb_fit(m, local));
      };
      cells.push_back(std::move(cell));
    }
    return cells;
  }
  throw ArgumentError("unknown learner: " + learner);
}

namespace {

// Final fit at the grid-selected cell; mirrors make_grid's hyper wiring.
std::unique_ptr<Classifier> fit_final(const std::string& learner,
                                      const RunConfig& cfg,
                                      const std::vector<GridCell>& grid,
                                      std::size_t best,
                                      const FeatureMatrix& xtr,
                                      std::uint64_t seed, int jobs) {
  if (learner == "lr") {
    return wrap_lr(lr_fit(xtr, cfg.lr));
  }
  if (learner == "rf") {
    // Refit through rf_fit directly so the final model can use threads.
    const std::string& id = grid[best].id;
    const auto comma = id.find(",mtry=");
    RFHyper hyper = cfg.rf;
    hyper.T = std::stoi(id.substr(2, comma - 2));
    hyper.mtry = resolve_mtry(id.substr(comma + 6), xtr.cols);
    hyper.seed = seed;
    return wrap_rf(rf_fit(xtr, hyper, jobs));
  }
  return grid[best].fit(xtr, seed);
}

struct LoadedSplit {
  std::vector<Sample> train, test;
  std::size_t n_samples = 0;
};

LoadedSplit load_split(const RunConfig& cfg, int k) {
  const std::string path = k_dir(cfg, k) + "/samples.csv";
  const std::vector<Sample> samples = read_samples_file(path);
  if (samples.empty()) throw DataError("no samples in " + path);
  const SplitIndices idx = split_train_test(
      samples.size(), cfg.split_ratio,
      derive_seed(cfg.seed, "split/K" + std::to_string(k)));
  LoadedSplit out;
  out.n_samples = samples.size();
  out.train.reserve(idx.train.size());
  out.test.reserve(idx.test.size());
  for (std::size_t i : idx.train) out.train.push_back(samples[i]);
  for (std::size_t i : idx.test) out.test.push_back(samples[i]);
  return out;
}

struct FittedArtifacts {
  Cleaner cleaner;
  BinThresholds bins;
  Encoder encoder;
};

json bins_to_json_obj(const BinThresholds& bins) {
  return json{{"t_low", bins.t_low}, {"t_high", bins.t_high}};
}

BinThresholds bins_from_json_obj(const json& obj) {
  BinThresholds bins;
  bins.t_low = obj.at("t_low").get<long>();
  bins.t_high = obj.at("t_high").get<long>();
  return bins;
}

FittedArtifacts load_artifacts(const RunConfig& cfg, int k) {
  const std::string path = k_dir(cfg, k) + "/train_artifacts.json";
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  FittedArtifacts art;
  art.cleaner = cleaner_from_json(doc.at("cleaner").dump());
  art.bins = bins_from_json_obj(doc.at("bins"));
  art.encoder = encoder_from_json(doc.at("encoder").dump());
  return art;
}

// Clean, label and encode samples with train-fitted statistics.
FeatureMatrix encode_with(const FittedArtifacts& art,
                          const std::vector<Sample>& samples) {
  std::vector<Sample> cleaned = apply_cleaner(samples, art.cleaner);
  label_samples(cleaned, art.bins);
  return apply_encoder(art.encoder, cleaned);
}

struct TimingRow {
  int k = 0;
  std::string learner;
  double seconds = 0;
};

std::vector<TimingRow> read_timing(const std::string& path) {
  std::vector<TimingRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) continue;
    const auto k = parse_long(fields[0]);
    const auto seconds = parse_double(fields[2]);
    if (!k || !seconds) continue;
    rows.push_back({static_cast<int>(*k), fields[1], *seconds});
  }
  return rows;
}

struct ColumnSummary {
  long observed = 0;
  long missing = 0;
  double mean = 0;
  double stddev = 0;
};

// Observed-value mean/std per weather column over one group of rows.
json group_summary(const std::vector<Sample>& group) {
  static const char* kNames[4] = {"temperature", "visibility", "wind_speed",
                                  "humidity"};
  auto field = [](const Sample& s, int c) -> const std::optional<double>& {
    switch (c) {
      case 0: return s.temperature;
      case 1: return s.visibility;
      case 2: return s.wind_speed;
      default: return s.humidity;
    }
  };
  json out = json::object();
  out["rows"] = group.size();
  for (int c = 0; c < 4; ++c) {
    ColumnSummary cs;
    double total = 0;
    for (const auto& s : group) {
      const auto& v = field(s, c);
      if (v) {
        ++cs.observed;
        total += *v;
      } else {
        ++cs.missing;
      }
    }
    if (cs.observed > 0) cs.mean = total / static_cast<double>(cs.observed);
    double var = 0;
    for (const auto& s : group) {
      const auto& v = field(s, c);
      if (v) var += (*v - cs.mean) * (*v - cs.mean);
    }
    if (cs.observed > 1) cs.stddev = std::sqrt(var / static_cast<double>(cs.observed - 1));
    out[kNames[c]] = {{"observed", cs.observed},
                      {"missing", cs.missing},
                      {"mean", cs.mean},
                      {"stddev", cs.stddev}};
  }
  long condition_missing = 0, fog_missing = 0;
  for (const auto& s : group) {
    if (!s.condition) ++condition_missing;
    if (!s.fog) ++fog_missing;
  }
  out["condition"] = {{"missing", condition_missing}};
  out["fog"] = {{"missing", fog_missing}};
  return out;
}

}  // namespace

void cmd_generate(const RunConfig& cfg) {
  cfg.generate.validate();
  const SyntheticData data = generate_synthetic(cfg.generate, cfg.seed);
  fs::create_directories(cfg.output);
  write_trips_file(data.trips, resolved_trips_path(cfg));
  write_weather_file(data.weather, resolved_weather_path(cfg));
  write_text_file(cfg.output + "/manifest.json",
                  synthetic_manifest(cfg.generate, cfg.seed));
  std::cout << "generate: wrote " << data.trips.size() << " trips, "
            << data.weather.size() << " weather rows under " << cfg.output
            << "\n";
}

void cmd_prepare(const RunConfig& cfg) {
  const TripParseResult trips = parse_trips_file(resolved_trips_path(cfg));
  const WeatherParseResult weather = parse_weather_file(resolved_weather_path(cfg));
  if (trips.records.empty()) throw DataError("no valid trips to prepare");

  std::vector<LatLon> points;
  points.reserve(trips.records.size());
  for (const auto& t : trips.records) points.push_back({t.origin_lat, t.origin_lon});

  for (int k : cfg.k_values) {
    const std::string dir = k_dir(cfg, k);
    fs::create_directories(dir);

    const ClusterModel clusters =
        kmeans_fit(points, k, derive_seed(cfg.seed, "kmeans/K" + std::to_string(k)),
                   cfg.kmeans_max_iter, cfg.kmeans_tol, cfg.jobs);
    save_cluster_model(clusters, dir + "/clusters.json");

    std::vector<Sample> samples = aggregate_samples(trips.records, clusters);
    join_weather(samples, weather.records);
    if (samples.empty()) throw DataError("aggregation produced no samples");

    std::vector<long> counts;
    counts.reserve(samples.size());
    for (const auto& s : samples) counts.push_back(s.passengers);
    const BinThresholds bins = fit_bins(counts);
    label_samples(samples, bins);
    write_samples_file(samples, dir + "/samples.csv");

    const Cleaner cleaner = fit_cleaner(samples, cfg.strategy);
    const std::vector<Sample> cleaned = apply_cleaner(samples, cleaner);
    write_text_file(dir + "/cleaner.json", cleaner_to_json(cleaner));
    write_text_file(dir + "/bins.json", bins_to_json_obj(bins).dump(2) + "\n");
    const Encoder encoder = fit_encoder(cleaned);
    write_text_file(dir + "/encoder.json", encoder_to_json(encoder));

    // Rows dropped by cleaning vs rows kept, summarized per column.
    std::set<std::string> kept;
    for (const auto& s : cleaned) {
      kept.insert(format_date(s.date) + "/" + std::to_string(s.location_id) +
                  "/" + std::to_string(s.time_slot));
    }
    std::vector<Sample> removed;
    for (const auto& s : samples) {
      const std::string key = format_date(s.date) + "/" +
                              std::to_string(s.location_id) + "/" +
                              std::to_string(s.time_slot);
      if (!kept.count(key)) removed.push_back(s);
    }

    json log;
    log["k"] = k;
    log["trips"] = {{"total", trips.report.total},
                    {"accepted", trips.report.accepted},
                    {"rejected", trips.report.rejected}};
    log["weather"] = {{"total", weather.report.total},
                      {"accepted", weather.report.accepted},
                      {"rejected", weather.report.rejected}};
    log["strategy"] = clean_strategy_name(cfg.strategy);
    log["rows_before_cleaning"] = samples.size();
    log["rows_after_cleaning"] = cleaned.size();
    log["rows_removed"] = removed.size();
    log["retained"] = group_summary(cleaned);
    log["removed"] = group_summary(removed);
    log["bins"] = bins_to_json_obj(bins);
    log["wcss"] = clusters.wcss;
    write_text_file(dir + "/prepare_log.json", log.dump(2) + "\n");

    std::string csv = "group,column,observed,missing,mean,stddev\n";
    for (const char* group : {"retained", "removed"}) {
      const json& g = log[group];
      for (const char* col : {"temperature", "visibility", "wind_speed", "humidity"}) {
        csv += std::string(group) + "," + col + "," +
               std::to_string(g[col]["observed"].get<long>()) + "," +
               std::to_string(g[col]["missing"].get<long>()) + "," +
               fmt_fixed(g[col]["mean"].get<double>(), 4) + "," +
               fmt_fixed(g[col]["stddev"].get<double>(), 4) + "\n";
      }
    }
    write_text_file(dir + "/prepare_log.csv", csv);

    std::cout << "prepare: K=" << k << " samples=" << samples.size()
              << " retained=" << cleaned.size() << " removed=" << removed.size()
              << " wcss=" << fmt_fixed(clusters.wcss, 4) << "\n";
  }
}

void cmd_train(const RunConfig& cfg) {
  std::vector<TimingRow> timing;

  for (int k : cfg.k_values) {
    const std::string dir = k_dir(cfg, k);
    const LoadedSplit split = load_split(cfg, k);

    FittedArtifacts art;
    art.cleaner = fit_cleaner(split.train, cfg.strategy);
    std::vector<Sample> clean_train = apply_cleaner(split.train, art.cleaner);
    if (clean_train.empty()) throw DataError("cleaning removed every training row");
    std::vector<long> counts;
    counts.reserve(clean_train.size());
    for (const auto& s : clean_train) counts.push_back(s.passengers);
    art.bins = fit_bins(counts);
    label_samples(clean_train, art.bins);
    art.encoder = fit_encoder(clean_train);
    const FeatureMatrix xtr = apply_encoder(art.encoder, clean_train);

    json art_doc;
    art_doc["k"] = k;
    art_doc["n_samples"] = split.n_samples;
    art_doc["train_rows"] = split.train.size();
    art_doc["test_rows"] = split.test.size();
    art_doc["clean_train_rows"] = clean_train.size();
    art_doc["split_ratio"] = cfg.split_ratio;
    art_doc["strategy"] = clean_strategy_name(cfg.strategy);
    art_doc["cleaner"] = json::parse(cleaner_to_json(art.cleaner));
    art_doc["bins"] = bins_to_json_obj(art.bins);
    art_doc["encoder"] = json::parse(encoder_to_json(art.encoder));
    write_text_file(dir + "/train_artifacts.json", art_doc.dump(2) + "\n");

    CVOptions cv;
    cv.folds = cfg.cv_folds;
    cv.stratified = cfg.stratified;
    cv.strategy = cfg.strategy;
    cv.jobs = cfg.jobs;

    for (const std::string& learner : cfg.learners) {
      const std::vector<GridCell> grid = make_grid(learner, cfg, xtr.cols);
      GridResult result;
      if (!grid.empty()) {
        result = grid_search(
            grid, split.train, cv,
            derive_seed(cfg.seed, "grid/K" + std::to_string(k) + "/" + learner));
      }

      json grid_doc;
      grid_doc["k"] = k;
      grid_doc["learner"] = learner;
      grid_doc["folds"] = cv.folds;
      grid_doc["stratified"] = cv.stratified;
      grid_doc["cells"] = json::array();
      std::string grid_csv = "cell,mean_macro_f1,note\n";
      for (const auto& cell : result.cells) {
        grid_doc["cells"].push_back({{"id", cell.id},
                                     {"mean_macro_f1", cell.mean_macro_f1},
                                     {"fold_scores", cell.fold_scores},
                                     {"note", cell.note}});
        grid_csv += cell.id + "," + fmt_fixed(cell.mean_macro_f1, 6) + "," +
                    cell.note + "\n";
      }
      if (!grid.empty()) {
        grid_doc["best"] = result.cells[result.best].id;
        grid_doc["best_index"] = result.best;
        grid_doc["best_score"] = result.cells[result.best].mean_macro_f1;
        if (!result.cells[result.best].note.empty()) {
          throw TrainingError("every " + learner + " grid cell failed for K=" +
                              std::to_string(k) + ": " +
                              result.cells[result.best].note);
        }
      } else {
        grid_doc["best"] = nullptr;
        grid_doc["note"] = "no hyper-parameter grid for this learner";
      }
      write_text_file(dir + "/grid_" + learner + ".json", grid_doc.dump(2) + "\n");
      write_text_file(dir + "/grid_" + learner + ".csv", grid_csv);

      std::unique_ptr<Classifier> model;
      const std::uint64_t fit_seed =
          derive_seed(cfg.seed, "fit/K" + std::to_string(k) + "/" + learner);
      const double seconds = time_training([&] {
        model = fit_final(learner, cfg, grid, result.best, xtr, fit_seed, cfg.jobs);
      });
      save_classifier(*model, dir + "/model_" + learner + ".txt");
      timing.push_back({k, learner, seconds});

      std::cout << "train: K=" << k << " learner=" << learner << " best="
                << (grid.empty() ? std::string("-") : result.cells[result.best].id)
                << " cv_macro_f1="
                << (grid.empty()
                        ? std::string("-")
                        : fmt_fixed(result.cells[result.best].mean_macro_f1, 4))
                << " seconds=" << fmt_fixed(seconds, 2) << "\n";
    }
  }

  std::string csv = "k,learner,seconds\n";
  for (const auto& row : timing) {
    csv += std::to_string(row.k) + "," + row.learner + "," +
           fmt_fixed(row.seconds, 4) + "\n";
  }
  write_text_file(cfg.output + "/timing.csv", csv);
}

void cmd_evaluate(const RunConfig& cfg) {
  json all = json::array();
  std::string csv = "k,learner,class,precision,recall,f1\n";
  static const char* kClassNames[] = {"low", "moderate", "high"};

  for (int k : cfg.k_values) {
    const std::string dir = k_dir(cfg, k);
    const LoadedSplit split = load_split(cfg, k);
    const FittedArtifacts art = load_artifacts(cfg, k);
    const FeatureMatrix xte = encode_with(art, split.test);
    if (xte.rows == 0) throw DataError("cleaning removed every test row");

    for (const std::string& learner : cfg.learners) {
      const auto model = load_classifier(dir + "/model_" + learner + ".txt");
      std::vector<int> predicted(xte.rows);
      for (std::size_t i = 0; i < xte.rows; ++i) {
        predicted[i] = model->predict(xte.row(i));
      }
      const ConfusionMatrix cm = confusion(xte.labels, predicted);
      const MetricsReport report = compute_metrics(cm);

      for (int c = 0; c < kNumClasses; ++c) {
        const auto& pc = report.per_class[static_cast<std::size_t>(c)];
        csv += std::to_string(k) + "," + learner + "," + kClassNames[c] + "," +
               fmt_fixed(pc.precision, 4) + "," + fmt_fixed(pc.recall, 4) +
               "," + fmt_fixed(pc.f1, 4) + "\n";
      }
      csv += std::to_string(k) + "," + learner + ",average," +
             fmt_fixed(report.macro.precision, 4) + "," +
             fmt_fixed(report.macro.recall, 4) + "," +
             fmt_fixed(report.macro.f1, 4) + "\n";

      json entry;
      entry["k"] = k;
      entry["learner"] = learner;
      entry["split"] = "test";
      entry["test_rows"] = xte.rows;
      for (int c = 0; c < kNumClasses; ++c) {
        const auto& pc = report.per_class[static_cast<std::size_t>(c)];
        entry["classes"][kClassNames[c]] = {{"precision", pc.precision},
                                            {"recall", pc.recall},
                                            {"f1", pc.f1}};
      }
      entry["average"] = {{"precision", report.macro.precision},
                          {"recall", report.macro.recall},
                          {"f1", report.macro.f1}};
      entry["accuracy"] = report.accuracy;
      json cmj = json::array();
      for (const auto& row : cm.counts) cmj.push_back(row);
      entry["confusion"] = cmj;

      // Grid-search CV score for the same cell, labeled separately from
      // the held-out test metrics.
      try {
        const json grid_doc =
            json::parse(read_text_file(dir + "/grid_" + learner + ".json"));
        if (grid_doc.contains("best") && !grid_doc["best"].is_null()) {
          entry["cv_best_cell"] = grid_doc["best"];
          entry["cv_macro_f1"] = grid_doc["best_score"];
        }
      } catch (const std::exception&) {
        // no grid artifact; leave the cv fields out
      }
      all.push_back(std::move(entry));

      std::cout << "evaluate: K=" << k << " learner=" << learner
                << " test_macro_f1=" << fmt_fixed(report.macro.f1, 4)
                << " accuracy=" << fmt_fixed(report.accuracy, 4) << "\n";
    }
  }

  write_text_file(cfg.output + "/metrics.csv", csv);
  write_text_file(cfg.output + "/metrics.json", all.dump(2) + "\n");

  const auto timing = read_timing(cfg.output + "/timing.csv");
  if (!timing.empty()) {
    std::string tcsv = "k,learner,seconds\n";
    json tj = json::array();
    for (const auto& row : timing) {
      tcsv += std::to_string(row.k) + "," + row.learner + "," +
              fmt_fixed(row.seconds, 2) + "\n";
      tj.push_back({{"k", row.k}, {"learner", row.learner}, {"seconds", row.seconds}});
    }
    write_text_file(cfg.output + "/timing_report.csv", tcsv);
    write_text_file(cfg.output + "/timing_report.json", tj.dump(2) + "\n");
  }
}

void cmd_importance(const RunConfig& cfg) {
  json metrics_doc;
  if (cfg.importance_learners.empty()) {
    try {
      metrics_doc = json::parse(read_text_file(cfg.output + "/metrics.json"));
    } catch (const std::exception&) {
      throw DataError(
          "no importance learners configured and no metrics.json to pick the "
          "best from; run evaluate first");
    }
  }

  for (int k : cfg.k_values) {
    const std::string dir = k_dir(cfg, k);

    std::vector<std::string> learners = cfg.importance_learners;
    if (learners.empty()) {
      double best_score = -1;
      std::string best;
      for (const auto& entry : metrics_doc) {
        if (entry["k"].get<int>() != k) continue;
        const double f1 = entry["average"]["f1"].get<double>();
        if (f1 > best_score) {
          best_score = f1;
          best = entry["learner"].get<std::string>();
        }
      }
      if (best.empty()) {
        throw DataError("metrics.json has no entries for K=" + std::to_string(k));
      }
      learners.push_back(best);
    }

    const LoadedSplit split = load_split(cfg, k);
    const FittedArtifacts art = load_artifacts(cfg, k);
    const FeatureMatrix xte = encode_with(art, split.test);
    if (xte.rows == 0) throw DataError("cleaning removed every test row");

    for (const std::string& learner : learners) {
      const auto model = load_classifier(dir + "/model_" + learner + ".txt");
      const ImportanceTable table = permutation_importance(
          *model, xte, art.encoder.groups, cfg.importance_repeats,
          derive_seed(cfg.seed, "importance/K" + std::to_string(k) + "/" + learner),
          cfg.jobs);

      ImportanceTable by_rank = table;
      std::stable_sort(by_rank.begin(), by_rank.end(),
                       [](const GroupImportance& a, const GroupImportance& b) {
                         return a.rank < b.rank;
                       });
      std::string csv = "feature,importance,std,rank\n";
      for (const auto& g : by_rank) {
        csv += g.name + "," + fmt_fixed(g.importance, 6) + "," +
               fmt_fixed(g.stddev, 6) + "," + std::to_string(g.rank) + "\n";
      }
      write_text_file(dir + "/importance_" + learner + ".csv", csv);

      json doc;
      doc["k"] = k;
      doc["learner"] = learner;
      doc["repeats"] = cfg.importance_repeats;
      doc["rows"] = xte.rows;
      doc["entries"] = json::array();
      for (const auto& g : table) {
        doc["entries"].push_back({{"feature", g.name},
                                  {"importance", g.importance},
                                  {"std", g.stddev},
                                  {"rank", g.rank}});
      }
      doc["top"] = json::array();
      for (const auto& [name, value] :
           top_features(table, static_cast<std::size_t>(cfg.top_n))) {
        doc["top"].push_back({{"feature", name}, {"importance", value}});
      }
      write_text_file(dir + "/importance_" + learner + ".json", doc.dump(2) + "\n");

      std::string tops;
      for (const auto& [name, value] :
           top_features(table, static_cast<std::size_t>(cfg.top_n))) {
        if (!tops.empty()) tops += ",";
        tops += name;
      }
      std::cout << "importance: K=" << k << " learner=" << learner
                << " top=" << tops << "\n";
    }
  }
}

void cmd_report(const RunConfig& cfg) {
  std::vector<std::string> gaps;
  std::ostringstream txt;
  json doc;
  txt << "air-taxi demand classification report\n";
  txt << "======================================\n\n";

  txt << "configuration\n";
  txt << "  seed: " << cfg.seed << "\n";
  txt << "  k values:";
  for (int k : cfg.k_values) txt << " " << k;
  txt << "\n  learners:";
  for (const auto& l : cfg.learners) txt << " " << l;
  txt << "\n  cleaning: " << clean_strategy_name(cfg.strategy)
      << ", split ratio " << fmt_fixed(cfg.split_ratio, 2) << ", cv folds "
      << cfg.cv_folds << "\n\n";
  doc["config"] = {{"seed", cfg.seed},
                   {"k_values", cfg.k_values},
                   {"learners", cfg.learners},
                   {"strategy", clean_strategy_name(cfg.strategy)},
                   {"split_ratio", cfg.split_ratio},
                   {"cv_folds", cfg.cv_folds}};

  txt << "data\n";
  doc["data"] = json::array();
  for (int k : cfg.k_values) {
    try {
      const json log =
          json::parse(read_text_file(k_dir(cfg, k) + "/prepare_log.json"));
      txt << "  K=" << k << ": " << log["rows_before_cleaning"].get<long>()
          << " samples, " << log["rows_after_cleaning"].get<long>()
          << " after cleaning (" << log["rows_removed"].get<long>()
          << " removed), wcss " << fmt_fixed(log["wcss"].get<double>(), 2)
          << "\n";
      doc["data"].push_back(log);
    } catch (const std::exception&) {
      gaps.push_back("prepare log for K=" + std::to_string(k));
    }
  }
  txt << "\n";

  txt << "grid search (mean cv macro-F1 of the selected cell)\n";
  doc["grid"] = json::array();
  for (int k : cfg.k_values) {
    for (const auto& learner : cfg.learners) {
      try {
        const json grid_doc = json::parse(
            read_text_file(k_dir(cfg, k) + "/grid_" + learner + ".json"));
        if (grid_doc.contains("best") && !grid_doc["best"].is_null()) {
          txt << "  K=" << k << " " << learner << ": best "
              << grid_doc["best"].get<std::string>() << " score "
              << fmt_fixed(grid_doc["best_score"].get<double>(), 4) << "\n";
        } else {
          txt << "  K=" << k << " " << learner << ": no grid\n";
        }
        doc["grid"].push_back(grid_doc);
      } catch (const std::exception&) {
        gaps.push_back("grid result for K=" + std::to_string(k) + " " + learner);
      }
    }
  }
  txt << "\n";

  txt << "test metrics (held-out split)\n";
  try {
    const json metrics = json::parse(read_text_file(cfg.output + "/metrics.json"));
    txt << "  k  learner  class      precision  recall  f1\n";
    for (const auto& entry : metrics) {
      for (const char* cls : {"low", "moderate", "high"}) {
        const json& m = entry["classes"][cls];
        char line[128];
        std::snprintf(line, sizeof line, "  %-2d %-8s %-10s %-10s %-7s %s\n",
                      entry["k"].get<int>(),
                      entry["learner"].get<std::string>().c_str(), cls,
                      fmt_fixed(m["precision"].get<double>(), 4).c_str(),
                      fmt_fixed(m["recall"].get<double>(), 4).c_str(),
                      fmt_fixed(m["f1"].get<double>(), 4).c_str());
        txt << line;
      }
      char line[128];
      std::snprintf(line, sizeof line, "  %-2d %-8s %-10s %-10s %-7s %s\n",
                    entry["k"].get<int>(),
                    entry["learner"].get<std::string>().c_str(), "average",
                    fmt_fixed(entry["average"]["precision"].get<double>(), 4).c_str(),
                    fmt_fixed(entry["average"]["recall"].get<double>(), 4).c_str(),
                    fmt_fixed(entry["average"]["f1"].get<double>(), 4).c_str());
      txt << line;
    }
    doc["metrics"] = metrics;
  } catch (const std::exception&) {
    gaps.push_back("test metrics");
  }
  txt << "\n";

  // Wall-clock values are environmental, so the deterministic report only
  // points at the timing files instead of embedding the seconds.
  txt << "training time\n";
  {
    const auto timing = read_timing(cfg.output + "/timing.csv");
    if (timing.empty()) {
      gaps.push_back("timing");
    } else {
      txt << "  " << timing.size()
          << " fits timed; see timing_report.csv (environmental, excluded "
             "from determinism)\n";
      doc["timing"] = {{"fits", timing.size()}, {"file", "timing_report.csv"}};
    }
  }
  txt << "\n";

  txt << "permutation importance (top " << cfg.top_n << ")\n";
  doc["importance"] = json::array();
  bool any_importance = false;
  for (int k : cfg.k_values) {
    for (const auto& learner : kLearnerNames) {
      const std::string path =
          k_dir(cfg, k) + "/importance_" + learner + ".json";
      if (!fs::exists(path)) continue;
      try {
        const json imp = json::parse(read_text_file(path));
        txt << "  K=" << k << " " << learner << ":";
        for (const auto& t : imp["top"]) {
          txt << " " << t["feature"].get<std::string>() << " ("
              << fmt_fixed(t["importance"].get<double>(), 4) << ")";
        }
        txt << "\n";
        doc["importance"].push_back(imp);
        any_importance = true;
      } catch (const std::exception&) {
        gaps.push_back("importance for K=" + std::to_string(k));
      }
    }
  }
  if (!any_importance) gaps.push_back("importance tables");
  txt << "\n";

  txt << "demand histograms\n";
  try {
    const std::vector<Sample> samples =
        read_samples_file(k_dir(cfg, cfg.k_values.front()) + "/samples.csv");
    std::array<long, 7> by_day{};
    std::array<long, 12> by_month{};
    for (const auto& s : samples) {
      by_day[static_cast<std::size_t>(s.day_of_week)] += s.passengers;
      by_month[static_cast<std::size_t>(s.month - 1)] += s.passengers;
    }
    std::string day_csv = "day,passengers\n";
    txt << "  passengers by day of week:";
    for (int d = 0; d < 7; ++d) {
      day_csv += std::string(kDayNames[d]) + "," + std::to_string(by_day[d]) + "\n";
      txt << " " << kDayNames[d] << "=" << by_day[d];
    }
    txt << "\n";
    std::string month_csv = "month,passengers\n";
    txt << "  passengers by month:";
    for (int m = 0; m < 12; ++m) {
      month_csv += std::string(kMonthNames[m]) + "," + std::to_string(by_month[m]) + "\n";
      if (by_month[m] > 0) txt << " " << kMonthNames[m] << "=" << by_month[m];
    }
    txt << "\n";
    write_text_file(cfg.output + "/histogram_day_of_week.csv", day_csv);
    write_text_file(cfg.output + "/histogram_month.csv", month_csv);
    doc["histograms"] = {{"day_of_week", by_day}, {"month", by_month}};
  } catch (const std::exception&) {
    gaps.push_back("histograms (no prepared samples)");
  }
  txt << "\n";

  txt << "gaps\n";
  if (gaps.empty()) {
    txt << "  (none)\n";
  } else {
    for (const auto& g : gaps) txt << "  missing: " << g << "\n";
  }
  doc["gaps"] = gaps;

  fs::create_directories(cfg.output);
  write_text_file(cfg.output + "/report.txt", txt.str());
  write_text_file(cfg.output + "/report.json", doc.dump(2) + "\n");
  std::cout << "report: wrote " << cfg.output << "/report.txt (" << gaps.size()
            << " gaps)\n";
}

}  // namespace airdemand
