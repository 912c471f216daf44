#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "airdemand/errors.hpp"
#include "airdemand/pipeline.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"air-taxi demand level classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string output;
  app.add_option("--config", config_path, "JSON run configuration file");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads; 0 means all hardware threads");
  app.add_option("--output", output, "output directory (overrides the config)");

  app.add_subcommand("generate", "write synthetic trips, weather and manifest");
  app.add_subcommand("prepare", "cluster, aggregate, clean and encode per K");
  app.add_subcommand("train", "grid-search and fit every configured learner");
  app.add_subcommand("evaluate", "score models on the held-out split");
  app.add_subcommand("importance", "permutation feature importance");
  app.add_subcommand("report", "aggregate artifacts into one summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    airdemand::RunConfig cfg = config_path.empty()
                                   ? airdemand::default_config()
                                   : airdemand::load_config(config_path);
    if (app.count("--seed") > 0) cfg.seed = seed;
    if (app.count("--jobs") > 0) cfg.jobs = jobs;
    if (app.count("--output") > 0) cfg.output = output;
    cfg.validate();

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "generate") {
      airdemand::cmd_generate(cfg);
    } else if (cmd == "prepare") {
      airdemand::cmd_prepare(cfg);
    } else if (cmd == "train") {
      airdemand::cmd_train(cfg);
    } else if (cmd == "evaluate") {
      airdemand::cmd_evaluate(cfg);
    } else if (cmd == "importance") {
      airdemand::cmd_importance(cfg);
    } else {
      airdemand::cmd_report(cfg);
    }
    return 0;
  } catch (const airdemand::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const airdemand::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
