// citescope: run one pipeline stage.
//
//   citescope [--config PATH] [--workers N] [--seed N] [--years LO:HI] [--output DIR] <subcommand>
//
// Exit status: 0 success, 1 runtime error, 2 usage or configuration error.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "citescope/log.hpp"
#include "citescope/pipeline.hpp"

using namespace citescope;

int main(int argc, char** argv) {
  CLI::App app{"Citation function and centrality pipeline"};
  app.set_version_flag("--version", "citescope 1.0");
  std::string config_path, years, output;
  long long workers = -1, seed = -1;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--workers", workers, "worker threads (0: all cores)");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--years", years, "inclusive year range LO:HI for analyses");
  app.add_option("--output", output, "output directory");
  app.require_subcommand(1);
  const std::map<std::string, std::string> about = {
      {"ingest", "load and validate the corpus"},
      {"train-topics", "fit the citing, context and paper topic models"},
      {"bootstrap", "induce generalized patterns from labeled contexts"},
      {"featurize", "write the mention feature table"},
      {"train", "train the function and centrality forests"},
      {"evaluate", "leave-one-paper-out scores against the baselines"},
      {"label", "label every mention with the trained forests"},
      {"analyze-sections", "function distribution by section"},
      {"analyze-venues", "function distribution by venue"},
      {"analyze-trends", "yearly measures with bootstrap intervals"},
      {"navsim", "reader navigation against the random-reference null model"},
      {"impact", "negative binomial models of later citation counts"},
  };
  std::string chosen;
  for (const auto& name : subcommands()) {
    const auto it = about.find(name);
    app.add_subcommand(name, it == about.end() ? "" : it->second)->fallthrough()->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    apply_environment(cfg, current_environment());
    if (workers >= 0) cfg.set("workers", std::to_string(workers));
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    if (!years.empty()) cfg.set("years", years);
    if (!output.empty()) {
      cfg.set("output", std::filesystem::absolute(output).string());
    }
    run_stage(chosen, cfg);
  } catch (const ConfigError& e) {
    log::error("cli", e.what());
    return 2;
  } catch (const std::exception& e) {
    log::error(chosen.empty() ? "cli" : chosen, e.what());
    return 1;
  }
  return 0;
}
