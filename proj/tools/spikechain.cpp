#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "spikechain/experiments.hpp"

using namespace spikechain;

int main(int argc, char** argv) {
  CLI::App app{"Perfect simulation and statistics for spiking chains with variable-length memory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  std::uint64_t seed = 0, reps = 0, budget = 0;
  std::string out;
  bool quiet = false;

  const std::map<std::string, std::string> help{
      {"validate", "check model regime conditions"},
      {"decompose", "Kalikow decomposition tables and bounds"},
      {"sample-perfect", "perfect sample of a space-time window"},
      {"simulate", "forward run from an artificial past"},
      {"graph-tau", "distribution of tau on random graphs"},
      {"isi-cov", "ISI covariance over random graphs"},
      {"loss-memory", "coupled runs from two pasts"},
      {"oracle-check", "perfect sampler against the Markov oracle"},
      {"replay", "rerun a manifest and compare artifacts"}};
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, help.at(name));
    if (name == "replay") {
      sub->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
    } else {
      sub->add_option("--config", config_path, "JSON config file");
      sub->add_option("--seed", seed, "master seed (overrides config)");
      sub->add_option("--reps", reps, "replica count for the subcommand");
      sub->add_option("--budget", budget, "clan size budget");
    }
    sub->add_option("--out", out, "output root directory");
    sub->add_flag("--quiet", quiet, "suppress the summary line");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 4;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  auto* sub = app.get_subcommands().front();
  try {
    RunOptions opts;
    if (name != "replay") {
      if (sub->count("--seed")) opts.seed = seed;
      if (sub->count("--reps")) opts.reps = reps;
      if (sub->count("--budget")) opts.budget = budget;
    }
    if (sub->count("--out")) opts.out = out;
    opts.quiet = quiet;
    opts = with_environment(opts);

    RunResult result;
    if (name == "replay") {
      result = replay_manifest(manifest_path);
    } else {
      if (config_path.empty())
        if (const char* env = std::getenv("SPIKECHAIN_CONFIG")) config_path = env;
      Config cfg = config_path.empty() ? Config{} : load_config(config_path);
      cfg = apply_overrides(cfg, name, opts);
      result = run_subcommand(name, cfg);
    }
    if (!opts.quiet || result.exit_code != 0)
      (result.exit_code == 0 ? std::cout : std::cerr)
          << name << " " << (result.dir.empty() ? "-" : result.dir.string()) << " exit=" << result.exit_code
          << " " << result.summary << "\n";
    return result.exit_code;
  } catch (const Error& e) {
    std::cerr << name << " error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << name << " error: " << e.what() << "\n";
    return 1;
  }
}
