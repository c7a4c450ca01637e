#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikechain/config.hpp"
#include "spikechain/perfect_sim.hpp"

namespace spikechain {

const std::vector<std::string>& subcommands();

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> reps;
  std::optional<std::uint64_t> budget;
  bool quiet = false;
};

// Fills unset options from SPIKECHAIN_SEED, SPIKECHAIN_OUT, SPIKECHAIN_REPS,
// SPIKECHAIN_BUDGET and SPIKECHAIN_QUIET.
RunOptions with_environment(RunOptions opts);
// --reps maps to the replica count the subcommand actually uses.
Config apply_overrides(Config cfg, const std::string& subcommand, const RunOptions& opts);

// Hash of the config (without the output section) and subcommand.
std::string run_id(const Config& cfg, const std::string& subcommand);

struct RunResult {
  int exit_code = 0;
  std::string summary;
  std::filesystem::path dir;
  nlohmann::ordered_json manifest;
};

// Runs one subcommand and writes its artifacts, manifest.json and timing.json
// under <output.dir>/<run id>. Errors are mapped to exit codes.
RunResult run_subcommand(const std::string& subcommand, const Config& cfg);
// Re-executes a manifest into <run dir>/replay and compares artifact hashes.
RunResult replay_manifest(const std::filesystem::path& manifest);

int exit_code_for(const Error& e);

struct OracleCheck {
  std::uint64_t samples = 0;
  std::vector<double> oracle_rate;
  std::vector<Estimate> sampled_rate;
  std::vector<double> z;
  std::vector<double> oracle_joint;
  std::vector<std::uint64_t> joint_counts;
  double chi2 = 0.0;
  double chi2_critical = 0.0;
  bool rates_ok = true;
  bool joint_ok = true;

  bool pass() const { return rates_ok && joint_ok; }
  nlohmann::ordered_json to_json() const;
};

// Independent perfect samples of the configuration at time 0 (replica r uses
// the derived source r) against the exact Markov chain.
OracleCheck oracle_check(const ModelSpec& spec, std::uint64_t samples, const CoordinateRng& src,
                         std::size_t budget = kDefaultBudget, std::optional<MassMode> mode = std::nullopt);

}  // namespace spikechain
