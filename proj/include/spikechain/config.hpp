#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikechain/kalikow.hpp"
#include "spikechain/model.hpp"

namespace spikechain {

struct ModelConfig {
  // zero_interaction, single_neuron, two_neuron_support1, three_neuron_attractive,
  // exponential_memory, lattice_window or explicit
  std::string preset = "two_neuron_support1";
  int neurons = 2;
  double delta = 0.5;
  double coupling = 1.0;  // two_neuron_support1
  std::vector<std::vector<double>> weights;  // explicit: weights[j][i] = W_{j→i}
  std::string neighborhood = "by_weight";
  std::vector<std::vector<int>> layers;
  std::vector<std::vector<int>> coordinates;
  int lattice_dim = 1;
  int lattice_side = 5;
  double lattice_alpha = 2.0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct PhiConfig {
  std::string family = "saturated_linear";
  double gamma = 0.2;
  double refractory_tau = 0.0;

  friend bool operator==(const PhiConfig&, const PhiConfig&) = default;
};

struct GConfig {
  std::string family = "finite_support";
  double scale = 1.0;
  double rate = 1.0;
  double exponent = 2.0;
  Time support = 1;

  friend bool operator==(const GConfig&, const GConfig&) = default;
};

struct GraphConfig {
  int neurons = 50;
  double theta = 0.0;
  int neuron = 0;
  std::vector<int> ks;  // empty: 2..⌊√N⌋
  std::uint64_t reps = 10000;
  double weight = 1.0;

  friend bool operator==(const GraphConfig&, const GraphConfig&) = default;
};

struct ExperimentConfig {
  int neuron = 0;
  std::vector<int> window_neurons;  // empty: all neurons
  Time t0 = 0;
  Time t1 = 99;
  std::uint64_t budget = 1000000;
  std::string mode = "auto";       // auto, exact, dominated
  std::string sampler = "clan";    // clan, spacetime
  Time steps = 100000;
  Time burnin = 1000;
  std::uint64_t reps = 2000;
  std::vector<int> ns{20, 50, 100};
  std::uint64_t graphs = 200;
  std::uint64_t a_graphs = 40;
  std::vector<int> s_grid{2, 3, 4, 5, 6, 7, 8, 9, 10};
  double beta = 0.0;  // 0: use g.rate
  std::uint64_t oracle_samples = 100000;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct OutputConfig {
  std::string dir = "runs";

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct Config {
  std::uint64_t seed = 1;
  ModelConfig model;
  PhiConfig phi;
  GConfig g;
  GraphConfig graph;
  ExperimentConfig experiment;
  OutputConfig output;

  friend bool operator==(const Config&, const Config&) = default;
};

// Unknown keys and type mismatches raise config_error naming the key path.
Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const Config& cfg);
std::string dump_config(const Config& cfg);

PhiDescriptor phi_of(const Config& cfg);
AgingDescriptor aging_of(const Config& cfg);
ModelSpec build_model(const Config& cfg);
std::optional<MassMode> mode_of(const Config& cfg);

}  // namespace spikechain
