#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "spikechain/field.hpp"
#include "spikechain/forward_sim.hpp"
#include "spikechain/graph.hpp"
#include "spikechain/numeric.hpp"

namespace spikechain {

std::vector<Time> extract_spikes(const SpikeField& field, NeuronId i);
std::vector<Time> isi_sequence(const std::vector<Time>& spikes);

struct IsiCovariance {
  Estimate cov;
  Estimate mean_isi;
  std::size_t pairs = 0;
  int batches = 0;

  nlohmann::ordered_json to_json() const;
};

constexpr std::size_t kMinSpikes = 1000;
constexpr int kBatches = 20;

// Overlapping-pairs estimate of Cov(ISI_{k+1}, ISI_k) around the common mean,
// with a batch-means standard error.
IsiCovariance adjacent_isi_covariance(const std::vector<Time>& spikes,
                                      std::size_t min_spikes = kMinSpikes, int batches = kBatches);
IsiCovariance adjacent_covariance_of(const std::vector<double>& isi, int batches = kBatches);

// 3/δ² · N (1−δ)^{√N}
double theorem4_bound(int n, double delta);

struct Theorem4Config {
  std::vector<int> ns{20, 50, 100};
  double theta = 0.0;
  double delta = 0.5;
  PhiDescriptor phi;
  AgingDescriptor aging;
  double weight = 1.0;
  std::uint64_t graphs = 200;   // graphs sampled per N
  std::uint64_t a_graphs = 40;  // A-graphs simulated per N (first ones in sample order)
  Time steps = 200000;
  Time burnin = 1000;
  NeuronId neuron = 0;
};

struct Theorem4Graph {
  std::uint64_t index = 0;
  std::size_t edges = 0;
  int tau = kTauExceeds;
  IsiCovariance isi;
};

struct Theorem4Cell {
  int n = 0;
  int kN = 0;
  Estimate a_complement;
  double a_complement_bound = 0.0;
  double bound = 0.0;
  std::vector<Theorem4Graph> graphs;
  double median_abs_cov = 0.0;
  bool within_bound = true;  // every |Cov| ≤ bound + 3·SE
};

struct Theorem4Report {
  std::vector<Theorem4Cell> cells;
  bool median_nonincreasing = true;

  nlohmann::ordered_json to_json() const;
};

Theorem4Report theorem4_experiment(const Theorem4Config& cfg, const CoordinateRng& src,
                                   bool parallel = true);

struct LocalityReport {
  bool applicable = true;
  int tau = kTauExceeds;
  int k = 1;
  int l = 1;
  Estimate base;                    // p(1 | 0^{k−1} 1)
  std::vector<Estimate> by_suffix;  // p(1 | 0^{k−1} 1 a), a read as l bits, oldest first
  std::vector<std::uint64_t> counts;
  double max_z = 0.0;  // largest pairwise |gap| / joint SE
  bool agree = true;   // max_z ≤ 3

  nlohmann::ordered_json to_json() const;
};

// Conditional spike probabilities of neuron i from one long forward run.
LocalityReport locality_check(const SynapticGraph& g, NeuronId i, int k, int l, double delta,
                              const PhiDescriptor& phi, const AgingDescriptor& aging, Time steps,
                              const CoordinateRng& src, double weight = 1.0);

struct MemoryProfile {
  std::vector<int> s;
  std::vector<Estimate> disagreement;  // E|p_A − p_B| at (i, s)
  std::vector<Estimate> signed_gap;    // E[p_A − p_B]
  std::uint64_t reps = 0;
  // c/(s−1) dominance anchored at the first grid point
  double c_hat = 0.0;
  bool dominated = true;
  // log-linear fit of the disagreement over points with relative SE < 0.25
  std::optional<Estimate> log_slope;
  std::size_t fit_points = 0;

  nlohmann::ordered_json to_json() const;
};

// Two coupled runs from the extremal artificial pasts (spike at 0 for every
// neuron; silent since −H) driven by the same uniforms.
MemoryProfile loss_of_memory_profile(const ModelSpec& spec, NeuronId i, const std::vector<int>& s_grid,
                                     std::uint64_t reps, const CoordinateRng& src,
                                     bool parallel = true, Time horizon = kSilentHorizon);

}  // namespace spikechain
