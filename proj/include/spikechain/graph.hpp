#pragma once

#include <cstdint>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spikechain/model.hpp"
#include "spikechain/numeric.hpp"
#include "spikechain/rng.hpp"

namespace spikechain {

// Returned by return_time_tau when i is not re-entered within k_max steps.
constexpr int kTauExceeds = std::numeric_limits<int>::max();

// Directed graph without self-loops, out-adjacency in CSR form with sorted rows.
class SynapticGraph {
 public:
  SynapticGraph() = default;
  SynapticGraph(int n, double theta, double p, std::vector<std::pair<NeuronId, NeuronId>> edges,
                std::uint64_t seed = 0);

  int neurons() const { return n_; }
  double theta() const { return theta_; }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t edge_count() const { return targets_.size(); }
  std::span<const NeuronId> out(NeuronId i) const {
    return {targets_.data() + offsets_[i], targets_.data() + offsets_[i + 1]};
  }
  bool has_edge(NeuronId from, NeuronId to) const;
  std::vector<std::pair<NeuronId, NeuronId>> edges() const;

 private:
  int n_ = 0;
  double theta_ = 0.0;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NeuronId> targets_;
};

// p_N = (1 + ϑ/N)/N
double critical_edge_probability(int n, double theta);

// Each ordered pair i ≠ j present independently with probability p_N.
// `index` selects the replica under the graph stream of `src`.
SynapticGraph sample_er_digraph(int n, double theta, const CoordinateRng& src, std::uint64_t index = 0);

// τ^i = inf{n : i ∈ V^n}, V^1 = out(i), V^n = out(V^{n−1}).
int return_time_tau(const SynapticGraph& g, NeuronId i, int k_max);

// (k−1)/N · e^{ϑk/N}
double tau_tail_bound(int n, double theta, int k);

inline int default_kN(int n) {
  int k = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while ((k + 1) * (k + 1) <= n) ++k;
  while (k * k > n) --k;
  return k;
}

// τ^i > 2 kN
bool event_A(const SynapticGraph& g, NeuronId i, int kN);

// τ^i for `reps` independent graphs (replica r uses index r); OpenMP and serial.
std::vector<int> sample_tau(int n, double theta, NeuronId i, int k_max, std::uint64_t reps,
                            const CoordinateRng& src);
std::vector<int> sample_tau_serial(int n, double theta, NeuronId i, int k_max, std::uint64_t reps,
                                   const CoordinateRng& src);

// Fraction of graphs with τ^i ≤ k for each k in ks (one shared sample).
std::vector<Estimate> estimate_tau_cdf(int n, double theta, NeuronId i, const std::vector<int>& ks,
                                       std::uint64_t reps, const CoordinateRng& src);
Estimate estimate_tau_cdf(int n, double theta, int k, std::uint64_t reps, const CoordinateRng& src);

// W_{j→i} = weight on every edge j→i.
ModelSpec graph_model(const SynapticGraph& g, double delta, const PhiDescriptor& phi,
                      const AgingDescriptor& aging, double weight = 1.0);

}  // namespace spikechain
