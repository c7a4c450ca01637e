#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikechain/rate_functions.hpp"
#include "spikechain/types.hpp"

namespace spikechain {

struct InEdge {
  NeuronId source = 0;
  double weight = 0.0;
  int layer = 0;  // smallest k with source ∈ V_i(k)
};

enum class NeighborhoodPolicy {
  by_weight,       // one presynaptic neuron per step, |W| descending, ties by index
  lattice_shells,  // L1 shells around the neuron (needs lattice coordinates)
  explicit_layers, // layers given by the caller
};

class ModelSpec {
 public:
  static constexpr int kNotInNeighborhood = std::numeric_limits<int>::max();

  // weights[j * n + i] = W_{j→i}. `layers` (explicit_layers only) has the same
  // layout and holds the step at which j enters V_i; diagonal ignored.
  ModelSpec(int neuron_count, double delta, std::vector<double> weights,
            std::vector<PhiDescriptor> phi, std::vector<AgingDescriptor> g,
            NeighborhoodPolicy policy = NeighborhoodPolicy::by_weight,
            std::vector<int> layers = {}, std::vector<std::vector<int>> coordinates = {});

  int neuron_count() const { return n_; }
  double delta() const { return delta_; }
  double weight(NeuronId from, NeuronId to) const { return weights_[from * n_ + to]; }
  const std::vector<double>& weights() const { return weights_; }
  const PhiDescriptor& phi(NeuronId i) const { return phi_[i]; }
  const AgingDescriptor& aging(NeuronId i) const { return g_[i]; }
  NeighborhoodPolicy policy() const { return policy_; }
  const std::vector<std::vector<int>>& coordinates() const { return coords_; }

  // In-edges of i with nonzero weight, sorted by (layer, source).
  std::span<const InEdge> inputs(NeuronId i) const;
  int saturation_index(NeuronId i) const { return k_sat_[i]; }
  int layer_of(NeuronId i, NeuronId j) const;
  bool in_neighborhood(NeuronId i, int k, NeuronId j) const { return layer_of(i, j) <= k; }
  // |V_i(k)|, counting i itself; 0 for k = −1.
  std::size_t neighborhood_size(NeuronId i, int k) const;
  std::vector<NeuronId> neighborhood(NeuronId i, int k) const;
  // Σ_{j ∉ V_i(k)} |W_{j→i}|
  double residual_weight(NeuronId i, int k) const;

  double rate(NeuronId i, double drive, Time age) const { return phi_[i](drive, age); }
  double gamma() const;
  bool attractive() const;
  bool age_independent() const;
  bool all_summable() const;
  std::optional<Time> max_support() const;  // max M over finite-support g; nullopt otherwise
  double summability_sup() const;           // sup_i Σ_j |W_{j→i}|

  std::uint64_t hash() const;
  ModelSpec with_delta(double delta) const;

 private:
  int n_;
  double delta_;
  std::vector<double> weights_;
  std::vector<PhiDescriptor> phi_;
  std::vector<AgingDescriptor> g_;
  NeighborhoodPolicy policy_;
  std::vector<std::vector<int>> coords_;
  std::vector<int> explicit_layers_;
  std::vector<std::vector<InEdge>> inputs_;
  std::vector<int> layer_;  // layer_[i * n + j]
  std::vector<int> k_sat_;
  std::vector<std::vector<double>> residual_;  // residual_[i][k] for k = 0..k_sat
};

namespace presets {

ModelSpec zero_interaction(int n, double delta);
// φ ≡ δ for a single neuron.
ModelSpec single_neuron(double delta);
// Two neurons, W_{1→2}=W_{2→1}=w, support-1 g, saturated linear φ.
ModelSpec two_neuron_support1(double delta, double gamma, double w);
// Three neurons, excitatory ring plus a chord, finite-support g.
ModelSpec three_neuron_attractive(double delta, double gamma, Time support);
// Three neurons with exponential g(n) = C e^{−βn}.
ModelSpec exponential_memory(double delta, double gamma, double c, double beta);
// Window of Z^d (d = 1 or 2) of the given side; W_{i→j} = ‖j−i‖₁^{−(2d+α)}, g ≡ 1.
// Boundary neurons miss the mass of the lattice outside the window.
ModelSpec lattice_window(int dim, int side, double alpha, double delta, double gamma);

}  // namespace presets

}  // namespace spikechain
