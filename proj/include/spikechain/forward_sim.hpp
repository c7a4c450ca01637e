#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "spikechain/field.hpp"
#include "spikechain/model.hpp"
#include "spikechain/rng.hpp"

namespace spikechain {

constexpr std::size_t kHistoryCap = 1000000;

enum class ArtificialPast {
  spike_at_zero,   // every neuron spikes at time 0
  silent_since,    // every neuron spikes at −H and is silent on (−H, 0]
};

constexpr Time kSilentHorizon = 50;

// Forward state at the start of step `time()`: the configurations needed to
// evaluate every neuron's drive plus the last spike time of each neuron.
class ChainState {
 public:
  ChainState(const ModelSpec& spec, ArtificialPast past = ArtificialPast::spike_at_zero,
             Time horizon = kSilentHorizon);

  Time time() const { return time_; }
  int neurons() const { return n_; }
  // Configuration at time() − 1.
  const std::vector<std::uint8_t>& current() const { return ring_.back(); }
  Time last_spike(NeuronId i) const { return last_[i]; }
  Time age(NeuronId i) const { return time_ - last_[i]; }
  // X_s(j) for s in the retained window; 0 before it.
  int at(NeuronId j, Time s) const;
  std::size_t history_length() const { return ring_.size(); }

  // Σ_j W_{j→i} Σ_{s=L_i}^{t−1} g_j(t−s) X_s(j)
  double drive(const ModelSpec& spec, NeuronId i) const;
  double spike_probability(const ModelSpec& spec, NeuronId i) const;

  void push(std::vector<std::uint8_t> config);

 private:
  void trim();

  int n_;
  Time time_ = 1;
  std::deque<std::vector<std::uint8_t>> ring_;  // times [time_ − size, time_ − 1]
  std::vector<Time> last_;
  std::optional<Time> support_;
};

// One step of the dynamics with uniforms keyed by (neuron, time).
void step(ChainState& state, const ModelSpec& spec, const CoordinateRng& src);

// Raster of times burnin+1 .. burnin+T starting from `past`.
SpikeField simulate(const ModelSpec& spec, Time steps, Time burnin, const CoordinateRng& src,
                    ArtificialPast past = ArtificialPast::spike_at_zero);

// Streams every configuration after burn-in to `observe(t, config)`.
void simulate_observe(const ModelSpec& spec, Time steps, Time burnin, const CoordinateRng& src,
                      const std::function<void(Time, const std::vector<std::uint8_t>&)>& observe,
                      ArtificialPast past = ArtificialPast::spike_at_zero);

// Spike times of neuron i after burn-in, without storing the raster.
std::vector<Time> forward_spike_times(const ModelSpec& spec, NeuronId i, Time steps, Time burnin,
                                      const CoordinateRng& src);

struct IsiMoments {
  double mean = 0.0;
  double variance = 0.0;
  double adjacent_cov = 0.0;
};

// Exact chain on the last M configurations (M = support of g, N·M ≤ 12) for
// age-independent φ.
class MarkovOracle {
 public:
  static constexpr int kMaxBits = 12;

  explicit MarkovOracle(const ModelSpec& spec);

  std::size_t states() const { return states_; }
  int memory() const { return memory_; }
  // Row-major dense transition matrix.
  const std::vector<double>& transition() const { return p_; }
  const std::vector<double>& stationary() const { return pi_; }
  double row_sum_error() const;
  double fixed_point_error() const;

  double spike_rate(NeuronId i) const;
  // Law of the newest configuration, indexed by Σ_i x_i 2^i.
  std::vector<double> newest_config_distribution() const;
  IsiMoments isi_moments(NeuronId i) const;

 private:
  int n_;
  int memory_;
  std::size_t states_;
  std::vector<double> p_;
  std::vector<double> pi_;
};

MarkovOracle exact_stationary(const ModelSpec& spec);

}  // namespace spikechain
