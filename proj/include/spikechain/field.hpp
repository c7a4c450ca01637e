#pragma once

#include <cstdint>
#include <vector>

#include "spikechain/types.hpp"

namespace spikechain {

// Dense 0/1 configuration on a set of neurons × [t0, t1].
class SpikeField {
 public:
  SpikeField() = default;
  SpikeField(std::vector<NeuronId> neurons, Time t0, Time t1);

  const std::vector<NeuronId>& neurons() const { return neurons_; }
  Time start() const { return t0_; }
  Time end() const { return t1_; }
  Time length() const { return t1_ >= t0_ ? t1_ - t0_ + 1 : 0; }
  bool empty() const { return length() == 0 || neurons_.empty(); }

  // Row index of a neuron, or −1 if absent.
  int row(NeuronId i) const;
  int at(NeuronId i, Time t) const { return cells_[index(row(i), t)]; }
  void set(NeuronId i, Time t, int v) { cells_[index(row(i), t)] = static_cast<std::uint8_t>(v); }
  int at_row(int r, Time t) const { return cells_[index(r, t)]; }
  void set_row(int r, Time t, int v) { cells_[index(r, t)] = static_cast<std::uint8_t>(v); }

  std::uint64_t spike_count() const;
  std::uint64_t spike_count(NeuronId i) const;

  friend bool operator==(const SpikeField&, const SpikeField&) = default;

 private:
  std::size_t index(int r, Time t) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(length()) +
           static_cast<std::size_t>(t - t0_);
  }

  std::vector<NeuronId> neurons_;
  Time t0_ = 0;
  Time t1_ = -1;
  std::vector<std::uint8_t> cells_;
};

}  // namespace spikechain
