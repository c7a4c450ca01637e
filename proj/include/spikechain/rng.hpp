#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>

#include "spikechain/types.hpp"

namespace spikechain {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

enum class StreamTag : std::uint32_t {
  xi = 1,
  range = 2,
  value = 3,
  forward = 4,
  graph = 5,
  replica = 6,
  st_range = 7,
  st_value = 8,
  derive = 9,
  sequential = 10,
  instance = 11,
};

inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Maps (tag, neuron, time, draw) to a uniform variate. Read-only apart from
// a shared draw counter that feeds run manifests.
class CoordinateRng {
 public:
  explicit CoordinateRng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t bits(StreamTag tag, NeuronId neuron, Time time, std::uint32_t draw = 0) const;
  double uniform(StreamTag tag, NeuronId neuron, Time time, std::uint32_t draw = 0) const {
    return to_unit(bits(tag, neuron, time, draw));
  }

  // Independent source for replica/instance `index` under `tag`. Shares the draw counter.
  CoordinateRng derive(StreamTag tag, std::uint64_t index) const;

  std::uint64_t draws() const noexcept { return counter_->load(std::memory_order_relaxed); }

 private:
  CoordinateRng(std::uint64_t seed, std::shared_ptr<std::atomic<std::uint64_t>> counter)
      : seed_(seed), counter_(std::move(counter)) {}

  std::uint64_t seed_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
};

// Sequential engine on top of Philox for bulk draws (graph sampling).
// Satisfies UniformRandomBitGenerator.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  double uniform() { return to_unit((*this)()); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

}  // namespace spikechain
