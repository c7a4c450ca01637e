#include "spikechain/rng.hpp"

namespace spikechain {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

inline std::array<std::uint32_t, 2> split_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kM0, ctr[0], lo0, hi0);
    mulhilo(kM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

CoordinateRng::CoordinateRng(std::uint64_t seed)
    : seed_(seed), counter_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

std::uint64_t CoordinateRng::bits(StreamTag tag, NeuronId neuron, Time time,
                                  std::uint32_t draw) const {
  counter_->fetch_add(1, std::memory_order_relaxed);
  const auto t = static_cast<std::uint64_t>(time);
  const std::array<std::uint32_t, 4> ctr = {
      (static_cast<std::uint32_t>(tag) << 20) | (draw & 0xFFFFFu),
      static_cast<std::uint32_t>(neuron), static_cast<std::uint32_t>(t),
      static_cast<std::uint32_t>(t >> 32)};
  const auto out = philox4x32(ctr, split_key(seed_));
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

CoordinateRng CoordinateRng::derive(StreamTag tag, std::uint64_t index) const {
  const std::array<std::uint32_t, 4> ctr = {
      (static_cast<std::uint32_t>(StreamTag::derive) << 20), static_cast<std::uint32_t>(tag),
      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  const auto out = philox4x32(ctr, split_key(seed_));
  return CoordinateRng((static_cast<std::uint64_t>(out[2]) << 32) | out[3], counter_);
}

PhiloxEngine::result_type PhiloxEngine::operator()() {
  if (used_ >= 4) {
    const std::array<std::uint32_t, 4> ctr = {
        (static_cast<std::uint32_t>(StreamTag::sequential) << 20) |
            static_cast<std::uint32_t>(stream_ >> 32 & 0xFFFFFu),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32)};
    block_ = philox4x32(ctr, split_key(seed_));
    ++counter_;
    used_ = 0;
  }
  const std::uint64_t v = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return v;
}

}  // namespace spikechain
