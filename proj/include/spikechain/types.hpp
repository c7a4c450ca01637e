#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace spikechain {

using NeuronId = std::int32_t;
using Time = std::int64_t;

struct SiteTime {
  NeuronId neuron = 0;
  Time time = 0;

  friend bool operator==(const SiteTime&, const SiteTime&) = default;
};

// Forward-coloring order: time first, then neuron.
inline bool operator<(const SiteTime& a, const SiteTime& b) {
  if (a.time != b.time) return a.time < b.time;
  return a.neuron < b.neuron;
}

struct SiteTimeHash {
  std::size_t operator()(const SiteTime& c) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(c.time) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.neuron)) + 0x632BE59BD9B4E019ull +
         (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

enum class ErrorCode {
  malformed_spec,
  non_finite_constant,
  series_diverges,
  regime_mismatch,
  not_attractive,
  residual_mass_too_large,
  zero_mass,
  scan_cap_exceeded,
  budget_exceeded,
  incomplete_clan,
  unbounded_memory,
  state_space_too_large,
  degenerate,
  too_few_spikes,
  conditioning_too_rare,
  config_error,
  io_error,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(SiteTime target, std::size_t size)
      : Error(ErrorCode::budget_exceeded,
              "clan of (" + std::to_string(target.neuron) + "," + std::to_string(target.time) +
                  ") exceeded budget at " + std::to_string(size) + " coordinates"),
        target_(target),
        size_(size) {}
  SiteTime target() const noexcept { return target_; }
  std::size_t size() const noexcept { return size_; }

 private:
  SiteTime target_;
  std::size_t size_;
};

// Read access to a spike configuration; returns 0 or 1.
using HistoryFn = std::function<int(NeuronId, Time)>;

}  // namespace spikechain
