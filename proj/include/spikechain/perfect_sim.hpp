#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spikechain/field.hpp"
#include "spikechain/kalikow.hpp"
#include "spikechain/model.hpp"
#include "spikechain/numeric.hpp"
#include "spikechain/rng.hpp"

namespace spikechain {

constexpr std::size_t kDefaultBudget = 1000000;
constexpr Time kScanCap = 10000000;

int xi_at(const CoordinateRng& src, double delta, NeuronId i, Time t);
// Largest s < t with ξ_s(i) = 1.
Time last_spontaneous(const CoordinateRng& src, double delta, NeuronId i, Time t,
                      Time scan_cap = kScanCap);
SiteTimeContext context_at(const CoordinateRng& src, const ModelSpec& spec, NeuronId i, Time t);

struct Clan {
  SiteTime target;
  bool target_spontaneous = false;
  std::vector<std::vector<SiteTime>> generations;  // C_1, ..., C_{n_stop − 1}, each sorted
  std::vector<std::pair<SiteTime, int>> chosen_ranges;  // sorted by coordinate
  int n_stop = 1;
  Time t_stop = 0;
  Time earliest_time = 0;
  MassMode mode = MassMode::exact;

  std::size_t size() const;
  std::optional<int> range_of(SiteTime c) const;
};

// Draws ranges from the decomposition of each coordinate; used by both the
// backward construction and the forward coloring so they see the same values.
class ClanEngine {
 public:
  ClanEngine(const ModelSpec& spec, const CoordinateRng& src, MassMode mode);
  ~ClanEngine();
  ClanEngine(const ClanEngine&) = delete;
  ClanEngine& operator=(const ClanEngine&) = delete;

  Clan build(NeuronId i, Time t, std::size_t budget);
  // Resolves the target of `clan`; only coordinates of the clan may be read.
  int color(const Clan& clan);
  // build + color
  int sample(NeuronId i, Time t, std::size_t budget, Clan* clan_out = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Clan clan_of_ancestors(const CoordinateRng& src, const ModelSpec& spec, NeuronId i, Time t,
                       std::size_t budget = kDefaultBudget,
                       std::optional<MassMode> mode = std::nullopt);
int forward_coloring(const Clan& clan, const CoordinateRng& src, const ModelSpec& spec);

struct SampleStats {
  std::uint64_t cells = 0;
  std::uint64_t clan_members = 0;
  std::uint64_t max_clan_size = 0;
  int max_n_stop = 0;
  Time max_t_stop = 0;
  MassMode mode = MassMode::exact;

  nlohmann::ordered_json to_json() const;
};

// OpenMP over window cells; each thread keeps its own caches.
SpikeField perfect_sample(const CoordinateRng& src, const ModelSpec& spec,
                          const std::vector<NeuronId>& neurons, Time t0, Time t1,
                          std::size_t budget = kDefaultBudget, SampleStats* stats = nullptr,
                          std::optional<MassMode> mode = std::nullopt);
// Serial reference with one shared cache.
SpikeField perfect_sample_serial(const CoordinateRng& src, const ModelSpec& spec,
                                 const std::vector<NeuronId>& neurons, Time t0, Time t1,
                                 std::size_t budget = kDefaultBudget, SampleStats* stats = nullptr,
                                 std::optional<MassMode> mode = std::nullopt);

// Space-time sampler (age-independent φ, summable g, m_sup < 1).
class SpacetimeEngine {
 public:
  SpacetimeEngine(const ModelSpec& spec, const CoordinateRng& src, MassMode mode);
  ~SpacetimeEngine();
  SpacetimeEngine(const SpacetimeEngine&) = delete;
  SpacetimeEngine& operator=(const SpacetimeEngine&) = delete;

  Clan build(NeuronId i, Time t, std::size_t budget);
  int sample(NeuronId i, Time t, std::size_t budget, Clan* clan_out = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpikeField spacetime_sample(const CoordinateRng& src, const ModelSpec& spec,
                            const std::vector<NeuronId>& neurons, Time t0, Time t1,
                            std::size_t budget = kDefaultBudget, SampleStats* stats = nullptr,
                            std::optional<MassMode> mode = std::nullopt);

struct ClanSurvival {
  std::vector<Estimate> survival;    // P(N_STOP > n), n = 1..n_max
  std::vector<double> mean_size;     // E|C_n|, n = 1..n_max
  std::uint64_t reps = 0;
  std::uint64_t budget_failures = 0;
};

// Independent clans of neuron `i` at the first time ≥ 0 with ξ = 0 (or at time 0
// for the space-time sampler), one derived source per replica.
ClanSurvival clan_survival(const CoordinateRng& src, const ModelSpec& spec, NeuronId i,
                           std::uint64_t reps, int n_max, bool spacetime = false,
                           std::size_t budget = kDefaultBudget);

}  // namespace spikechain
