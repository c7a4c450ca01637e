#include "spikechain/perfect_sim.hpp"

#include <algorithm>
#include <exception>
#include <unordered_map>
#include <unordered_set>

#include <omp.h>

namespace spikechain {

int xi_at(const CoordinateRng& src, double delta, NeuronId i, Time t) {
  if (delta >= 1.0) return 1;
  return src.uniform(StreamTag::xi, i, t) < delta ? 1 : 0;
}

Time last_spontaneous(const CoordinateRng& src, double delta, NeuronId i, Time t, Time scan_cap) {
  for (Time s = t - 1; s >= t - scan_cap; --s)
    if (xi_at(src, delta, i, s)) return s;
  throw Error(ErrorCode::scan_cap_exceeded, "no spontaneous spike within the scan cap");
}

namespace {

SiteTimeContext context_with(const CoordinateRng& src, const ModelSpec& spec, NeuronId i, Time t,
                             Time R) {
  SiteTimeContext ctx;
  ctx.neuron = i;
  ctx.time = t;
  ctx.last_xi = R;
  ctx.neurons = spec.neuron_count();
  const Time age = t - R;
  ctx.xi.assign(static_cast<std::size_t>(ctx.neurons) * age, 0);
  const double delta = spec.delta();
  // Only presynaptic neurons and i itself are ever read.
  std::vector<NeuronId> rows{i};
  for (const auto& e : spec.inputs(i)) rows.push_back(e.source);
  for (NeuronId j : rows)
    for (Time s = R; s < t; ++s) ctx.xi[static_cast<std::size_t>(j) * age + (s - R)] =
        static_cast<std::uint8_t>(xi_at(src, delta, j, s));
  return ctx;
}

}  // namespace

SiteTimeContext context_at(const CoordinateRng& src, const ModelSpec& spec, NeuronId i, Time t) {
  return context_with(src, spec, i, t, last_spontaneous(src, spec.delta(), i, t));
}

std::size_t Clan::size() const {
  std::size_t n = 0;
  for (const auto& g : generations) n += g.size();
  return n;
}

std::optional<int> Clan::range_of(SiteTime c) const {
  const auto it = std::lower_bound(chosen_ranges.begin(), chosen_ranges.end(), c,
                                   [](const auto& p, const SiteTime& v) { return p.first < v; });
  if (it != chosen_ranges.end() && it->first == c) return it->second;
  return std::nullopt;
}

nlohmann::ordered_json SampleStats::to_json() const {
  return {{"cells", cells},
          {"clan_members", clan_members},
          {"max_clan_size", max_clan_size},
          {"max_n_stop", max_n_stop},
          {"max_t_stop", max_t_stop},
          {"mode", to_string(mode)}};
}

using CoordSet = std::unordered_set<SiteTime, SiteTimeHash>;

struct ClanEngine::Impl {
  struct CoordInfo {
    SiteTimeContext ctx;
    std::unique_ptr<SiteTimeKernel> kernel;
    KalikowWeights weights;
    int range = -1;
  };

  const ModelSpec& spec;
  CoordinateRng src;
  MassMode mode;
  double delta;
  std::unordered_map<SiteTime, Time, SiteTimeHash> last_xi;
  std::unordered_map<SiteTime, std::unique_ptr<CoordInfo>, SiteTimeHash> info;
  std::unordered_map<SiteTime, std::uint8_t, SiteTimeHash> memo;

  Impl(const ModelSpec& s, const CoordinateRng& r, MassMode m)
      : spec(s), src(r), mode(m), delta(s.delta()) {}

  int xi(NeuronId j, Time t) const { return xi_at(src, delta, j, t); }

  Time R(NeuronId j, Time t) {
    const SiteTime key{j, t};
    if (auto it = last_xi.find(key); it != last_xi.end()) return it->second;
    const Time r = last_spontaneous(src, delta, j, t);
    // Every s in (r, t] shares the same last spontaneous spike.
    for (Time s = r + 1; s <= t; ++s) last_xi.emplace(SiteTime{j, s}, r);
    return r;
  }

  CoordInfo& at(NeuronId j, Time s) {
    const SiteTime key{j, s};
    if (auto it = info.find(key); it != info.end()) return *it->second;
    auto ci = std::make_unique<CoordInfo>();
    ci->ctx = context_with(src, spec, j, s, R(j, s));
    ci->kernel = std::make_unique<SiteTimeKernel>(ci->ctx, spec);
    ci->weights = ci->kernel->weights(mode);
    const double u = delta + (1.0 - delta) * src.uniform(StreamTag::range, j, s);
    int k = ci->weights.k_max;
    for (int q = -1; q <= ci->weights.k_max; ++q)
      if (u <= ci->weights.alpha_at(q)) {
        k = q;
        break;
      }
    ci->range = k;
    auto& ref = *ci;
    info.emplace(key, std::move(ci));
    return ref;
  }

  Clan build(NeuronId i, Time t, std::size_t budget) {
    Clan clan;
    clan.target = {i, t};
    clan.mode = mode;
    clan.earliest_time = t;
    if (xi(i, t)) {
      clan.target_spontaneous = true;
      return clan;
    }
    CoordSet seen{clan.target};
    CoordSet rows_done;
    std::size_t count = 0;
    auto expand = [&](const SiteTime& m, std::vector<SiteTime>& next) {
      const Time r = R(m.neuron, m.time);
      clan.earliest_time = std::min(clan.earliest_time, r);
      for (Time s = r + 1; s <= m.time; ++s) {
        if (!rows_done.insert({m.neuron, s}).second) continue;
        auto& ci = at(m.neuron, s);
        clan.chosen_ranges.push_back({{m.neuron, s}, ci.range});
        if (++count > budget) throw BudgetExceeded(clan.target, count);
        if (ci.range < 0) continue;
        for (const auto& e : spec.inputs(m.neuron)) {
          if (e.layer > ci.range) break;
          for (Time u = r; u < s; ++u) {
            if (xi(e.source, u)) continue;
            if (seen.insert({e.source, u}).second) next.push_back({e.source, u});
          }
        }
      }
    };
    std::vector<SiteTime> gen{clan.target};
    int n = 1;
    for (;;) {
      std::vector<SiteTime> next;
      for (const auto& m : gen) expand(m, next);
      if (next.empty()) break;
      std::sort(next.begin(), next.end());
      clan.generations.push_back(next);
      gen = std::move(next);
      ++n;
    }
    clan.n_stop = n;
    clan.t_stop = t - clan.earliest_time;
    std::sort(clan.chosen_ranges.begin(), clan.chosen_ranges.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return clan;
  }

  int known(NeuronId j, Time s) {
    if (xi(j, s)) return 1;
    const auto it = memo.find({j, s});
    if (it == memo.end())
      throw Error(ErrorCode::incomplete_clan, "value at (" + std::to_string(j) + "," +
                                                  std::to_string(s) + ") is unresolved");
    return it->second;
  }

  int compute(NeuronId j, Time s) {
    auto& ci = at(j, s);
    const double u = src.uniform(StreamTag::value, j, s);
    const auto& w = ci.weights;
    if (ci.range < 0) {
      const double denom = w.alpha_at(-1) - delta;
      const double accept = denom > 0.0 ? std::clamp((w.r_minus1.one - delta) / denom, 0.0, 1.0) : 0.0;
      return u < accept ? 1 : 0;
    }
    const HistoryFn x = [this](NeuronId l, Time v) { return known(l, v); };
    return u < ci.kernel->p_k(w, ci.range, x).one ? 1 : 0;
  }

  // Resolves c after resolving, in increasing time order, every coordinate it
  // can depend on. `allowed` (optional) restricts which coordinates may be drawn.
  int resolve(const SiteTime& c, const CoordSet* allowed) {
    if (xi(c.neuron, c.time)) return 1;
    if (auto it = memo.find(c); it != memo.end()) return it->second;
    std::vector<SiteTime> stack{c}, needed;
    CoordSet visited;
    while (!stack.empty()) {
      const SiteTime v = stack.back();
      stack.pop_back();
      if (xi(v.neuron, v.time) || memo.count(v) || !visited.insert(v).second) continue;
      if (allowed && !allowed->count(v))
        throw Error(ErrorCode::incomplete_clan, "(" + std::to_string(v.neuron) + "," +
                                                    std::to_string(v.time) + ") is outside the clan");
      needed.push_back(v);
      const Time r = R(v.neuron, v.time);
      for (Time u = r + 1; u < v.time; ++u) stack.push_back({v.neuron, u});
      const int k = at(v.neuron, v.time).range;
      if (k < 0) continue;
      for (const auto& e : spec.inputs(v.neuron)) {
        if (e.layer > k) break;
        for (Time u = r; u < v.time; ++u) stack.push_back({e.source, u});
      }
    }
    std::sort(needed.begin(), needed.end());
    for (const auto& v : needed) memo[v] = static_cast<std::uint8_t>(compute(v.neuron, v.time));
    return memo.at(c);
  }

  int color(const Clan& clan) {
    if (clan.target_spontaneous) return 1;
    CoordSet allowed;
    for (const auto& p : clan.chosen_ranges) allowed.insert(p.first);
    for (auto g = clan.generations.rbegin(); g != clan.generations.rend(); ++g)
      for (const auto& m : *g) resolve(m, &allowed);
    return resolve(clan.target, &allowed);
  }
};

ClanEngine::ClanEngine(const ModelSpec& spec, const CoordinateRng& src, MassMode mode)
    : impl_(std::make_unique<Impl>(spec, src, mode)) {}
ClanEngine::~ClanEngine() = default;

Clan ClanEngine::build(NeuronId i, Time t, std::size_t budget) { return impl_->build(i, t, budget); }
int ClanEngine::color(const Clan& clan) { return impl_->color(clan); }

int ClanEngine::sample(NeuronId i, Time t, std::size_t budget, Clan* clan_out) {
  auto clan = impl_->build(i, t, budget);
  const int v = impl_->color(clan);
  if (clan_out) *clan_out = std::move(clan);
  return v;
}

Clan clan_of_ancestors(const CoordinateRng& src, const ModelSpec& spec, NeuronId i, Time t,
                       std::size_t budget, std::optional<MassMode> mode) {
  ClanEngine engine(spec, src, mode.value_or(default_mode(spec)));
  return engine.build(i, t, budget);
}

int forward_coloring(const Clan& clan, const CoordinateRng& src, const ModelSpec& spec) {
  ClanEngine engine(spec, src, clan.mode);
  return engine.color(clan);
}

namespace {

struct Cell {
  int row;
  NeuronId neuron;
  Time time;
};

std::vector<Cell> window_cells(const std::vector<NeuronId>& neurons, Time t0, Time t1) {
  std::vector<Cell> cells;
  for (Time t = t0; t <= t1; ++t)
    for (std::size_t r = 0; r < neurons.size(); ++r)
      cells.push_back({static_cast<int>(r), neurons[r], t});
  return cells;
}

void record(SampleStats& stats, const Clan& clan) {
  ++stats.cells;
  stats.clan_members += clan.size();
  stats.max_clan_size = std::max<std::uint64_t>(stats.max_clan_size, clan.size());
  stats.max_n_stop = std::max(stats.max_n_stop, clan.n_stop);
  stats.max_t_stop = std::max(stats.max_t_stop, clan.t_stop);
}

void merge(SampleStats& into, const SampleStats& from) {
  into.cells += from.cells;
  into.clan_members += from.clan_members;
  into.max_clan_size = std::max(into.max_clan_size, from.max_clan_size);
  into.max_n_stop = std::max(into.max_n_stop, from.max_n_stop);
  into.max_t_stop = std::max(into.max_t_stop, from.max_t_stop);
}

void check_window(const ModelSpec& spec, const std::vector<NeuronId>& neurons) {
  for (NeuronId i : neurons)
    if (i < 0 || i >= spec.neuron_count())
      throw Error(ErrorCode::malformed_spec, "window neuron out of range");
}

// Runs `per_cell(engine, cell, stats)` over all cells, in parallel or not. On
// failure rethrows the error of the first failing cell in window order.
template <class Engine, class PerCell>
SpikeField run_window(const ModelSpec& spec, const CoordinateRng& src, MassMode mode,
                      const std::vector<NeuronId>& neurons, Time t0, Time t1, bool parallel,
                      SampleStats* stats, PerCell per_cell) {
  check_window(spec, neurons);
  SpikeField field(neurons, t0, t1);
  const auto cells = window_cells(neurons, t0, t1);
  SampleStats total;
  total.mode = mode;
  std::exception_ptr first_error;
  std::size_t first_index = cells.size();
  if (!parallel) {
    Engine engine(spec, src, mode);
    for (std::size_t c = 0; c < cells.size(); ++c)
      field.set_row(cells[c].row, cells[c].time, per_cell(engine, cells[c], total));
  } else {
#pragma omp parallel
    {
      Engine engine(spec, src, mode);
      SampleStats local;
#pragma omp for schedule(dynamic, 4)
      for (std::size_t c = 0; c < cells.size(); ++c) {
        try {
          const int v = per_cell(engine, cells[c], local);
          field.set_row(cells[c].row, cells[c].time, v);
        } catch (...) {
#pragma omp critical(spikechain_window_error)
          if (c < first_index) {
            first_index = c;
            first_error = std::current_exception();
          }
        }
      }
#pragma omp critical(spikechain_window_stats)
      merge(total, local);
    }
    if (first_error) std::rethrow_exception(first_error);
  }
  if (stats) *stats = total;
  return field;
}

SpikeField perfect_window(const CoordinateRng& src, const ModelSpec& spec,
                          const std::vector<NeuronId>& neurons, Time t0, Time t1,
                          std::size_t budget, SampleStats* stats, std::optional<MassMode> mode,
                          bool parallel) {
  const MassMode m = mode.value_or(default_mode(spec));
  return run_window<ClanEngine>(spec, src, m, neurons, t0, t1, parallel, stats,
                                [budget](ClanEngine& engine, const Cell& cell, SampleStats& st) {
                                  Clan clan;
                                  const int v = engine.sample(cell.neuron, cell.time, budget, &clan);
                                  record(st, clan);
                                  return v;
                                });
}

}  // namespace

SpikeField perfect_sample(const CoordinateRng& src, const ModelSpec& spec,
                          const std::vector<NeuronId>& neurons, Time t0, Time t1,
                          std::size_t budget, SampleStats* stats, std::optional<MassMode> mode) {
  return perfect_window(src, spec, neurons, t0, t1, budget, stats, mode, true);
}

SpikeField perfect_sample_serial(const CoordinateRng& src, const ModelSpec& spec,
                                 const std::vector<NeuronId>& neurons, Time t0, Time t1,
                                 std::size_t budget, SampleStats* stats,
                                 std::optional<MassMode> mode) {
  return perfect_window(src, spec, neurons, t0, t1, budget, stats, mode, false);
}

struct SpacetimeEngine::Impl {
  const ModelSpec& spec;
  CoordinateRng src;
  MassMode mode;
  std::vector<SpacetimeWeights> weights;
  std::unordered_map<SiteTime, int, SiteTimeHash> ranges;
  std::unordered_map<SiteTime, std::uint8_t, SiteTimeHash> memo;

  Impl(const ModelSpec& s, const CoordinateRng& r, MassMode m) : spec(s), src(r), mode(m) {
    for (int i = 0; i < s.neuron_count(); ++i) weights.push_back(spacetime_weights(s, i, m));
  }

  int range(NeuronId j, Time s) {
    const SiteTime key{j, s};
    if (auto it = ranges.find(key); it != ranges.end()) return it->second;
    const auto& w = weights[j];
    const double u = src.uniform(StreamTag::st_range, j, s);
    int k = w.k_max;
    for (int q = -1; q <= w.k_max; ++q)
      if (u <= w.alpha[q + 1]) {
        k = q;
        break;
      }
    ranges.emplace(key, k);
    return k;
  }

  template <class F>
  void for_block(NeuronId j, Time s, int k, F f) {
    if (k < 0) return;
    if (k == 0) {
      f(SiteTime{j, s - 1});
      return;
    }
    for (NeuronId l : spec.neighborhood(j, k))
      for (Time u = s - k - 1; u <= s - 1; ++u) f(SiteTime{l, u});
  }

  Clan build(NeuronId i, Time t, std::size_t budget) {
    Clan clan;
    clan.target = {i, t};
    clan.mode = mode;
    clan.earliest_time = t;
    CoordSet seen{clan.target};
    std::size_t count = 0;
    std::vector<SiteTime> gen{clan.target};
    int n = 1;
    for (;;) {
      std::vector<SiteTime> next;
      for (const auto& m : gen) {
        const int k = range(m.neuron, m.time);
        clan.chosen_ranges.push_back({m, k});
        if (++count > budget) throw BudgetExceeded(clan.target, count);
        for_block(m.neuron, m.time, k, [&](const SiteTime& c) {
          if (seen.insert(c).second) next.push_back(c);
        });
      }
      if (next.empty()) break;
      std::sort(next.begin(), next.end());
      for (const auto& c : next) clan.earliest_time = std::min(clan.earliest_time, c.time);
      clan.generations.push_back(next);
      gen = std::move(next);
      ++n;
    }
    clan.n_stop = n;
    clan.t_stop = t - clan.earliest_time;
    std::sort(clan.chosen_ranges.begin(), clan.chosen_ranges.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return clan;
  }

  int known(NeuronId j, Time s) {
    const auto it = memo.find({j, s});
    if (it == memo.end()) throw Error(ErrorCode::incomplete_clan, "space-time value unresolved");
    return it->second;
  }

  int compute(NeuronId j, Time s) {
    const int k = range(j, s);
    const double u = src.uniform(StreamTag::st_value, j, s);
    const auto& w = weights[j];
    if (k < 0) return u < w.r_minus1.one / w.lambda_at(-1) ? 1 : 0;
    const HistoryFn x = [this](NeuronId l, Time v) { return known(l, v); };
    return u < spacetime_p_k(spec, w, s, k, x).one ? 1 : 0;
  }

  int resolve(const Clan& clan) {
    const auto& c = clan.target;
    if (auto it = memo.find(c); it != memo.end()) return it->second;
    std::vector<SiteTime> needed;
    for (const auto& p : clan.chosen_ranges)
      if (!memo.count(p.first)) needed.push_back(p.first);
    // chosen_ranges is sorted by (time, neuron): dependencies come first.
    for (const auto& v : needed) memo[v] = static_cast<std::uint8_t>(compute(v.neuron, v.time));
    return memo.at(c);
  }
};

SpacetimeEngine::SpacetimeEngine(const ModelSpec& spec, const CoordinateRng& src, MassMode mode)
    : impl_(std::make_unique<Impl>(spec, src, mode)) {}
SpacetimeEngine::~SpacetimeEngine() = default;

Clan SpacetimeEngine::build(NeuronId i, Time t, std::size_t budget) { return impl_->build(i, t, budget); }

int SpacetimeEngine::sample(NeuronId i, Time t, std::size_t budget, Clan* clan_out) {
  auto clan = impl_->build(i, t, budget);
  const int v = impl_->resolve(clan);
  if (clan_out) *clan_out = std::move(clan);
  return v;
}

SpikeField spacetime_sample(const CoordinateRng& src, const ModelSpec& spec,
                            const std::vector<NeuronId>& neurons, Time t0, Time t1,
                            std::size_t budget, SampleStats* stats, std::optional<MassMode> mode) {
  const MassMode m = mode.value_or(default_mode(spec));
  return run_window<SpacetimeEngine>(spec, src, m, neurons, t0, t1, true, stats,
                                     [budget](SpacetimeEngine& engine, const Cell& cell, SampleStats& st) {
                                       Clan clan;
                                       const int v = engine.sample(cell.neuron, cell.time, budget, &clan);
                                       record(st, clan);
                                       return v;
                                     });
}

ClanSurvival clan_survival(const CoordinateRng& src, const ModelSpec& spec, NeuronId i,
                           std::uint64_t reps, int n_max, bool spacetime, std::size_t budget) {
  const MassMode mode = default_mode(spec);
  std::vector<std::uint64_t> alive(n_max, 0);
  std::vector<double> sizes(n_max, 0.0);
  std::uint64_t failures = 0;
#pragma omp parallel
  {
    std::vector<std::uint64_t> alive_local(n_max, 0);
    std::vector<double> sizes_local(n_max, 0.0);
    std::uint64_t failures_local = 0;
#pragma omp for schedule(dynamic, 16)
    for (std::uint64_t r = 0; r < reps; ++r) {
      const auto rep_src = src.derive(StreamTag::replica, r);
      Clan clan;
      try {
        if (spacetime) {
          SpacetimeEngine engine(spec, rep_src, mode);
          clan = engine.build(i, 0, budget);
        } else {
          Time t = 0;
          while (xi_at(rep_src, spec.delta(), i, t)) ++t;
          ClanEngine engine(spec, rep_src, mode);
          clan = engine.build(i, t, budget);
        }
      } catch (const BudgetExceeded&) {
        ++failures_local;
        for (int n = 0; n < n_max; ++n) ++alive_local[n];
        continue;
      }
      for (int n = 1; n <= n_max; ++n) {
        if (clan.n_stop > n) ++alive_local[n - 1];
        if (n <= static_cast<int>(clan.generations.size()))
          sizes_local[n - 1] += static_cast<double>(clan.generations[n - 1].size());
      }
    }
#pragma omp critical(spikechain_survival)
    {
      for (int n = 0; n < n_max; ++n) {
        alive[n] += alive_local[n];
        sizes[n] += sizes_local[n];
      }
      failures += failures_local;
    }
  }
  ClanSurvival out;
  out.reps = reps;
  out.budget_failures = failures;
  for (int n = 0; n < n_max; ++n) {
    out.survival.push_back(proportion(alive[n], reps));
    out.mean_size.push_back(sizes[n] / static_cast<double>(reps));
  }
  return out;
}

}  // namespace spikechain
