#include "spikechain/isi_stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>

#include <omp.h>

namespace spikechain {

std::vector<Time> extract_spikes(const SpikeField& field, NeuronId i) {
  std::vector<Time> out;
  if (field.empty()) return out;
  const int r = field.row(i);
  if (r < 0) return out;
  for (Time t = field.start(); t <= field.end(); ++t)
    if (field.at_row(r, t)) out.push_back(t);
  return out;
}

std::vector<Time> isi_sequence(const std::vector<Time>& spikes) {
  std::vector<Time> d;
  for (std::size_t k = 1; k < spikes.size(); ++k) d.push_back(spikes[k] - spikes[k - 1]);
  return d;
}

namespace {

Estimate mean_and_se(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) return {};
  const double m = neumaier_sum(xs) / n;
  if (xs.size() < 2) return {m, 0.0};
  NeumaierSum ss;
  for (double x : xs) ss.add((x - m) * (x - m));
  return {m, std::sqrt(ss.value() / (n - 1.0) / n)};
}

nlohmann::ordered_json est_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

}  // namespace

nlohmann::ordered_json IsiCovariance::to_json() const {
  return {{"adjacent_cov", est_json(cov)},
          {"mean_isi", est_json(mean_isi)},
          {"pairs", pairs},
          {"batches", batches}};
}

IsiCovariance adjacent_covariance_of(const std::vector<double>& isi, int batches) {
  if (isi.size() < 3) throw Error(ErrorCode::too_few_spikes, "need at least 3 intervals");
  if (batches < 2) throw Error(ErrorCode::malformed_spec, "need at least 2 batches");
  IsiCovariance out;
  const double mean = neumaier_sum(isi) / static_cast<double>(isi.size());
  const std::size_t pairs = isi.size() - 1;
  std::vector<double> prod(pairs);
  for (std::size_t k = 0; k < pairs; ++k) prod[k] = (isi[k] - mean) * (isi[k + 1] - mean);
  out.pairs = pairs;
  out.cov.value = neumaier_sum(prod) / static_cast<double>(pairs);
  const auto b = std::min<std::size_t>(batches, pairs);
  out.batches = static_cast<int>(b);
  std::vector<double> cov_batch, mean_batch;
  for (std::size_t q = 0; q < b; ++q) {
    const std::size_t lo = q * pairs / b, hi = (q + 1) * pairs / b;
    cov_batch.push_back(neumaier_sum(std::span(prod).subspan(lo, hi - lo)) / static_cast<double>(hi - lo));
    mean_batch.push_back(neumaier_sum(std::span(isi).subspan(lo, hi - lo)) / static_cast<double>(hi - lo));
  }
  out.cov.se = mean_and_se(cov_batch).se;
  out.mean_isi = {mean, mean_and_se(mean_batch).se};
  return out;
}

IsiCovariance adjacent_isi_covariance(const std::vector<Time>& spikes, std::size_t min_spikes,
                                      int batches) {
  if (spikes.size() < std::max<std::size_t>(min_spikes, 4))
    throw Error(ErrorCode::too_few_spikes, std::to_string(spikes.size()) + " spikes, need " +
                                               std::to_string(std::max<std::size_t>(min_spikes, 4)));
  const auto d = isi_sequence(spikes);
  return adjacent_covariance_of(std::vector<double>(d.begin(), d.end()), batches);
}

double theorem4_bound(int n, double delta) {
  if (n < 1 || !(delta > 0.0 && delta <= 1.0))
    throw Error(ErrorCode::malformed_spec, "theorem4_bound needs N >= 1 and delta in (0,1]");
  if (delta == 1.0) return 0.0;
  return 3.0 / (delta * delta) * n * std::pow(1.0 - delta, std::sqrt(static_cast<double>(n)));
}

nlohmann::ordered_json Theorem4Report::to_json() const {
  auto cells_json = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    auto graphs = nlohmann::ordered_json::array();
    for (const auto& g : c.graphs)
      graphs.push_back({{"index", g.index}, {"edges", g.edges}, {"isi", g.isi.to_json()}});
    cells_json.push_back({{"N", c.n},
                          {"kN", c.kN},
                          {"p_A_complement", est_json(c.a_complement)},
                          {"p_A_complement_bound", c.a_complement_bound},
                          {"theorem4_bound", c.bound},
                          {"median_abs_cov", c.median_abs_cov},
                          {"within_bound", c.within_bound},
                          {"graphs", graphs}});
  }
  return {{"cells", cells_json}, {"median_nonincreasing", median_nonincreasing}};
}

Theorem4Report theorem4_experiment(const Theorem4Config& cfg, const CoordinateRng& src, bool parallel) {
  Theorem4Report report;
  for (int n : cfg.ns) {
    if (n < 2 || n > 200) throw Error(ErrorCode::malformed_spec, "theorem4 N must lie in [2, 200]");
    Theorem4Cell cell;
    cell.n = n;
    cell.kN = default_kN(n);
    cell.bound = theorem4_bound(n, cfg.delta);
    cell.a_complement_bound = std::exp(2.0 * cfg.theta) / std::sqrt(static_cast<double>(n));
    const auto cell_src = src.derive(StreamTag::instance, static_cast<std::uint64_t>(n));
    const auto taus = parallel ? sample_tau(n, cfg.theta, cfg.neuron, 2 * cell.kN, cfg.graphs, cell_src)
                               : sample_tau_serial(n, cfg.theta, cfg.neuron, 2 * cell.kN, cfg.graphs, cell_src);
    std::vector<std::uint64_t> chosen;
    std::uint64_t misses = 0;
    for (std::uint64_t r = 0; r < cfg.graphs; ++r) {
      if (taus[r] != kTauExceeds) {
        ++misses;
        continue;
      }
      if (chosen.size() < cfg.a_graphs) chosen.push_back(r);
    }
    cell.a_complement = proportion(misses, cfg.graphs);
    cell.graphs.resize(chosen.size());
    auto run = [&](std::size_t q) {
      const auto g = sample_er_digraph(n, cfg.theta, cell_src, chosen[q]);
      const auto spec = graph_model(g, cfg.delta, cfg.phi, cfg.aging, cfg.weight);
      const auto times = forward_spike_times(spec, cfg.neuron, cfg.steps, cfg.burnin,
                                             cell_src.derive(StreamTag::replica, chosen[q]));
      cell.graphs[q] = {chosen[q], g.edge_count(), taus[chosen[q]], adjacent_isi_covariance(times)};
    };
    if (parallel) {
      std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
      for (std::size_t q = 0; q < chosen.size(); ++q) {
        try {
          run(q);
        } catch (...) {
#pragma omp critical(spikechain_t4)
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);
    } else {
      for (std::size_t q = 0; q < chosen.size(); ++q) run(q);
    }
    std::vector<double> abs_cov;
    for (const auto& g : cell.graphs) {
      abs_cov.push_back(std::abs(g.isi.cov.value));
      if (std::abs(g.isi.cov.value) > cell.bound + 3.0 * g.isi.cov.se) cell.within_bound = false;
    }
    cell.median_abs_cov = abs_cov.empty() ? 0.0 : median(abs_cov);
    report.cells.push_back(std::move(cell));
  }
  for (std::size_t c = 1; c < report.cells.size(); ++c)
    if (report.cells[c].median_abs_cov > report.cells[c - 1].median_abs_cov)
      report.median_nonincreasing = false;
  return report;
}

nlohmann::ordered_json LocalityReport::to_json() const {
  auto suffix = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < by_suffix.size(); ++a)
    suffix.push_back({{"suffix", a}, {"count", counts[a]}, {"p", est_json(by_suffix[a])}});
  return {{"applicable", applicable}, {"tau", tau == kTauExceeds ? -1 : tau},
          {"k", k},                   {"l", l},
          {"base", est_json(base)},   {"by_suffix", suffix},
          {"max_z", max_z},           {"agree", agree}};
}

LocalityReport locality_check(const SynapticGraph& g, NeuronId i, int k, int l, double delta,
                              const PhiDescriptor& phi, const AgingDescriptor& aging, Time steps,
                              const CoordinateRng& src, double weight) {
  if (k < 1 || l < 1 || l > 6) throw Error(ErrorCode::malformed_spec, "locality needs k >= 1, 1 <= l <= 6");
  LocalityReport rep;
  rep.k = k;
  rep.l = l;
  rep.tau = return_time_tau(g, i, k + l);
  if (rep.tau != kTauExceeds) {
    rep.applicable = false;
    return rep;
  }
  const auto spec = graph_model(g, delta, phi, aging, weight);
  const std::size_t buckets = std::size_t{1} << l;
  std::vector<std::uint64_t> hits(buckets, 0), counts(buckets, 0);
  std::vector<std::uint8_t> x;  // X_t(i), t = 1, 2, ...
  x.reserve(static_cast<std::size_t>(steps));
  simulate_observe(spec, steps, 0, src, [&](Time, const std::vector<std::uint8_t>& c) {
    x.push_back(c[i]);
    const auto t = static_cast<std::ptrdiff_t>(x.size()) - 1;
    if (t < k + l) return;
    if (!x[t - k]) return;
    for (int m = 1; m < k; ++m)
      if (x[t - k + m]) return;
    std::size_t a = 0;
    for (int m = l; m >= 1; --m) a = (a << 1) | x[t - k - m];
    ++counts[a];
    hits[a] += x[t];
  });
  std::uint64_t all_hits = 0, all_counts = 0;
  for (std::size_t a = 0; a < buckets; ++a) {
    if (static_cast<double>(counts[a]) < 1e-4 * static_cast<double>(steps))
      throw Error(ErrorCode::conditioning_too_rare,
                  "suffix " + std::to_string(a) + " seen " + std::to_string(counts[a]) + " times");
    rep.by_suffix.push_back(proportion(hits[a], counts[a]));
    all_hits += hits[a];
    all_counts += counts[a];
  }
  rep.counts = counts;
  rep.base = proportion(all_hits, all_counts);
  for (std::size_t a = 0; a < buckets; ++a)
    for (std::size_t b = a + 1; b < buckets; ++b) {
      const auto& p = rep.by_suffix[a];
      const auto& q = rep.by_suffix[b];
      const double se = std::hypot(p.se, q.se);
      const double gap = std::abs(p.value - q.value);
      if (se > 0.0) rep.max_z = std::max(rep.max_z, gap / se);
      else if (gap > 0.0) rep.max_z = std::numeric_limits<double>::infinity();
    }
  rep.agree = rep.max_z <= 3.0;
  return rep;
}

nlohmann::ordered_json MemoryProfile::to_json() const {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t q = 0; q < s.size(); ++q)
    rows.push_back({{"s", s[q]},
                    {"disagreement", est_json(disagreement[q])},
                    {"signed_gap", est_json(signed_gap[q])}});
  nlohmann::ordered_json out{{"reps", reps}, {"profile", rows}, {"c_hat", c_hat},
                             {"dominated", dominated}, {"fit_points", fit_points}};
  out["log_slope"] = log_slope ? est_json(*log_slope) : nlohmann::ordered_json(nullptr);
  return out;
}

MemoryProfile loss_of_memory_profile(const ModelSpec& spec, NeuronId i, const std::vector<int>& s_grid,
                                     std::uint64_t reps, const CoordinateRng& src, bool parallel,
                                     Time horizon) {
  if (s_grid.empty()) throw Error(ErrorCode::malformed_spec, "empty s grid");
  if (!std::is_sorted(s_grid.begin(), s_grid.end()) || s_grid.front() < 2)
    throw Error(ErrorCode::malformed_spec, "s grid must be increasing and start at >= 2");
  if (i < 0 || i >= spec.neuron_count()) throw Error(ErrorCode::malformed_spec, "neuron out of range");
  const int s_max = s_grid.back();
  const std::size_t S = s_grid.size();
  std::vector<double> diff(reps * S), gap(reps * S);
  auto run = [&](std::uint64_t r) {
    const auto rs = src.derive(StreamTag::replica, r);
    ChainState a(spec, ArtificialPast::spike_at_zero);
    ChainState b(spec, ArtificialPast::silent_since, horizon);
    std::size_t q = 0;
    for (int t = 1; t <= s_max; ++t) {
      if (t == s_grid[q]) {
        const double d = a.spike_probability(spec, i) - b.spike_probability(spec, i);
        diff[r * S + q] = std::abs(d);
        gap[r * S + q] = d;
        ++q;
      }
      step(a, spec, rs);
      step(b, spec, rs);
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::uint64_t r = 0; r < reps; ++r) run(r);
  } else {
    for (std::uint64_t r = 0; r < reps; ++r) run(r);
  }
  MemoryProfile out;
  out.s = s_grid;
  out.reps = reps;
  std::vector<double> col(reps);
  for (std::size_t q = 0; q < S; ++q) {
    for (std::uint64_t r = 0; r < reps; ++r) col[r] = diff[r * S + q];
    out.disagreement.push_back(mean_and_se(col));
    for (std::uint64_t r = 0; r < reps; ++r) col[r] = gap[r * S + q];
    out.signed_gap.push_back(mean_and_se(col));
  }
  out.c_hat = out.disagreement[0].value * (s_grid[0] - 1);
  for (std::size_t q = 0; q < S; ++q)
    if (out.disagreement[q].value > out.c_hat / (s_grid[q] - 1) + 3.0 * out.disagreement[q].se)
      out.dominated = false;
  // Weighted least squares of log D(s) on s, var(log D) ≈ (se/D)².
  double sw = 0.0, sx = 0.0, sy = 0.0;
  std::vector<std::array<double, 3>> pts;
  for (std::size_t q = 0; q < S; ++q) {
    const auto& d = out.disagreement[q];
    if (!(d.value > 0.0) || d.se / d.value >= 0.25) continue;
    const double var = std::max(d.se * d.se / (d.value * d.value), 1e-8);
    pts.push_back({static_cast<double>(s_grid[q]), std::log(d.value), 1.0 / var});
  }
  out.fit_points = pts.size();
  if (pts.size() >= 3) {
    for (const auto& [x, y, w] : pts) {
      sw += w;
      sx += w * x;
      sy += w * y;
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y, w] : pts) {
      sxx += w * (x - mx) * (x - mx);
      sxy += w * (x - mx) * (y - my);
    }
    out.log_slope = Estimate{sxy / sxx, std::sqrt(1.0 / sxx)};
  }
  return out;
}

}  // namespace spikechain
