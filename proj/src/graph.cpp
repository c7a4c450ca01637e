#include "spikechain/graph.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace spikechain {

SynapticGraph::SynapticGraph(int n, double theta, double p,
                             std::vector<std::pair<NeuronId, NeuronId>> edges, std::uint64_t seed)
    : n_(n), theta_(theta), p_(p), seed_(seed) {
  if (n < 1) throw Error(ErrorCode::malformed_spec, "graph needs at least one neuron");
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  offsets_.assign(n + 1, 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw Error(ErrorCode::malformed_spec, "edge endpoint out of range");
    if (a == b) throw Error(ErrorCode::malformed_spec, "self-loop on neuron " + std::to_string(a));
    ++offsets_[a + 1];
  }
  for (int i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  targets_.reserve(edges.size());
  for (const auto& e : edges) targets_.push_back(e.second);
}

bool SynapticGraph::has_edge(NeuronId from, NeuronId to) const {
  const auto row = out(from);
  return std::binary_search(row.begin(), row.end(), to);
}

std::vector<std::pair<NeuronId, NeuronId>> SynapticGraph::edges() const {
  std::vector<std::pair<NeuronId, NeuronId>> out_edges;
  out_edges.reserve(targets_.size());
  for (int i = 0; i < n_; ++i)
    for (NeuronId j : out(i)) out_edges.emplace_back(i, j);
  return out_edges;
}

double critical_edge_probability(int n, double theta) {
  return (1.0 + theta / n) / n;
}

SynapticGraph sample_er_digraph(int n, double theta, const CoordinateRng& src, std::uint64_t index) {
  if (n < 2) throw Error(ErrorCode::malformed_spec, "graph needs N >= 2");
  if (!(theta >= 0.0)) throw Error(ErrorCode::malformed_spec, "theta must be >= 0");
  const double p = critical_edge_probability(n, theta);
  const auto derived = src.derive(StreamTag::graph, index);
  PhiloxEngine eng(derived.seed(), static_cast<std::uint64_t>(StreamTag::graph));
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1);
  std::vector<std::pair<NeuronId, NeuronId>> edges;
  auto add = [&](std::uint64_t m) {
    const auto a = static_cast<NeuronId>(m / (n - 1));
    auto b = static_cast<NeuronId>(m % (n - 1));
    if (b >= a) ++b;
    edges.emplace_back(a, b);
  };
  if (p >= 1.0) {
    for (std::uint64_t m = 0; m < pairs; ++m) add(m);
  } else {
    // Geometric skips between successive present pairs.
    const double log_q = std::log1p(-p);
    std::uint64_t m = 0;
    for (;;) {
      const double u = 1.0 - eng.uniform();  // (0, 1]
      const double skip = std::floor(std::log(u) / log_q);
      if (skip >= static_cast<double>(pairs - m)) break;
      m += static_cast<std::uint64_t>(skip);
      add(m);
      if (++m >= pairs) break;
    }
  }
  return SynapticGraph(n, theta, p, std::move(edges), derived.seed());
}

int return_time_tau(const SynapticGraph& g, NeuronId i, int k_max) {
  if (k_max < 1) throw Error(ErrorCode::malformed_spec, "k_max must be >= 1");
  const int n = g.neurons();
  std::vector<std::uint8_t> next(n, 0);
  std::vector<NeuronId> frontier(g.out(i).begin(), g.out(i).end());
  for (int step = 1; step <= k_max; ++step) {
    if (frontier.empty()) return kTauExceeds;
    if (std::find(frontier.begin(), frontier.end(), i) != frontier.end()) return step;
    std::vector<NeuronId> grown;
    for (NeuronId j : frontier)
      for (NeuronId l : g.out(j))
        if (!next[l]) {
          next[l] = 1;
          grown.push_back(l);
        }
    for (NeuronId l : grown) next[l] = 0;
    frontier = std::move(grown);
  }
  return kTauExceeds;
}

double tau_tail_bound(int n, double theta, int k) {
  if (k < 1) throw Error(ErrorCode::malformed_spec, "k must be >= 1");
  return (k - 1.0) / n * std::exp(theta * k / n);
}

bool event_A(const SynapticGraph& g, NeuronId i, int kN) {
  return return_time_tau(g, i, 2 * kN) == kTauExceeds;
}

std::vector<int> sample_tau(int n, double theta, NeuronId i, int k_max, std::uint64_t reps,
                            const CoordinateRng& src) {
  std::vector<int> out(reps);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::uint64_t r = 0; r < reps; ++r)
    out[r] = return_time_tau(sample_er_digraph(n, theta, src, r), i, k_max);
  return out;
}

std::vector<int> sample_tau_serial(int n, double theta, NeuronId i, int k_max, std::uint64_t reps,
                                   const CoordinateRng& src) {
  std::vector<int> out(reps);
  for (std::uint64_t r = 0; r < reps; ++r)
    out[r] = return_time_tau(sample_er_digraph(n, theta, src, r), i, k_max);
  return out;
}

std::vector<Estimate> estimate_tau_cdf(int n, double theta, NeuronId i, const std::vector<int>& ks,
                                       std::uint64_t reps, const CoordinateRng& src) {
  if (ks.empty()) return {};
  const int k_max = *std::max_element(ks.begin(), ks.end());
  const auto taus = sample_tau(n, theta, i, std::max(k_max, 1), reps, src);
  std::vector<Estimate> out;
  for (int k : ks) {
    const auto hits = static_cast<std::uint64_t>(
        std::count_if(taus.begin(), taus.end(), [k](int tau) { return tau <= k; }));
    out.push_back(proportion(hits, reps));
  }
  return out;
}

Estimate estimate_tau_cdf(int n, double theta, int k, std::uint64_t reps, const CoordinateRng& src) {
  return estimate_tau_cdf(n, theta, 0, std::vector<int>{k}, reps, src).front();
}

ModelSpec graph_model(const SynapticGraph& g, double delta, const PhiDescriptor& phi,
                      const AgingDescriptor& aging, double weight) {
  const int n = g.neurons();
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& [a, b] : g.edges()) w[static_cast<std::size_t>(a) * n + b] = weight;
  return ModelSpec(n, delta, std::move(w), {phi}, {aging});
}

}  // namespace spikechain
