#include <doctest.h>

#include <cmath>

#include "spikechain/graph.hpp"

using namespace spikechain;

namespace {

// Smallest n ≤ k_max with (A^n)_{ii} > 0 by Boolean matrix powers.
int tau_by_matrix_powers(const SynapticGraph& g, NeuronId i, int k_max) {
  const int n = g.neurons();
  std::vector<std::vector<int>> A(n, std::vector<int>(n, 0)), P;
  for (const auto& [a, b] : g.edges()) A[a][b] = 1;
  P = A;
  for (int k = 1; k <= k_max; ++k) {
    if (P[i][i]) return k;
    std::vector<std::vector<int>> Q(n, std::vector<int>(n, 0));
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        if (P[a][c])
          for (int b = 0; b < n; ++b) Q[a][b] |= A[c][b];
    P = std::move(Q);
  }
  return kTauExceeds;
}

}  // namespace

TEST_CASE("edge probability and bounds") {
  CHECK(critical_edge_probability(100, 1.0) == doctest::Approx(0.0101).epsilon(1e-15));
  CHECK(critical_edge_probability(50, 0.0) == doctest::Approx(0.02));
  CHECK(tau_tail_bound(100, 1.0, 10) == doctest::Approx(0.09 * std::exp(0.1)).epsilon(1e-15));
  CHECK(tau_tail_bound(100, 1.0, 10) == doctest::Approx(0.09947).epsilon(1e-4));
  CHECK(tau_tail_bound(50, 0.0, 5) == doctest::Approx(0.08));
  CHECK(default_kN(50) == 7);
  CHECK(default_kN(100) == 10);
  CHECK(default_kN(99) == 9);
  CHECK(default_kN(2) == 1);
}

TEST_CASE("return times on small graphs") {
  const SynapticGraph two(2, 0.0, 0.5, {{0, 1}, {1, 0}});
  CHECK(return_time_tau(two, 0, 10) == 2);
  CHECK(return_time_tau(two, 0, 1) == kTauExceeds);
  const SynapticGraph ring(4, 0.0, 0.5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 0}});
  CHECK(return_time_tau(ring, 0, 10) == 2);
  CHECK(return_time_tau(ring, 2, 10) == 4);
  const SynapticGraph empty(5, 0.0, 0.1, {});
  CHECK(return_time_tau(empty, 0, 100) == kTauExceeds);
  CHECK(event_A(empty, 0, 2));
  CHECK_FALSE(event_A(two, 0, 1));
  CHECK(event_A(ring, 2, 1));
  CHECK_THROWS_AS(SynapticGraph(2, 0.0, 0.5, {{0, 0}}), Error);
  CHECK_THROWS_AS(SynapticGraph(2, 0.0, 0.5, {{0, 2}}), Error);
}

TEST_CASE("return times match Boolean matrix powers") {
  const CoordinateRng src(1);
  int finite = 0;
  for (std::uint64_t r = 0; r < 3000; ++r) {
    const int n = 2 + static_cast<int>(r % 7);
    // ϑ = 2N gives p ≈ 3/N, dense enough for short cycles.
    const auto g = sample_er_digraph(n, 2.0 * n, src, r);
    for (NeuronId i = 0; i < n; ++i) {
      const int t = return_time_tau(g, i, 12);
      CHECK(t == tau_by_matrix_powers(g, i, 12));
      finite += t != kTauExceeds;
    }
  }
  CHECK(finite > 1000);
}

TEST_CASE("graph sampling") {
  const CoordinateRng src(2);
  const auto a = sample_er_digraph(200, 1.0, src, 7);
  const auto b = sample_er_digraph(200, 1.0, src, 7);
  CHECK(a.edges() == b.edges());
  CHECK_FALSE(a.edges() == sample_er_digraph(200, 1.0, src, 8).edges());
  CHECK(a.p() == critical_edge_probability(200, 1.0));
  for (const auto& [x, y] : a.edges()) {
    CHECK(x != y);
    CHECK(a.has_edge(x, y));
  }
  // Total edge count over many graphs against the binomial mean.
  const double p = critical_edge_probability(200, 1.0);
  const double pairs = 200.0 * 199.0;
  double total = 0.0;
  const int graphs = 200;
  for (int r = 0; r < graphs; ++r) total += static_cast<double>(sample_er_digraph(200, 1.0, src, r).edge_count());
  const double mean = pairs * p * graphs, sd = std::sqrt(pairs * p * (1 - p) * graphs);
  CHECK(std::abs(total - mean) < 4.0 * sd);
  CHECK_THROWS_AS(sample_er_digraph(1, 0.0, src), Error);
  CHECK_THROWS_AS(sample_er_digraph(10, -1.0, src), Error);
}

TEST_CASE("every ordered pair is reachable by the sampler") {
  // p = 1 when ϑ = N(N−1): the complete digraph.
  const auto g = sample_er_digraph(6, 30.0, CoordinateRng(3), 0);
  CHECK(g.edge_count() == 30u);
}

TEST_CASE("serial and parallel tau samples agree") {
  const CoordinateRng src(4);
  CHECK(sample_tau(60, 1.0, 0, 20, 3000, src) == sample_tau_serial(60, 1.0, 0, 20, 3000, src));
}

TEST_CASE("tau tail stays under its bound") {
  for (int n : {50, 100})
    for (double theta : {0.0, 1.0}) {
      const int kN = default_kN(n);
      std::vector<int> ks;
      for (int k = 1; k <= kN; ++k) ks.push_back(k);
      const auto est = estimate_tau_cdf(n, theta, 0, ks, 4000, CoordinateRng(5));
      for (std::size_t a = 0; a < ks.size(); ++a) {
        const double se = std::max(est[a].se, 1.0 / 4000);
        CHECK(est[a].value <= tau_tail_bound(n, theta, ks[a]) + 3.0 * se);
      }
    }
}

TEST_CASE("graph model weights") {
  const SynapticGraph g(3, 0.0, 0.5, {{0, 1}, {2, 1}});
  PhiDescriptor phi;
  const auto spec = graph_model(g, 0.4, phi, AgingDescriptor{}, 0.7);
  CHECK(spec.weight(0, 1) == 0.7);
  CHECK(spec.weight(2, 1) == 0.7);
  CHECK(spec.weight(1, 0) == 0.0);
  CHECK(spec.delta() == 0.4);
}
