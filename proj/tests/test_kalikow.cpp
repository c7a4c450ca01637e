#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "spikechain/kalikow.hpp"

using namespace spikechain;

namespace {

// Compatible histories on [R, t−1]: x ≥ ξ everywhere.
struct Instance {
  ModelSpec spec;
  SiteTimeContext ctx;
};

std::vector<std::vector<std::uint8_t>> compatible_histories(const SiteTimeContext& ctx) {
  const std::size_t cells = ctx.xi.size();
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < cells; ++c)
    if (!ctx.xi[c]) free.push_back(c);
  std::vector<std::vector<std::uint8_t>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << free.size()); ++mask) {
    auto x = ctx.xi;
    for (std::size_t b = 0; b < free.size(); ++b)
      if ((mask >> b) & 1u) x[free[b]] = 1;
    out.push_back(std::move(x));
  }
  return out;
}

HistoryFn as_history(const SiteTimeContext& ctx, const std::vector<std::uint8_t>& x) {
  return [&ctx, &x](NeuronId j, Time s) {
    return static_cast<int>(x[static_cast<std::size_t>(j) * ctx.age_since_xi() + (s - ctx.last_xi)]);
  };
}

Instance random_instance(std::mt19937_64& rng, bool finite_g) {
  std::uniform_int_distribution<int> n_dist(2, 3), age_dist(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = n_dist(rng);
  std::vector<double> w(n * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && u(rng) < 0.8) w[a * n + b] = 0.2 + u(rng);
  PhiDescriptor phi;
  phi.family = u(rng) < 0.5 ? PhiFamily::saturated_linear : PhiFamily::sigmoid_floor;
  phi.gamma = 0.1 + 0.3 * u(rng);
  AgingDescriptor g;
  if (finite_g) {
    g.family = AgingFamily::finite_support;
    g.support = 1 + static_cast<Time>(u(rng) * 2.0);
  }
  const double delta = 0.2 + 0.6 * u(rng);
  ModelSpec spec(n, delta, w, {phi}, {g});
  const int age = age_dist(rng);
  const Time t = 10, R = t - age;
  std::vector<std::uint8_t> xi(static_cast<std::size_t>(n) * age, 0);
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < age; ++s) xi[j * age + s] = j == 0 ? (s == 0) : (u(rng) < delta);
  auto ctx = make_context(spec, 0, t, R, xi);
  return {std::move(spec), std::move(ctx)};
}

}  // namespace

TEST_CASE("closed-form r^[-1] and lambda(-1) on the sigmoid example") {
  // One presynaptic edge w=1, g≡1, ξ_{t−1}(j)=0, t−R=3, δ=0.5.
  PhiDescriptor phi{PhiFamily::sigmoid_floor, 0.5, 0.0, 0.0};
  const ModelSpec spec(2, 0.5, {0.0, 0.0, 1.0, 0.0}, {phi}, {AgingDescriptor{}});
  const auto ctx = make_context(spec, 0, 0, -3, {1, 0, 0, 0, 0, 0});
  const auto r = SiteTimeKernel(ctx, spec).r_minus1();
  CHECK(r.one == doctest::Approx(0.5));
  CHECK(r.zero == doctest::Approx(0.024893534183931972).epsilon(1e-12));
  const auto w = lambda_weights(ctx, spec);
  CHECK(w.lambda_at(-1) == doctest::Approx(0.524893534183931972).epsilon(1e-12));
}

TEST_CASE("zero interaction puts all mass on range -1") {
  const auto spec = presets::zero_interaction(3, 0.3);
  const auto ctx = make_context(spec, 1, 5, 2, std::vector<std::uint8_t>{0, 0, 0, 1, 0, 0, 1, 1, 0});
  const auto w = lambda_weights(ctx, spec);
  CHECK(w.lambda_at(-1) == 1.0);
  for (int k = 0; k <= w.k_max; ++k) CHECK(w.lambda_at(k) == 0.0);
  CHECK(w.r_minus1.one == doctest::Approx(0.3));
  CHECK(w.r_minus1.zero == doctest::Approx(0.7));
  const std::vector<std::uint8_t> x = ctx.xi;
  CHECK(reconstruct_transition(ctx, spec, as_history(ctx, x)) == 0.0);
}

TEST_CASE("lambda bar plug-in values") {
  PhiDescriptor phi;
  phi.gamma = 0.1;
  std::vector<double> w(9, 0.0);
  w[1 * 3 + 0] = 1.0;
  w[2 * 3 + 0] = 0.5;
  const ModelSpec spec(3, 0.5, w, {phi}, {AgingDescriptor{}});
  std::vector<std::uint8_t> xi(6, 0);
  xi[0] = 1;
  const auto ctx = make_context(spec, 0, 2, 0, xi);
  CHECK(lambda_bar(ctx, spec, 2) == doctest::Approx(0.1 * 2 * 0.5));
  CHECK(lambda_bar(ctx, spec, 1) == doctest::Approx(0.1 * 2 * 1.5));
  // Dominated thresholds never exceed the exact ones.
  const auto ex = lambda_weights(ctx, spec, std::nullopt, MassMode::exact);
  const auto dom = lambda_weights(ctx, spec, std::nullopt, MassMode::dominated);
  for (int k = -1; k <= ex.k_max; ++k) CHECK(dom.alpha_at(k) <= ex.alpha_at(k) + 1e-15);
  for (int k = 1; k <= ex.k_max; ++k) CHECK(ex.lambda_at(k) <= lambda_bar(ctx, spec, k) + 1e-12);
}

TEST_CASE("make_context checks the spontaneous field") {
  const auto spec = presets::zero_interaction(2, 0.5);
  CHECK_THROWS_AS(make_context(spec, 0, 2, 0, {0, 0, 0, 0}), Error);
  CHECK_THROWS_AS(make_context(spec, 0, 2, 0, {1, 1, 0, 0}), Error);
  CHECK_THROWS_AS(make_context(spec, 0, 2, 0, {1, 0, 0}), Error);
}

TEST_CASE("r bounds equal brute-force infima over compatible histories") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 40; ++rep) {
    const auto inst = random_instance(rng, rep % 2 == 0);
    const auto& ctx = inst.ctx;
    const auto& spec = inst.spec;
    const SiteTimeKernel kernel(ctx, spec);
    const auto xs = compatible_histories(ctx);
    std::vector<double> p(xs.size());
    for (std::size_t a = 0; a < xs.size(); ++a) p[a] = kernel.transition(as_history(ctx, xs[a]));
    const int age = static_cast<int>(ctx.age_since_xi());
    auto agree = [&](const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& z, int k) {
      const Time L = kernel.last_spike(as_history(ctx, x));
      for (int j = 0; j < ctx.neurons; ++j) {
        if (spec.layer_of(0, j) > k) continue;
        for (Time s = L; s < ctx.time; ++s)
          if (x[j * age + (s - ctx.last_xi)] != z[j * age + (s - ctx.last_xi)]) return false;
      }
      return true;
    };
    // r^[−1]: infimum over everything.
    const auto rm = kernel.r_minus1();
    CHECK(rm.one == doctest::Approx(*std::min_element(p.begin(), p.end())).epsilon(1e-12));
    CHECK(rm.zero == doctest::Approx(1.0 - *std::max_element(p.begin(), p.end())).epsilon(1e-12));
    const auto w = kernel.weights(MassMode::exact);
    CHECK(w.alpha_at(-1) == doctest::Approx(rm.one + rm.zero).epsilon(1e-12));
    for (int k = 0; k <= spec.saturation_index(0); ++k) {
      double inf_sum = 2.0;
      for (std::size_t a = 0; a < xs.size(); ++a) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t b = 0; b < xs.size(); ++b)
          if (agree(xs[a], xs[b], k)) {
            lo = std::min(lo, p[b]);
            hi = std::max(hi, p[b]);
          }
        const auto r = kernel.r_bounds(k, as_history(ctx, xs[a]));
        CHECK(r.one == doctest::Approx(lo).epsilon(1e-12));
        CHECK(r.zero == doctest::Approx(1.0 - hi).epsilon(1e-12));
        inf_sum = std::min(inf_sum, lo + 1.0 - hi);
      }
      // Exact thresholds: α(k) = inf_x r^[k](1|x) + r^[k](0|x), made nondecreasing.
      double expected = inf_sum;
      for (int q = -1; q < k; ++q) expected = std::max(expected, w.alpha_at(q));
      CHECK(w.alpha_at(k) == doctest::Approx(std::min(1.0, expected)).epsilon(1e-12));
    }
  }
}

TEST_CASE("reconstruction and normalization on random attractive instances") {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = random_instance(rng, rep % 2 == 1);
    const auto xs = compatible_histories(inst.ctx);
    const auto w = lambda_weights(inst.ctx, inst.spec);
    double total = 0.0;
    for (int k = -1; k <= w.k_max; ++k) {
      CHECK(w.lambda_at(k) >= 0.0);
      total += w.lambda_at(k);
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (const auto& x : xs) worst = std::max(worst, reconstruct_transition(inst.ctx, inst.spec, as_history(inst.ctx, x)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("p^[k] is local to V(k) x [L, t-1]") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = random_instance(rng, false);
    const auto& ctx = inst.ctx;
    const SiteTimeKernel kernel(ctx, inst.spec);
    const auto w = kernel.weights(MassMode::exact);
    const auto xs = compatible_histories(ctx);
    const int age = static_cast<int>(ctx.age_since_xi());
    for (int k = 0; k <= w.k_max; ++k) {
      if (!(w.lambda_at(k) > 0.0)) continue;
      for (const auto& x : xs) {
        const auto base = kernel.p_k(w, k, as_history(ctx, x));
        const Time L = kernel.last_spike(as_history(ctx, x));
        // Flip every cell outside the local window (keeping compatibility).
        auto z = x;
        for (int j = 0; j < ctx.neurons; ++j)
          for (Time s = ctx.last_xi; s < ctx.time; ++s) {
            const bool local = inst.spec.layer_of(0, j) <= k && s >= L;
            const auto c = static_cast<std::size_t>(j * age + (s - ctx.last_xi));
            if (!local && !ctx.xi[c] && j != 0) z[c] ^= 1;
          }
        const auto moved = kernel.p_k(w, k, as_history(ctx, z));
        CHECK(moved.one == base.one);
      }
    }
  }
}

TEST_CASE("dominated mode also reconstructs exactly") {
  // Signed weights: inhibitory edge 2→0.
  PhiDescriptor phi;
  phi.gamma = 0.2;
  std::vector<double> w(9, 0.0);
  w[1 * 3 + 0] = 1.0;
  w[2 * 3 + 0] = -0.7;
  w[0 * 3 + 1] = 0.4;
  AgingDescriptor g;
  g.family = AgingFamily::finite_support;
  g.support = 2;
  const ModelSpec spec(3, 0.4, w, {phi}, {g});
  std::vector<std::uint8_t> xi(9, 0);
  xi[0] = 1;
  xi[3 + 1] = 1;
  const auto ctx = make_context(spec, 0, 3, 0, xi);
  CHECK_THROWS_AS(lambda_weights(ctx, spec, std::nullopt, MassMode::exact), Error);
  for (const auto& x : compatible_histories(ctx))
    CHECK(reconstruct_transition(ctx, spec, as_history(ctx, x), MassMode::dominated) < 1e-9);
}

TEST_CASE("overlap kernel single-block case") {
  // Straddle covers exactly one configuration block: p^[k] = Δ^[k] / λ̃(k).
  const std::vector<double> thresholds{0.4, 0.7, 1.0};
  const std::vector<double> alpha_x{0.4, 0.7, 1.0};
  const std::vector<double> spike{0.1, 0.12, 0.09};
  CHECK(overlap_kernel(thresholds, 1, alpha_x, spike) == doctest::Approx(0.09 / 0.3));
  CHECK(overlap_kernel(thresholds, 0, alpha_x, spike) == doctest::Approx(0.12 / 0.3));
}
