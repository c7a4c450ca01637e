#include <doctest.h>

#include <cmath>

#include "spikechain/constants.hpp"
#include "spikechain/numeric.hpp"

using namespace spikechain;

namespace {

ModelSpec two_neuron_constant_g(double delta, double gamma) {
  PhiDescriptor phi;
  phi.gamma = gamma;
  return ModelSpec(2, delta, {0.0, 1.0, 1.0, 0.0}, {phi}, {AgingDescriptor{}});
}

AgingDescriptor exp_g(double c, double beta) {
  AgingDescriptor g;
  g.family = AgingFamily::exponential;
  g.scale = c;
  g.rate = beta;
  return g;
}

}  // namespace

TEST_CASE("rate functions") {
  PhiDescriptor lin{PhiFamily::saturated_linear, 0.3, 0.2, 0.0};
  CHECK(lin(0.0, 1) == doctest::Approx(0.3));
  CHECK(lin(1.0, 1) == doctest::Approx(0.5));
  CHECK(lin(100.0, 1) == 1.0);
  CHECK(lin(-5.0, 1) == doctest::Approx(0.3));
  CHECK(lin.lipschitz() == doctest::Approx(0.2));

  PhiDescriptor sig{PhiFamily::sigmoid_floor, 0.5, 0.0, 0.0};
  CHECK(sig(0.0, 7) == doctest::Approx(0.5));
  CHECK(1.0 - sig(3.0, 1) == doctest::Approx(0.024893534).epsilon(1e-8));
  CHECK(sig.lipschitz() == doctest::Approx(0.5));

  PhiDescriptor refr = lin;
  refr.refractory_tau = 2.0;
  CHECK(refr.age_dependent());
  // The excess over δ is scaled by 1 − e^{−n/τ}.
  CHECK(refr(1.0, 2) == doctest::Approx(0.3 + 0.2 * (1.0 - std::exp(-1.0))));
  CHECK(refr(0.0, 1) == doctest::Approx(0.3));
}

TEST_CASE("aging functions: cumulative sums") {
  CHECK(AgingDescriptor{}.cumulative(5) == 5.0);
  AgingDescriptor m1;
  m1.family = AgingFamily::finite_support;
  m1.support = 1;
  CHECK(m1.cumulative(7) == 1.0);
  CHECK(exp_g(1.0, std::log(2.0)).cumulative(3) == doctest::Approx(0.875));
}

TEST_CASE("aging functions: tails against brute-force sums") {
  AgingDescriptor p;
  p.family = AgingFamily::power_law;
  p.scale = 1.5;
  p.exponent = 5.5;
  for (auto g : {exp_g(2.0, 0.7), p}) {
    for (Time a : {1, 2, 5, 9}) {
      NeumaierSum t;
      for (Time n = a; n < 2000000; ++n) t.add(g(n));
      CHECK(g.tail(a) == doctest::Approx(t.value()).epsilon(1e-6));
    }
    for (Time K : {1, 3}) {
      NeumaierSum w;
      for (Time k = K; k < 20000; ++k) w.add((k + 1) * g.tail(k));
      CHECK(g.weighted_tail(K) == doctest::Approx(w.value()).epsilon(1e-4));
    }
  }
  AgingDescriptor f;
  f.family = AgingFamily::finite_support;
  f.support = 3;
  f.scale = 2.0;
  CHECK(f.tail(1) == 6.0);
  CHECK(f.tail(3) == 2.0);
  CHECK(f.tail(4) == 0.0);
  CHECK(f.weighted_tail(1) == doctest::Approx(2 * 6.0 + 3 * 4.0 + 4 * 2.0));
  CHECK(std::isinf(AgingDescriptor{}.tail(1)));
  CHECK_FALSE(AgingDescriptor{}.summable());
}

TEST_CASE("hurwitz zeta") {
  CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-12));
  CHECK(hurwitz_zeta(4.0, 1.0) == doctest::Approx(std::pow(M_PI, 4) / 90.0).epsilon(1e-12));
  CHECK(hurwitz_zeta(2.0, 3.0) == doctest::Approx(M_PI * M_PI / 6.0 - 1.0 - 0.25).epsilon(1e-12));
}

TEST_CASE("model validation errors") {
  PhiDescriptor phi;
  CHECK_THROWS_AS(ModelSpec(2, 0.5, {1.0, 0.0, 0.0, 0.0}, {phi}, {AgingDescriptor{}}), Error);
  CHECK_THROWS_AS(ModelSpec(2, 0.0, {0.0, 0.0, 0.0, 0.0}, {phi}, {AgingDescriptor{}}), Error);
  CHECK_THROWS_AS(ModelSpec(2, 0.5, {0.0, 0.0, 0.0}, {phi}, {AgingDescriptor{}}), Error);
  try {
    ModelSpec(2, 0.5, {0.0, 1.0, 1.0, 0.0}, {phi, phi, phi}, {AgingDescriptor{}});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_spec);
  }
}

TEST_CASE("neighborhoods by weight") {
  // inputs of neuron 0: 1 (0.2), 2 (0.5), 3 (0.5)
  std::vector<double> w(16, 0.0);
  w[1 * 4 + 0] = 0.2;
  w[2 * 4 + 0] = 0.5;
  w[3 * 4 + 0] = -0.5;
  PhiDescriptor phi;
  const ModelSpec spec(4, 0.5, w, {phi}, {AgingDescriptor{}});
  CHECK(spec.layer_of(0, 0) == 0);
  CHECK(spec.layer_of(0, 2) == 1);
  CHECK(spec.layer_of(0, 3) == 2);
  CHECK(spec.layer_of(0, 1) == 3);
  CHECK(spec.saturation_index(0) == 3);
  CHECK(spec.neighborhood_size(0, -1) == 0);
  CHECK(spec.neighborhood_size(0, 0) == 1);
  CHECK(spec.neighborhood_size(0, 2) == 3);
  CHECK(spec.residual_weight(0, 0) == doctest::Approx(1.2));
  CHECK(spec.residual_weight(0, 1) == doctest::Approx(0.7));
  CHECK(spec.residual_weight(0, 3) == 0.0);
  CHECK(spec.residual_weight(0, 10) == 0.0);
  CHECK(spec.layer_of(1, 0) == ModelSpec::kNotInNeighborhood);
  CHECK_FALSE(spec.attractive());
  CHECK(spec.summability_sup() == doctest::Approx(1.2));
  const auto in = spec.inputs(0);
  REQUIRE(in.size() == 3);
  CHECK(in[0].source == 2);
  CHECK(in[1].source == 3);
  CHECK(in[2].source == 1);
}

TEST_CASE("lattice shells group by L1 distance") {
  const auto spec = presets::lattice_window(1, 7, 2.0, 0.5, 0.1);
  // Centre neuron 3 sees 2 and 4 at distance 1, 1 and 5 at distance 2, ...
  CHECK(spec.layer_of(3, 2) == 1);
  CHECK(spec.layer_of(3, 4) == 1);
  CHECK(spec.layer_of(3, 1) == 2);
  CHECK(spec.layer_of(3, 0) == 3);
  CHECK(spec.neighborhood_size(3, 1) == 3);
  CHECK(spec.weight(2, 3) == doctest::Approx(1.0));
  CHECK(spec.weight(1, 3) == doctest::Approx(std::pow(2.0, -4.0)));
}

TEST_CASE("zero interaction constants") {
  const auto spec = presets::zero_interaction(3, 0.4);
  CHECK(c_gamma(spec) == 0.0);
  CHECK(e_delta(spec, 0.4) == 0.0);
  const auto report = validate_model(spec, 10);
  CHECK((report.regime == Regime::theorem1 || report.regime == Regime::both));
  CHECK(report.violations.empty());
  const auto ds = delta_star(spec);
  CHECK(ds.flag == DeltaStarFlag::below_range);
  CHECK(ds.value == 0.0);
}

TEST_CASE("delta one annihilates e") {
  CHECK(e_delta(two_neuron_constant_g(1.0, 0.1), 1.0) == 0.0);
}

TEST_CASE("G tables") {
  const auto spec = two_neuron_constant_g(0.5, 0.1);
  CHECK(G_cumulative(spec, 5) == 5.0);
  CHECK(G_envelope(spec, 5) == 5.0);
  CHECK(G_cumulative(presets::two_neuron_support1(0.5, 0.1, 1.0), 7) == 1.0);
}

TEST_CASE("e(delta) against an independent series evaluation") {
  // C_γ = 2·0.1·|V(1)|·1 = 0.4; E(G,δ) = 1 + Σ_{n≥2} q^{n−2} n³ (mpmath, 30 digits).
  const auto spec = two_neuron_constant_g(0.5, 0.1);
  CHECK(c_gamma(spec) == doctest::Approx(0.4).epsilon(1e-15));
  // The series is truncated once its remainder bound drops below 1e−10 of the sum.
  for (auto [delta, exact] : {std::pair{0.5, 20.6}, std::pair{0.9, 0.499625057155921230615}}) {
    const auto E = E_series(spec, delta);
    const double scale = c_gamma(spec) * (1.0 - delta);
    CHECK(e_delta(spec, delta) <= exact + 1e-15);
    CHECK(exact - e_delta(spec, delta) <= scale * E.truncation_error + 1e-15);
    CHECK(e_delta(spec, delta) == doctest::Approx(exact).epsilon(1e-9));
  }
  const auto ds = delta_star(spec);
  CHECK(ds.flag == DeltaStarFlag::crossing);
  CHECK(ds.value == doctest::Approx(0.840212694044763433965).epsilon(1e-8));
  CHECK(e_delta(spec, ds.value) <= 1.0 + 1e-9);
}

TEST_CASE("e(delta) example with a single dominating neuron") {
  // C_γ = 0.2, δ = 0.9: 0.2·0.1·(1 + Σ 0.1^{n−2} n³) = 0.24981252857796069...
  PhiDescriptor phi;
  phi.gamma = 0.05;
  // i=0 has one input of weight 1: C_γ = 2·0.05·2·1 = 0.2.
  const ModelSpec spec(2, 0.9, {0.0, 0.0, 1.0, 0.0}, {phi}, {AgingDescriptor{}});
  CHECK(c_gamma(spec) == doctest::Approx(0.2));
  CHECK(e_delta(spec, 0.9) == doctest::Approx(0.24981252857796069059).epsilon(1e-9));
}

TEST_CASE("mgf rho") {
  // Direct expectation over the step law: −1 with the leftover mass, k ≥ 0 with λ̄(k).
  for (auto [c, beta] : {std::pair{1.0, 5.0}, std::pair{2.0, 3.0}}) {
    const double x = std::exp(-beta);
    double lam_sum = c * x / (1.0 - x), mgf = c * x / (1.0 - x);
    for (int k = 1; k < 200; ++k) {
      const double lam = c * std::exp(-beta * k) / (1.0 - x);
      lam_sum += lam;
      mgf += lam * std::exp(static_cast<double>(k));
    }
    mgf += std::exp(-1.0) * (1.0 - lam_sum);
    const auto r = mgf_rho_formula(c, beta);
    CHECK(r.rho == doctest::Approx(mgf).epsilon(1e-12));
    CHECK(r.lambda_bar_sum == doctest::Approx(lam_sum).epsilon(1e-12));
  }
  CHECK(mgf_rho_formula(2.0, 3.0).rho == doctest::Approx(0.72299).epsilon(1e-4));
  CHECK(mgf_rho_formula(1.0, 60.0).rho == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(mgf_rho_formula(1.0, 0.5).below_beta_star);
  CHECK_THROWS_AS(mgf_rho(two_neuron_constant_g(0.5, 0.1), 2.0), Error);
  const auto spec = presets::exponential_memory(0.5, 1.0, 2.0, 3.0);
  CHECK(mgf_rho(spec, 3.0).c >= 2.0);
}

TEST_CASE("reproduction mean vs summable memory") {
  const auto spec = presets::exponential_memory(0.5, 0.5, 1.0, 2.0);
  const auto m = reproduction_mean(spec, 0);
  CHECK(m.exact);
  CHECK(m.value >= 0.0);
  // The exact mean never exceeds γ times the displayed-bound series.
  CHECK(m.value <= spec.gamma() * summable_memory_lhs(spec) + 1e-12);
}

TEST_CASE("model hash") {
  const auto a = presets::two_neuron_support1(0.5, 0.2, 1.0);
  const auto b = presets::two_neuron_support1(0.5, 0.2, 1.0);
  const auto c = presets::two_neuron_support1(0.5, 0.2, 0.9);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.with_delta(0.6).delta() == 0.6);
  CHECK(a.with_delta(0.6).phi(0).delta == 0.6);
}
