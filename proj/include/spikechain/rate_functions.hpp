#pragma once

#include <optional>
#include <string>

#include "spikechain/types.hpp"

namespace spikechain {

enum class PhiFamily { saturated_linear, sigmoid_floor };

// φ(s, n). Both families are nondecreasing and concave in s on [0, ∞) with
// floor δ. A refractory time constant τ > 0 multiplies the excess over δ by
// h(n) = 1 − e^{−n/τ}, making the rate depend on the age n = t − L.
struct PhiDescriptor {
  PhiFamily family = PhiFamily::saturated_linear;
  double delta = 0.5;
  double gamma = 0.1;  // slope for saturated_linear; ignored for sigmoid_floor
  double refractory_tau = 0.0;

  double base(double s) const;
  double operator()(double s, Time age) const;
  double lipschitz() const;
  bool age_dependent() const { return refractory_tau > 0.0; }

  friend bool operator==(const PhiDescriptor&, const PhiDescriptor&) = default;
};

enum class AgingFamily { constant_one, exponential, power_law, finite_support };

// g(n), n ≥ 1. Every family is nonincreasing in n.
struct AgingDescriptor {
  AgingFamily family = AgingFamily::constant_one;
  double scale = 1.0;     // C (exponential, power_law) or the value on the support
  double rate = 1.0;      // β for exponential
  double exponent = 2.0;  // p for power_law
  Time support = 1;       // M for finite_support

  double operator()(Time n) const;
  // Σ_{m=1}^{n} g(m)
  double cumulative(Time n) const;
  // T(a) = Σ_{n≥a} g(n), a ≥ 1; +inf when not summable.
  double tail(Time a) const;
  // Σ_{k≥K} (k+1) T(k), K ≥ 1; +inf when divergent.
  double weighted_tail(Time k) const;
  bool summable() const;
  std::optional<Time> support_length() const;

  friend bool operator==(const AgingDescriptor&, const AgingDescriptor&) = default;
};

const char* to_string(PhiFamily f);
const char* to_string(AgingFamily f);
PhiFamily phi_family_from_string(const std::string& s);
AgingFamily aging_family_from_string(const std::string& s);

}  // namespace spikechain
