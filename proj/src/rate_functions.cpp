#include "spikechain/rate_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikechain/numeric.hpp"

namespace spikechain {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_spec: return "MalformedSpec";
    case ErrorCode::non_finite_constant: return "NonFiniteConstant";
    case ErrorCode::series_diverges: return "SeriesDiverges";
    case ErrorCode::regime_mismatch: return "RegimeMismatch";
    case ErrorCode::not_attractive: return "NotAttractive";
    case ErrorCode::residual_mass_too_large: return "ResidualMassTooLarge";
    case ErrorCode::zero_mass: return "ZeroMass";
    case ErrorCode::scan_cap_exceeded: return "ScanCapExceeded";
    case ErrorCode::budget_exceeded: return "BudgetExceeded";
    case ErrorCode::incomplete_clan: return "IncompleteClan";
    case ErrorCode::unbounded_memory: return "UnboundedMemory";
    case ErrorCode::state_space_too_large: return "StateSpaceTooLarge";
    case ErrorCode::degenerate: return "Degenerate";
    case ErrorCode::too_few_spikes: return "TooFewSpikes";
    case ErrorCode::conditioning_too_rare: return "ConditioningTooRare";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Error";
}

double PhiDescriptor::base(double s) const {
  const double x = std::max(s, 0.0);
  switch (family) {
    case PhiFamily::saturated_linear: return std::min(1.0, delta + gamma * x);
    case PhiFamily::sigmoid_floor: return delta + (1.0 - delta) * (-std::expm1(-x));
  }
  return delta;
}

double PhiDescriptor::operator()(double s, Time age) const {
  const double b = base(s);
  if (refractory_tau <= 0.0) return b;
  const double h = -std::expm1(-static_cast<double>(age) / refractory_tau);
  return delta + (b - delta) * h;
}

double PhiDescriptor::lipschitz() const {
  return family == PhiFamily::saturated_linear ? gamma : 1.0 - delta;
}

double AgingDescriptor::operator()(Time n) const {
  if (n < 1) return 0.0;
  switch (family) {
    case AgingFamily::constant_one: return 1.0;
    case AgingFamily::exponential: return scale * std::exp(-rate * static_cast<double>(n));
    case AgingFamily::power_law: return scale * std::pow(static_cast<double>(n), -exponent);
    case AgingFamily::finite_support: return n <= support ? scale : 0.0;
  }
  return 0.0;
}

double AgingDescriptor::cumulative(Time n) const {
  if (n < 1) return 0.0;
  switch (family) {
    case AgingFamily::constant_one: return static_cast<double>(n);
    case AgingFamily::exponential: {
      const double q = std::exp(-rate);
      return scale * q * (-std::expm1(-rate * static_cast<double>(n))) / (1.0 - q);
    }
    case AgingFamily::power_law: {
      NeumaierSum acc;
      for (Time m = 1; m <= n; ++m) acc.add(std::pow(static_cast<double>(m), -exponent));
      return scale * acc.value();
    }
    case AgingFamily::finite_support: return scale * static_cast<double>(std::min(n, support));
  }
  return 0.0;
}

double AgingDescriptor::tail(Time a) const {
  a = std::max<Time>(a, 1);
  switch (family) {
    case AgingFamily::constant_one: return std::numeric_limits<double>::infinity();
    case AgingFamily::exponential: {
      const double q = std::exp(-rate);
      return scale * std::exp(-rate * static_cast<double>(a)) / (1.0 - q);
    }
    case AgingFamily::power_law:
      if (exponent <= 1.0) return std::numeric_limits<double>::infinity();
      return scale * hurwitz_zeta(exponent, static_cast<double>(a));
    case AgingFamily::finite_support:
      return scale * static_cast<double>(std::max<Time>(0, support - a + 1));
  }
  return 0.0;
}

double AgingDescriptor::weighted_tail(Time k) const {
  k = std::max<Time>(k, 1);
  switch (family) {
    case AgingFamily::constant_one: return std::numeric_limits<double>::infinity();
    case AgingFamily::exponential: {
      const double x = std::exp(-rate);
      const double kk = static_cast<double>(k);
      return scale / (1.0 - x) * std::exp(-rate * kk) *
             ((kk + 1.0) / (1.0 - x) + x / ((1.0 - x) * (1.0 - x)));
    }
    case AgingFamily::power_law: {
      if (exponent <= 3.0) return std::numeric_limits<double>::infinity();
      // Direct terms, then the integral of (k+1) k^{1−p}/(p−1) for the remainder.
      constexpr Time kDirect = 4000;
      NeumaierSum acc;
      for (Time m = k; m < k + kDirect; ++m)
        acc.add(static_cast<double>(m + 1) * tail(m));
      const double a = static_cast<double>(k + kDirect) - 0.5;
      const double p = exponent;
      acc.add(scale / (p - 1.0) * (std::pow(a, 3.0 - p) / (p - 3.0) + std::pow(a, 2.0 - p) / (p - 2.0)));
      return acc.value();
    }
    case AgingFamily::finite_support: {
      NeumaierSum acc;
      for (Time m = k; m <= support; ++m) acc.add(static_cast<double>(m + 1) * tail(m));
      return acc.value();
    }
  }
  return 0.0;
}

bool AgingDescriptor::summable() const {
  switch (family) {
    case AgingFamily::constant_one: return false;
    case AgingFamily::power_law: return exponent > 1.0;
    default: return true;
  }
}

std::optional<Time> AgingDescriptor::support_length() const {
  if (family == AgingFamily::finite_support) return support;
  return std::nullopt;
}

const char* to_string(PhiFamily f) {
  return f == PhiFamily::saturated_linear ? "saturated_linear" : "sigmoid_floor";
}

const char* to_string(AgingFamily f) {
  switch (f) {
    case AgingFamily::constant_one: return "constant_one";
    case AgingFamily::exponential: return "exponential";
    case AgingFamily::power_law: return "power_law";
    case AgingFamily::finite_support: return "finite_support";
  }
  return "?";
}

PhiFamily phi_family_from_string(const std::string& s) {
  if (s == "saturated_linear") return PhiFamily::saturated_linear;
  if (s == "sigmoid_floor") return PhiFamily::sigmoid_floor;
  throw Error(ErrorCode::config_error, "phi.family: unknown family '" + s + "'");
}

AgingFamily aging_family_from_string(const std::string& s) {
  if (s == "constant_one") return AgingFamily::constant_one;
  if (s == "exponential") return AgingFamily::exponential;
  if (s == "power_law") return AgingFamily::power_law;
  if (s == "finite_support") return AgingFamily::finite_support;
  throw Error(ErrorCode::config_error, "g.family: unknown family '" + s + "'");
}

}  // namespace spikechain
