#include "spikechain/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikechain/kalikow.hpp"
#include "spikechain/numeric.hpp"

namespace spikechain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelativeTail = 1e-10;
constexpr double kOverflowGuard = 1e300;

std::vector<AgingDescriptor> distinct_aging(const ModelSpec& spec) {
  std::vector<AgingDescriptor> out;
  for (int i = 0; i < spec.neuron_count(); ++i) {
    const auto& a = spec.aging(i);
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  return out;
}

// E(G,δ). With `stop_above` finite, returns early once the partial sum
// exceeds it (enough to decide e(δ) > 1 during bisection).
SeriesValue E_series_impl(const ModelSpec& spec, double delta, double stop_above) {
  const auto gs = distinct_aging(spec);
  std::vector<double> cum(gs.size(), 0.0);
  auto advance = [&](Time n) {
    double best = 0.0;
    for (std::size_t d = 0; d < gs.size(); ++d) {
      cum[d] += gs[d](n);
      best = std::max(best, cum[d]);
    }
    return best;
  };
  const double q = 1.0 - delta;
  NeumaierSum acc;
  acc.add(advance(1));
  double qpow = 1.0;  // q^{n−2}
  SeriesValue out;
  for (Time n = 2;; ++n) {
    const double G = advance(n);
    const double nn = static_cast<double>(n);
    acc.add(qpow * nn * nn * G);
    const double partial = acc.value();
    if (!std::isfinite(partial) || partial > kOverflowGuard)
      throw Error(ErrorCode::series_diverges, "E(G,delta) exceeded the overflow guard");
    if (partial > stop_above) {
      out.value = partial;
      out.terms = n;
      return out;
    }
    // G(m) ≤ G(n) m / n for m ≥ n since every g is nonincreasing, so the
    // remainder is at most G(n)/n Σ_{m>n} q^{m−2} m³.
    double bound = 0.0;
    if (q > 0.0 && G > 0.0) {
      const double ratio = q * std::pow((nn + 2.0) / (nn + 1.0), 3.0);
      if (ratio < 1.0) bound = G / nn * qpow * q * std::pow(nn + 1.0, 3.0) / (1.0 - ratio);
      else bound = kInf;
    }
    if (bound <= kRelativeTail * partial || bound == 0.0) {
      out.value = partial;
      out.truncation_error = bound;
      out.terms = n;
      return out;
    }
    qpow *= q;
  }
}

// Upper-bound terms b_i(k) with λ_i(k) ≤ γ b_i(k).
double displayed_bound(const ModelSpec& spec, NeuronId i, int k) {
  NeumaierSum acc;
  for (const auto& e : spec.inputs(i)) {
    const auto& g = spec.aging(e.source);
    if (e.layer > k - 1) acc.add(std::abs(e.weight) * g.tail(1));
    else acc.add(std::abs(e.weight) * g.tail(std::max(k, 1)));
  }
  return acc.value();
}

double lhs_for(const ModelSpec& spec, NeuronId i) {
  const int K = spec.saturation_index(i);
  NeumaierSum acc;
  for (int k = 0; k <= K; ++k)
    acc.add(static_cast<double>(k + 1) * static_cast<double>(spec.neighborhood_size(i, k)) *
            displayed_bound(spec, i, k));
  const double vsat = static_cast<double>(spec.neighborhood_size(i, K));
  for (const auto& e : spec.inputs(i))
    acc.add(vsat * std::abs(e.weight) * spec.aging(e.source).weighted_tail(K + 1));
  return acc.value();
}

void check_theorem2(const ModelSpec& spec) {
  if (!spec.age_independent())
    throw Error(ErrorCode::regime_mismatch, "rate function depends on the age");
  if (!spec.all_summable()) throw Error(ErrorCode::regime_mismatch, "aging function is not summable");
}

}  // namespace

double G_cumulative(const ModelSpec& spec, Time n) {
  double best = 0.0;
  for (const auto& g : distinct_aging(spec)) best = std::max(best, g.cumulative(n));
  return best;
}

double G_envelope(const ModelSpec& spec, Time n) {
  const auto gs = distinct_aging(spec);
  NeumaierSum acc;
  for (Time m = 1; m <= n; ++m) {
    double best = 0.0;
    for (const auto& g : gs) best = std::max(best, g(m));
    acc.add(best);
  }
  return acc.value();
}

double c_gamma(const ModelSpec& spec) {
  double best = 0.0;
  for (int j = 0; j < spec.neuron_count(); ++j) {
    NeumaierSum acc;
    for (int k = 1; k <= spec.saturation_index(j); ++k)
      acc.add(static_cast<double>(spec.neighborhood_size(j, k)) * spec.residual_weight(j, k - 1));
    best = std::max(best, acc.value());
  }
  return 2.0 * spec.gamma() * best;
}

SeriesValue E_series(const ModelSpec& spec, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::malformed_spec, "delta outside (0,1]");
  return E_series_impl(spec, delta, kInf);
}

double e_delta(const ModelSpec& spec, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::malformed_spec, "delta outside (0,1]");
  const double cg = c_gamma(spec);
  if (cg == 0.0 || delta == 1.0) return 0.0;
  return cg * (1.0 - delta) * E_series_impl(spec, delta, kInf).value;
}

DeltaStar delta_star(const ModelSpec& spec, double tol) {
  constexpr double kLo = 1e-6, kHi = 1.0 - 1e-6;
  const double cg = c_gamma(spec);
  auto exceeds_one = [&](double d) {
    if (cg == 0.0) return false;
    const double scale = cg * (1.0 - d);
    try {
      return scale * E_series_impl(spec, d, 1.0 / scale).value > 1.0;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::series_diverges) return true;
      throw;
    }
  };
  if (!exceeds_one(kLo)) return {0.0, DeltaStarFlag::below_range};
  if (exceeds_one(kHi)) return {kHi, DeltaStarFlag::above_range};
  double lo = kLo, hi = kHi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (exceeds_one(mid)) lo = mid;
    else hi = mid;
  }
  return {hi, DeltaStarFlag::crossing};
}

ReproductionMean reproduction_mean(const ModelSpec& spec, NeuronId i) {
  check_theorem2(spec);
  ReproductionMean out;
  if (spec.attractive()) {
    const auto w = spacetime_weights(spec, i, MassMode::exact);
    NeumaierSum acc;
    for (int k = 0; k <= w.k_max; ++k)
      acc.add(static_cast<double>(k + 1) * static_cast<double>(spec.neighborhood_size(i, k)) *
              w.lambda_at(k));
    const int K = spec.saturation_index(i);
    double tail = 0.0;
    for (const auto& e : spec.inputs(i))
      tail += e.weight * spec.aging(e.source).weighted_tail(w.k_max + 2);
    out.value = acc.value();
    out.exact = true;
    out.truncation_error =
        spec.phi(i).lipschitz() * static_cast<double>(spec.neighborhood_size(i, K)) * tail;
    return out;
  }
  out.value = spec.phi(i).lipschitz() * lhs_for(spec, i);
  out.exact = false;
  return out;
}

double summable_memory_lhs(const ModelSpec& spec) {
  double best = 0.0;
  for (int i = 0; i < spec.neuron_count(); ++i) best = std::max(best, lhs_for(spec, i));
  return best;
}

std::vector<double> fast_decay_partial_sums(const ModelSpec& spec, int k_max) {
  std::vector<double> out(std::max(k_max, 0), 0.0);
  for (int i = 0; i < spec.neuron_count(); ++i) {
    double acc = 0.0;
    for (int k = 1; k <= k_max; ++k) {
      acc += static_cast<double>(spec.neighborhood_size(i, k)) * spec.residual_weight(i, k - 1);
      out[k - 1] = std::max(out[k - 1], acc);
    }
  }
  return out;
}

double lattice_fast_decay_majorant(int dim, double alpha) {
  if (dim < 1 || dim > 2 || !(alpha > 1.0)) throw Error(ErrorCode::malformed_spec, "lattice majorant");
  constexpr int kTerms = 20000;
  NeumaierSum acc;
  for (int k = 1; k <= kTerms; ++k) {
    const double kk = k;
    const double ball = dim == 1 ? 2.0 * kk + 1.0 : 2.0 * kk * kk + 2.0 * kk + 1.0;
    const double shells = dim == 1 ? 2.0 * hurwitz_zeta(2.0 + alpha, kk)
                                   : 4.0 * hurwitz_zeta(3.0 + alpha, kk);
    acc.add(ball * shells);
  }
  // Remainder ~ c k^{−α}; integrate from kTerms + 1/2 with a 5% margin.
  const double c = dim == 1 ? 4.0 / (1.0 + alpha) : 8.0 / (2.0 + alpha);
  acc.add(1.05 * c * std::pow(kTerms + 0.5, 1.0 - alpha) / (alpha - 1.0));
  return acc.value();
}

MgfRho mgf_rho_formula(double c, double beta) {
  MgfRho out;
  out.c = c;
  out.beta = beta;
  const double x = std::exp(-beta);
  out.lambda_bar_sum = c / (1.0 - x) * (x + x / (1.0 - x));
  if (!(beta > 1.0)) {
    out.rho = kInf;
    out.below_beta_star = true;
    return out;
  }
  const double y = std::exp(1.0 - beta);
  out.rho = std::exp(-1.0) * (1.0 - out.lambda_bar_sum) + c * x / (1.0 - x) +
            c / (1.0 - x) * y / (1.0 - y);
  out.below_beta_star = out.rho >= 1.0 || out.lambda_bar_sum > 1.0;
  return out;
}

MgfRho mgf_rho(const ModelSpec& spec, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::malformed_spec, "beta must be positive");
  double c = 0.0;
  for (int j = 0; j < spec.neuron_count(); ++j) {
    const auto& g = spec.aging(j);
    switch (g.family) {
      case AgingFamily::exponential:
        if (beta > g.rate * (1.0 + 1e-15))
          throw Error(ErrorCode::regime_mismatch, "beta exceeds the decay rate of g");
        c = std::max(c, g.scale * std::exp(beta - g.rate));
        break;
      case AgingFamily::finite_support:
        c = std::max(c, g.scale * std::exp(beta * static_cast<double>(g.support)));
        break;
      default:
        throw Error(ErrorCode::regime_mismatch, "g is not exponentially bounded");
    }
  }
  for (int i = 0; i < spec.neuron_count(); ++i)
    for (int n = 0; n <= spec.saturation_index(i); ++n)
      c = std::max(c, std::exp(beta * n) * spec.residual_weight(i, n));
  return mgf_rho_formula(c, beta);
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::theorem1: return "theorem1";
    case Regime::theorem2: return "theorem2";
    case Regime::both: return "both";
    case Regime::neither: return "neither";
  }
  return "?";
}

namespace {

nlohmann::ordered_json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

const char* to_string(DeltaStarFlag f) {
  switch (f) {
    case DeltaStarFlag::crossing: return "crossing";
    case DeltaStarFlag::below_range: return "not found above 1e-6 (e < 1 on the whole range)";
    case DeltaStarFlag::above_range: return "not found below 1";
  }
  return "?";
}

}  // namespace

nlohmann::ordered_json ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["summability_sup"] = summability_sup;
  j["G_table"] = G_table;
  j["C_gamma"] = C_gamma;
  j["E_G_delta"] = number_or_inf(E_G_delta);
  j["E_truncation_error"] = E_truncation_error;
  j["e_delta"] = number_or_inf(e_delta);
  j["delta_star"] = {{"value", delta_star.value}, {"flag", to_string(delta_star.flag)}};
  j["m_sup"] = number_or_inf(m_sup);
  j["m_exact"] = m_exact;
  j["summable_memory_lhs"] = number_or_inf(summable_memory_lhs);
  j["regime"] = to_string(regime);
  j["violations"] = violations;
  return j;
}

ValidationReport validate_model(const ModelSpec& spec, Time horizon) {
  if (horizon < 2) throw Error(ErrorCode::malformed_spec, "validation horizon must be >= 2");
  ValidationReport r;
  r.summability_sup = spec.summability_sup();
  for (Time n = 1; n <= horizon; ++n) r.G_table.push_back(G_cumulative(spec, n));
  r.C_gamma = c_gamma(spec);
  const double delta = spec.delta();
  try {
    const auto E = E_series(spec, delta);
    r.E_G_delta = E.value;
    r.E_truncation_error = E.truncation_error;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::series_diverges) throw;
    if (r.C_gamma > 0.0 && delta < 1.0)
      throw Error(ErrorCode::non_finite_constant, "E(G,delta) diverges numerically");
    r.E_G_delta = kInf;
  }
  r.e_delta = (r.C_gamma == 0.0 || delta == 1.0) ? 0.0 : r.C_gamma * (1.0 - delta) * r.E_G_delta;
  r.delta_star = delta_star(spec);

  const bool t2_applicable = spec.age_independent() && spec.all_summable();
  if (t2_applicable) {
    r.m_exact = true;
    for (int i = 0; i < spec.neuron_count(); ++i) {
      const auto m = reproduction_mean(spec, i);
      r.m_sup = std::max(r.m_sup, m.value);
      r.m_exact = r.m_exact && m.exact;
    }
    r.summable_memory_lhs = summable_memory_lhs(spec);
  } else {
    r.m_sup = kInf;
    r.summable_memory_lhs = kInf;
  }

  const bool t1 = r.e_delta < 1.0;
  const bool t2 = t2_applicable && r.m_sup < 1.0;
  r.regime = t1 && t2 ? Regime::both : t1 ? Regime::theorem1 : t2 ? Regime::theorem2 : Regime::neither;

  // Sampled checks of the floor and of the Lipschitz constant.
  const double gamma = spec.gamma();
  const Time ages[] = {1, 2, 3, 5, 10, 100};
  for (int i = 0; i < spec.neuron_count(); ++i) {
    bool floor_ok = true, lip_ok = true;
    for (Time n : ages) {
      double prev_s = -5.0, prev = spec.rate(i, prev_s, n);
      for (int step = 1; step <= 200; ++step) {
        const double s = -5.0 + 0.3 * step;
        const double v = spec.rate(i, s, n);
        if (v < delta - 1e-15 || v > 1.0 + 1e-15) floor_ok = false;
        if (std::abs(v - prev) > gamma * (s - prev_s) + 1e-12) lip_ok = false;
        prev = v;
        prev_s = s;
      }
    }
    if (!floor_ok) r.violations.push_back("delta_floor: neuron " + std::to_string(i));
    if (!lip_ok) r.violations.push_back("lipschitz: neuron " + std::to_string(i));
  }
  if (r.regime == Regime::neither) r.violations.push_back("no_regime: e(delta) >= 1 and m_sup >= 1");
  return r;
}

}  // namespace spikechain
