#include "spikechain/kalikow.hpp"

#include <algorithm>
#include <cmath>

#include "spikechain/numeric.hpp"

namespace spikechain {

namespace {

constexpr double kClosingTolerance = 1e-13;
constexpr int kMaxLevels = 1000000;

void require_summable_memory(const ModelSpec& spec) {
  if (!spec.age_independent())
    throw Error(ErrorCode::regime_mismatch, "space-time decomposition needs an age-independent rate");
  if (!spec.all_summable())
    throw Error(ErrorCode::regime_mismatch, "space-time decomposition needs summable g");
}

// γ-free form of the displayed bounds on λ_i(k).
double displayed_bound(const ModelSpec& spec, NeuronId i, int k) {
  NeumaierSum acc;
  for (const auto& e : spec.inputs(i)) {
    const auto& g = spec.aging(e.source);
    acc.add(std::abs(e.weight) * (e.layer > k - 1 ? g.tail(1) : g.tail(std::max(k, 1))));
  }
  return acc.value();
}

}  // namespace

double spacetime_gap(const ModelSpec& spec, NeuronId i, int k) {
  NeumaierSum acc;
  for (const auto& e : spec.inputs(i)) {
    const auto& g = spec.aging(e.source);
    acc.add(std::abs(e.weight) * (e.layer <= k ? g.tail(k + 2) : g.tail(1)));
  }
  return acc.value();
}

nlohmann::ordered_json SpacetimeWeights::to_json() const {
  nlohmann::ordered_json j;
  j["neuron"] = neuron;
  j["exactness"] = to_string(exactness);
  j["k_max"] = k_max;
  j["residual"] = residual;
  j["bounds_exceed_one"] = bounds_exceed_one;
  j["r_minus1"] = {{"one", r_minus1.one}, {"zero", r_minus1.zero}};
  auto rows = nlohmann::ordered_json::array();
  for (int k = -1; k <= k_max; ++k) {
    nlohmann::ordered_json row = {{"k", k}, {"lambda", lambda_at(k)}, {"alpha", alpha[k + 1]}};
    if (k >= 0) row["upper_bound"] = lambda_upper[k];
    rows.push_back(row);
  }
  j["lambda"] = rows;
  return j;
}

SpacetimeWeights spacetime_weights(const ModelSpec& spec, NeuronId i, MassMode mode) {
  require_summable_memory(spec);
  if (mode == MassMode::exact && !spec.attractive())
    throw Error(ErrorCode::not_attractive, "exact space-time weights need nonnegative weights");
  const auto& phi = spec.phi(i);
  const double gamma = spec.gamma();
  SpacetimeWeights w;
  w.neuron = i;
  w.exactness = mode;
  double neg = 0.0, pos = 0.0;
  for (const auto& e : spec.inputs(i)) {
    const double v = e.weight * spec.aging(e.source).tail(1);
    (e.weight < 0 ? neg : pos) += v;
  }
  w.r_minus1 = {phi.base(neg), 1.0 - phi.base(pos)};
  w.alpha.push_back(w.r_minus1.one + w.r_minus1.zero);
  const double floor_rate = phi.base(0.0);
  const int k_sat = spec.saturation_index(i);
  for (int k = 0;; ++k) {
    if (k > kMaxLevels)
      throw Error(ErrorCode::residual_mass_too_large, "space-time thresholds do not close");
    const double gap = spacetime_gap(spec, i, k);
    double a = mode == MassMode::exact ? 1.0 - (phi.base(gap) - floor_rate) : 1.0 - gamma * gap;
    a = std::min(1.0, std::max(a, w.alpha.back()));
    const bool close = gap == 0.0 || (k >= k_sat && 1.0 - a < kClosingTolerance);
    if (close) {
      w.residual = 1.0 - a;
      w.alpha.push_back(1.0);
      w.k_max = k;
      break;
    }
    w.alpha.push_back(a);
  }
  w.lambda.resize(w.alpha.size());
  w.lambda[0] = w.alpha[0];
  for (std::size_t q = 1; q < w.alpha.size(); ++q) w.lambda[q] = w.alpha[q] - w.alpha[q - 1];
  double bound_sum = w.alpha[0];
  for (int k = 0; k <= w.k_max; ++k) {
    w.lambda_upper.push_back(gamma * displayed_bound(spec, i, k));
    bound_sum += w.lambda_upper.back();
  }
  w.bounds_exceed_one = bound_sum > 1.0;
  return w;
}

double lambda_spacetime(const ModelSpec& spec, NeuronId i, int k, MassMode mode) {
  require_summable_memory(spec);
  if (mode == MassMode::exact) return spacetime_weights(spec, i, mode).lambda_at(k);
  if (k == -1) return spacetime_weights(spec, i, mode).lambda_at(-1);
  return spec.gamma() * displayed_bound(spec, i, k);
}

KernelPair spacetime_p_k(const ModelSpec& spec, const SpacetimeWeights& w, Time s, int k,
                         const HistoryFn& x) {
  const NeuronId i = w.neuron;
  const double lam = w.lambda_at(k);
  if (!(lam > 0.0)) throw Error(ErrorCode::zero_mass, "lambda(" + std::to_string(k) + ") = 0");
  if (k == -1) return {w.r_minus1.one / lam, w.r_minus1.zero / lam};
  const auto& phi = spec.phi(i);
  std::vector<double> ax(k + 2), sx(k + 2);
  ax[0] = w.alpha[0];
  sx[0] = w.r_minus1.one;
  double prev_one = w.r_minus1.one;
  for (int l = 0; l <= k; ++l) {
    const Time first = l == 0 ? s - 1 : s - l - 1;
    Time L = first - 1;  // below the block: unknown
    for (Time u = s - 1; u >= first; --u)
      if (x(i, u)) {
        L = u;
        break;
      }
    const bool spiked = L >= first;
    double lo = 0.0, hi = 0.0;
    for (const auto& e : spec.inputs(i)) {
      const auto& g = spec.aging(e.source);
      const bool known = l >= 1 && e.layer <= l;
      double open;
      if (known) {
        double seen = 0.0;
        for (Time u = spiked ? L : first; u <= s - 1; ++u)
          if (x(e.source, u)) seen += g(s - u);
        lo += e.weight * seen;
        hi += e.weight * seen;
        open = spiked ? 0.0 : g.tail(l + 2);
      } else {
        open = spiked ? g.cumulative(s - L) : g.tail(1);
      }
      (e.weight < 0 ? lo : hi) += e.weight * open;
    }
    const double one = phi.base(lo), zero = 1.0 - phi.base(hi);
    ax[l + 1] = std::max(ax[l], one + zero);
    sx[l + 1] = one - prev_one;
    prev_one = one;
  }
  const double one = overlap_kernel(w.alpha, k, ax, sx);
  return {one, 1.0 - one};
}

double spacetime_transition(const ModelSpec& spec, NeuronId i, Time s, const HistoryFn& x, Time horizon) {
  Time L = horizon;
  for (Time u = s - 1; u >= horizon; --u)
    if (x(i, u)) {
      L = u;
      break;
    }
  NeumaierSum acc;
  for (const auto& e : spec.inputs(i)) {
    const auto& g = spec.aging(e.source);
    double v = 0.0;
    for (Time u = L; u < s; ++u)
      if (x(e.source, u)) v += g(s - u);
    acc.add(e.weight * v);
  }
  return spec.phi(i).base(acc.value());
}

}  // namespace spikechain
