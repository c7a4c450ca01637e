#include "spikechain/kalikow.hpp"

#include <algorithm>
#include <cmath>

#include "spikechain/constants.hpp"
#include "spikechain/numeric.hpp"

namespace spikechain {

const char* to_string(MassMode m) { return m == MassMode::exact ? "exact-attractive" : "dominated"; }

MassMode default_mode(const ModelSpec& spec) {
  return spec.attractive() ? MassMode::exact : MassMode::dominated;
}

SiteTimeContext make_context(const ModelSpec& spec, NeuronId i, Time t, Time last_xi,
                             std::vector<std::uint8_t> xi) {
  SiteTimeContext ctx;
  ctx.neuron = i;
  ctx.time = t;
  ctx.last_xi = last_xi;
  ctx.neurons = spec.neuron_count();
  if (last_xi >= t) throw Error(ErrorCode::malformed_spec, "R must precede t");
  const auto age = static_cast<std::size_t>(t - last_xi);
  if (xi.size() != age * static_cast<std::size_t>(ctx.neurons))
    throw Error(ErrorCode::malformed_spec, "xi window has the wrong size");
  ctx.xi = std::move(xi);
  if (ctx.xi_at(i, last_xi) != 1) throw Error(ErrorCode::malformed_spec, "xi at R must be 1");
  for (Time s = last_xi + 1; s < t; ++s)
    if (ctx.xi_at(i, s) != 0) throw Error(ErrorCode::malformed_spec, "xi must vanish on (R, t)");
  return ctx;
}

nlohmann::ordered_json KalikowWeights::to_json() const {
  nlohmann::ordered_json j;
  j["exactness"] = to_string(exactness);
  j["k_max"] = k_max;
  j["residual"] = residual;
  j["r_minus1"] = {{"one", r_minus1.one}, {"zero", r_minus1.zero}};
  auto rows = nlohmann::ordered_json::array();
  for (int k = -1; k <= k_max; ++k)
    rows.push_back({{"k", k}, {"lambda", lambda_at(k)}, {"alpha", alpha_at(k)}});
  j["lambda"] = rows;
  return j;
}

SiteTimeKernel::SiteTimeKernel(const SiteTimeContext& ctx, const ModelSpec& spec)
    : ctx_(&ctx), spec_(&spec), age_(ctx.age_since_xi()) {
  const auto in = spec.inputs(ctx.neuron);
  edges_.assign(in.begin(), in.end());
  const Time t = ctx.time;
  sum_xi_.assign(edges_.size(), std::vector<double>(age_, 0.0));
  sum_one_.assign(edges_.size(), std::vector<double>(age_, 0.0));
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& g = spec.aging(edges_[e].source);
    NeumaierSum acc_xi, acc_one;
    for (Time d = age_ - 1; d >= 0; --d) {
      const Time L = ctx.last_xi + d;
      const double gv = g(t - L);
      acc_one.add(gv);
      if (ctx.xi_at(edges_[e].source, L)) acc_xi.add(gv);
      sum_xi_[e][d] = acc_xi.value();
      sum_one_[e][d] = acc_one.value();
    }
  }
}

Time SiteTimeKernel::last_spike(const HistoryFn& x) const {
  const auto& c = *ctx_;
  for (Time s = c.time - 1; s > c.last_xi; --s)
    if (x(c.neuron, s)) return s;
  return c.last_xi;
}

double SiteTimeKernel::input_known(int k, Time L, const HistoryFn& x) const {
  const Time t = ctx_->time;
  NeumaierSum acc;
  for (const auto& e : edges_) {
    if (e.layer > k) break;
    const auto& g = spec_->aging(e.source);
    double s = 0.0;
    for (Time u = L; u < t; ++u)
      if (x(e.source, u)) s += g(t - u);
    acc.add(e.weight * s);
  }
  return acc.value();
}

RBounds SiteTimeKernel::r_minus1() const {
  const auto& phi = spec_->phi(ctx_->neuron);
  double min_rate = 1.0, max_rate = 0.0;
  for (Time d = 0; d < age_; ++d) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const double w = edges_[e].weight;
      lo += w * (w > 0 ? sum_xi_[e][d] : sum_one_[e][d]);
      hi += w * (w > 0 ? sum_one_[e][d] : sum_xi_[e][d]);
    }
    const Time n = age_ - d;
    min_rate = std::min(min_rate, phi(lo, n));
    max_rate = std::max(max_rate, phi(hi, n));
  }
  return {min_rate, 1.0 - max_rate};
}

RBounds SiteTimeKernel::r_bounds(int k, const HistoryFn& x) const {
  if (k < 0) return r_minus1();
  const Time L = last_spike(x);
  const Time d = L - ctx_->last_xi;
  double lo = input_known(k, L, x), hi = lo;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].layer <= k) continue;
    const double w = edges_[e].weight;
    lo += w * (w > 0 ? sum_xi_[e][d] : sum_one_[e][d]);
    hi += w * (w > 0 ? sum_one_[e][d] : sum_xi_[e][d]);
  }
  const auto& phi = spec_->phi(ctx_->neuron);
  const Time n = ctx_->time - L;
  return {phi(lo, n), 1.0 - phi(hi, n)};
}

double SiteTimeKernel::exact_alpha(int k) const {
  // With W ≥ 0 and φ concave, the spread φ(A + B) − φ(A) is largest when the
  // known part A is minimal, i.e. when x equals ξ on V_i(k).
  const auto& phi = spec_->phi(ctx_->neuron);
  double worst = 0.0;
  for (Time d = 0; d < age_; ++d) {
    double base = 0.0, open = 0.0;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      base += edges_[e].weight * sum_xi_[e][d];
      if (edges_[e].layer > k) open += edges_[e].weight * (sum_one_[e][d] - sum_xi_[e][d]);
    }
    const Time n = age_ - d;
    worst = std::max(worst, phi(base + open, n) - phi(base, n));
  }
  return 1.0 - worst;
}

double SiteTimeKernel::lambda_bar(int k) const {
  if (k < 1) throw Error(ErrorCode::malformed_spec, "lambda_bar needs k >= 1");
  return spec_->gamma() * G_envelope(*spec_, age_) * spec_->residual_weight(ctx_->neuron, k - 1);
}

KalikowWeights SiteTimeKernel::weights(MassMode mode, std::optional<int> k_max) const {
  if (mode == MassMode::exact && !spec_->attractive())
    throw Error(ErrorCode::not_attractive, "exact Kalikow weights need nonnegative weights");
  const int k_sat = spec_->saturation_index(ctx_->neuron);
  const int K = k_max ? std::min(*k_max, k_sat) : k_sat;
  KalikowWeights w;
  w.k_max = K;
  w.exactness = mode;
  w.r_minus1 = r_minus1();
  w.alpha.assign(K + 2, 0.0);
  w.lambda.assign(K + 2, 0.0);
  w.alpha[0] = w.r_minus1.one + w.r_minus1.zero;
  double G = 0.0;
  if (mode == MassMode::dominated) G = G_envelope(*spec_, age_);
  for (int k = 0; k <= K; ++k) {
    double a;
    if (k >= k_sat) {
      a = 1.0;
    } else if (mode == MassMode::exact) {
      a = exact_alpha(k);
    } else {
      a = 1.0 - spec_->gamma() * G * spec_->residual_weight(ctx_->neuron, k);
    }
    w.alpha[k + 1] = std::min(1.0, std::max(a, w.alpha[k]));
  }
  for (int k = -1; k <= K; ++k) w.lambda[k + 1] = w.alpha[k + 1] - (k == -1 ? 0.0 : w.alpha[k]);
  w.residual = 1.0 - w.alpha[K + 1];
  if (w.residual > 1e-9)
    throw Error(ErrorCode::residual_mass_too_large,
                "residual mass " + std::to_string(w.residual) + " at k_max " + std::to_string(K));
  return w;
}

double overlap_kernel(const std::vector<double>& thresholds, int k,
                      const std::vector<double>& alpha_x, const std::vector<double>& spike_mass_x) {
  // Index convention: vectors are indexed by l + 1, l = −1..k.
  const double lo = thresholds[k], hi = thresholds[k + 1];
  double total = 0.0, acc = 0.0;
  for (int l = 0; l <= k; ++l) {
    const double a = alpha_x[l], b = alpha_x[l + 1];
    const double width = std::min(hi, b) - std::max(lo, a);
    if (width <= 0.0) continue;
    const double mass = b - a;
    const double p = mass > 0.0 ? std::clamp(spike_mass_x[l + 1] / mass, 0.0, 1.0) : 0.5;
    acc += width * p;
    total += width;
  }
  if (total <= 0.0) {
    const double mass = alpha_x[k + 1] - alpha_x[k];
    return mass > 0.0 ? std::clamp(spike_mass_x[k + 1] / mass, 0.0, 1.0) : 0.5;
  }
  return acc / total;
}

KernelPair SiteTimeKernel::p_k(const KalikowWeights& w, int k, const HistoryFn& x) const {
  if (k < -1 || k > w.k_max) throw Error(ErrorCode::zero_mass, "range outside the decomposition");
  const double lam = w.lambda_at(k);
  if (!(lam > 0.0)) throw Error(ErrorCode::zero_mass, "lambda(" + std::to_string(k) + ") = 0");
  if (k == -1) return {w.r_minus1.one / lam, w.r_minus1.zero / lam};
  std::vector<double> ax(k + 2), sx(k + 2);
  ax[0] = w.alpha_at(-1);
  sx[0] = w.r_minus1.one;
  double prev_one = w.r_minus1.one;
  for (int l = 0; l <= k; ++l) {
    const auto r = r_bounds(l, x);
    ax[l + 1] = std::max(ax[l], r.one + r.zero);
    sx[l + 1] = r.one - prev_one;
    prev_one = r.one;
  }
  const double one = overlap_kernel(w.alpha, k, ax, sx);
  return {one, 1.0 - one};
}

double SiteTimeKernel::transition(const HistoryFn& x) const {
  const Time L = last_spike(x);
  const double s = input_known(spec_->saturation_index(ctx_->neuron), L, x);
  return spec_->phi(ctx_->neuron)(s, ctx_->time - L);
}

RBounds r_bounds(const SiteTimeContext& ctx, const ModelSpec& spec, int k, const HistoryFn& x,
                 MassMode mode) {
  if (mode == MassMode::exact && !spec.attractive())
    throw Error(ErrorCode::not_attractive, "exact r-bounds requested for signed weights");
  return SiteTimeKernel(ctx, spec).r_bounds(k, x);
}

KalikowWeights lambda_weights(const SiteTimeContext& ctx, const ModelSpec& spec,
                              std::optional<int> k_max, MassMode mode) {
  return SiteTimeKernel(ctx, spec).weights(mode, k_max);
}

double lambda_bar(const SiteTimeContext& ctx, const ModelSpec& spec, int k) {
  return SiteTimeKernel(ctx, spec).lambda_bar(k);
}

KernelPair p_k_conditional(const SiteTimeContext& ctx, const ModelSpec& spec,
                           const KalikowWeights& weights, int k, const HistoryFn& x) {
  return SiteTimeKernel(ctx, spec).p_k(weights, k, x);
}

double transition_probability(const SiteTimeContext& ctx, const ModelSpec& spec, const HistoryFn& x) {
  return SiteTimeKernel(ctx, spec).transition(x);
}

double reconstruct_transition(const SiteTimeContext& ctx, const ModelSpec& spec, const HistoryFn& x,
                              MassMode mode) {
  const SiteTimeKernel kernel(ctx, spec);
  const auto w = kernel.weights(mode);
  NeumaierSum one, zero;
  for (int k = -1; k <= w.k_max; ++k) {
    const double lam = w.lambda_at(k);
    if (!(lam > 0.0)) continue;
    const auto p = kernel.p_k(w, k, x);
    one.add(lam * p.one);
    zero.add(lam * p.zero);
  }
  const double direct = kernel.transition(x);
  return std::max(std::abs(one.value() - direct), std::abs(zero.value() - (1.0 - direct)));
}

}  // namespace spikechain
