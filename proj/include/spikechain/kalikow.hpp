#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "spikechain/model.hpp"

namespace spikechain {

// ξ environment of one site-time: the spontaneous field on all neurons over
// [R, t−1], where R is the last spontaneous spike of `neuron` before `time`.
struct SiteTimeContext {
  NeuronId neuron = 0;
  Time time = 0;
  Time last_xi = 0;  // R_t^i
  int neurons = 0;
  std::vector<std::uint8_t> xi;  // xi[j * age + (s − R)]

  Time age_since_xi() const { return time - last_xi; }
  int xi_at(NeuronId j, Time s) const { return xi[static_cast<std::size_t>(j) * age_since_xi() + (s - last_xi)]; }
};

// Checks ξ_R(i)=1 and ξ_s(i)=0 on (R, t).
SiteTimeContext make_context(const ModelSpec& spec, NeuronId i, Time t, Time last_xi,
                             std::vector<std::uint8_t> xi);

enum class MassMode { exact, dominated };
const char* to_string(MassMode m);
MassMode default_mode(const ModelSpec& spec);

struct RBounds {
  double one = 0.0;
  double zero = 0.0;
};

struct KernelPair {
  double one = 0.0;
  double zero = 0.0;
};

struct KalikowWeights {
  int k_max = 0;
  std::vector<double> alpha;   // alpha[k + 1], k = −1..k_max
  std::vector<double> lambda;  // lambda[k + 1]
  RBounds r_minus1;
  MassMode exactness = MassMode::exact;
  double residual = 0.0;

  double alpha_at(int k) const { return alpha[k + 1]; }
  double lambda_at(int k) const { return k <= k_max ? lambda[k + 1] : 0.0; }
  nlohmann::ordered_json to_json() const;
};

// Precomputed per-edge sums for one site-time. All public kalikow operations
// are thin wrappers around this.
class SiteTimeKernel {
 public:
  SiteTimeKernel(const SiteTimeContext& ctx, const ModelSpec& spec);

  const SiteTimeContext& context() const { return *ctx_; }

  RBounds r_minus1() const;
  // r^[k](·|x) for k ≥ 0; reads x only on V_i(k) × [L, t−1].
  RBounds r_bounds(int k, const HistoryFn& x) const;
  KalikowWeights weights(MassMode mode, std::optional<int> k_max = std::nullopt) const;
  double lambda_bar(int k) const;
  KernelPair p_k(const KalikowWeights& w, int k, const HistoryFn& x) const;
  // Direct transition probability p_{(i,t)}(1|x).
  double transition(const HistoryFn& x) const;
  // Last spike of the target neuron in [R, t−1] according to x.
  Time last_spike(const HistoryFn& x) const;

 private:
  double input_known(int k, Time L, const HistoryFn& x) const;
  double exact_alpha(int k) const;

  const SiteTimeContext* ctx_;
  const ModelSpec* spec_;
  std::vector<InEdge> edges_;
  Time age_;
  // Per edge e and offset d = L − R: Σ_{s=L}^{t−1} g(t−s) ξ_s(j), and Σ_{n=1}^{t−L} g(n).
  std::vector<std::vector<double>> sum_xi_;
  std::vector<std::vector<double>> sum_one_;
};

RBounds r_bounds(const SiteTimeContext& ctx, const ModelSpec& spec, int k, const HistoryFn& x,
                 MassMode mode = MassMode::exact);
KalikowWeights lambda_weights(const SiteTimeContext& ctx, const ModelSpec& spec,
                              std::optional<int> k_max = std::nullopt,
                              MassMode mode = MassMode::exact);
double lambda_bar(const SiteTimeContext& ctx, const ModelSpec& spec, int k);
KernelPair p_k_conditional(const SiteTimeContext& ctx, const ModelSpec& spec,
                           const KalikowWeights& weights, int k, const HistoryFn& x);
double transition_probability(const SiteTimeContext& ctx, const ModelSpec& spec, const HistoryFn& x);
double reconstruct_transition(const SiteTimeContext& ctx, const ModelSpec& spec, const HistoryFn& x,
                              MassMode mode = MassMode::exact);

// p^[k] from thresholds A(−1..k) and configuration-dependent α(l,x), Δ^[l](1|x)
// by the half-open interval overlap rule. Shared by both decompositions.
double overlap_kernel(const std::vector<double>& thresholds, int k,
                      const std::vector<double>& alpha_x, const std::vector<double>& spike_mass_x);

// Space-time decomposition (age-independent φ, summable g).
struct SpacetimeWeights {
  NeuronId neuron = 0;
  MassMode exactness = MassMode::exact;
  int k_max = 0;
  std::vector<double> alpha;   // sampling thresholds, alpha[k + 1]
  std::vector<double> lambda;  // λ_i(k) (exact) or threshold differences (dominated)
  std::vector<double> lambda_upper;  // displayed upper bounds, lambda_upper[k], k = 0..k_max
  RBounds r_minus1;
  double residual = 0.0;  // 1 − α(k_max) before closing the last block
  bool bounds_exceed_one = false;

  double lambda_at(int k) const { return k <= k_max ? lambda[k + 1] : 0.0; }
  nlohmann::ordered_json to_json() const;
};

SpacetimeWeights spacetime_weights(const ModelSpec& spec, NeuronId i, MassMode mode);
// Exact λ_i(k) (attractive) or the displayed upper bound (dominated).
double lambda_spacetime(const ModelSpec& spec, NeuronId i, int k, MassMode mode);
// Γ_i(k): largest possible input spread left open by the block V_i(k) × [−k−1, −1].
double spacetime_gap(const ModelSpec& spec, NeuronId i, int k);
KernelPair spacetime_p_k(const ModelSpec& spec, const SpacetimeWeights& w, Time s, int k,
                         const HistoryFn& x);
// Direct p_{(i,s)}(1|x) when x is known back to the last spike of i (or to `horizon`).
double spacetime_transition(const ModelSpec& spec, NeuronId i, Time s, const HistoryFn& x, Time horizon);

}  // namespace spikechain
