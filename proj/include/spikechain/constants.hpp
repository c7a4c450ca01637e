#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spikechain/model.hpp"

namespace spikechain {

// G(n) = sup_i Σ_{m=1}^{n} g_i(m)
double G_cumulative(const ModelSpec& spec, Time n);
// Σ_{m=1}^{n} sup_j g_j(m); equals G_cumulative when all g coincide.
double G_envelope(const ModelSpec& spec, Time n);

// C_γ = 2γ sup_j Σ_{k≥1} |V_j(k)| Σ_{l ∉ V_j(k−1)} |W_{l→j}|
double c_gamma(const ModelSpec& spec);

struct SeriesValue {
  double value = 0.0;
  double truncation_error = 0.0;
  long long terms = 0;
};

// E(G,δ) = G(1) + Σ_{n≥2} (1−δ)^{n−2} n² G(n)
SeriesValue E_series(const ModelSpec& spec, double delta);
// e(δ) = C_γ (1−δ) E(G,δ)
double e_delta(const ModelSpec& spec, double delta);

enum class DeltaStarFlag { crossing, below_range, above_range };

struct DeltaStar {
  double value = 0.0;
  DeltaStarFlag flag = DeltaStarFlag::crossing;
};

// Infimum of {δ : e(δ) ≤ 1} by bisection on [1e−6, 1−1e−6].
DeltaStar delta_star(const ModelSpec& spec, double tol = 1e-9);

struct ReproductionMean {
  double value = 0.0;
  bool exact = false;  // false: built from the upper bounds on λ_i(k)
  double truncation_error = 0.0;
};

ReproductionMean reproduction_mean(const ModelSpec& spec, NeuronId i);
// Σ_k (k+1)|V_i(k)| λ̄_i(k) with λ̄ the displayed upper bounds, divided by γ,
// maximized over i.
double summable_memory_lhs(const ModelSpec& spec);

// Partial sums S(K) = sup_i Σ_{k=1}^{K} |V_i(k)| Σ_{j∉V_i(k−1)} |W_{j→i}|, K = 1..k_max.
std::vector<double> fast_decay_partial_sums(const ModelSpec& spec, int k_max);
// The same series on the infinite lattice Z^d with exact shell counts.
double lattice_fast_decay_majorant(int dim, double alpha);

struct MgfRho {
  double rho = 0.0;
  double c = 0.0;
  double beta = 0.0;
  double lambda_bar_sum = 0.0;
  bool below_beta_star = false;
};

// φ(1) = E e^{η} for the offspring walk with λ̄(0) = C e^{−β}/(1−e^{−β}),
// λ̄(k) = C e^{−βk}/(1−e^{−β}) for k ≥ 1.
MgfRho mgf_rho_formula(double c, double beta);
MgfRho mgf_rho(const ModelSpec& spec, double beta);

enum class Regime { theorem1, theorem2, both, neither };
const char* to_string(Regime r);

struct ValidationReport {
  double summability_sup = 0.0;
  std::vector<double> G_table;
  double C_gamma = 0.0;
  double E_G_delta = 0.0;
  double E_truncation_error = 0.0;
  double e_delta = 0.0;
  DeltaStar delta_star;
  double m_sup = 0.0;
  bool m_exact = false;
  double summable_memory_lhs = 0.0;
  Regime regime = Regime::neither;
  std::vector<std::string> violations;

  nlohmann::ordered_json to_json() const;
};

ValidationReport validate_model(const ModelSpec& spec, Time horizon);

}  // namespace spikechain
