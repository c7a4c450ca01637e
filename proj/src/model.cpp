#include "spikechain/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

namespace spikechain {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= p[k];
    h *= 0x100000001B3ull;
  }
  return h;
}

template <class T>
std::uint64_t mix(std::uint64_t h, const T& v) {
  return fnv1a(h, &v, sizeof(T));
}

}  // namespace

ModelSpec::ModelSpec(int neuron_count, double delta, std::vector<double> weights,
                     std::vector<PhiDescriptor> phi, std::vector<AgingDescriptor> g,
                     NeighborhoodPolicy policy, std::vector<int> layers,
                     std::vector<std::vector<int>> coordinates)
    : n_(neuron_count),
      delta_(delta),
      weights_(std::move(weights)),
      phi_(std::move(phi)),
      g_(std::move(g)),
      policy_(policy),
      coords_(std::move(coordinates)),
      explicit_layers_(std::move(layers)) {
  if (n_ < 1) throw Error(ErrorCode::malformed_spec, "neuron_count must be positive");
  if (!(delta_ > 0.0 && delta_ <= 1.0))
    throw Error(ErrorCode::malformed_spec, "delta must lie in (0,1]");
  const auto nn = static_cast<std::size_t>(n_) * n_;
  if (weights_.size() != nn) throw Error(ErrorCode::malformed_spec, "weight matrix size");
  if (phi_.size() == 1 && n_ > 1) phi_.resize(n_, phi_[0]);
  if (g_.size() == 1 && n_ > 1) g_.resize(n_, g_[0]);
  if (static_cast<int>(phi_.size()) != n_ || static_cast<int>(g_.size()) != n_)
    throw Error(ErrorCode::malformed_spec, "phi/g descriptor count must be 1 or neuron_count");
  for (int j = 0; j < n_; ++j) {
    if (weights_[j * n_ + j] != 0.0)
      throw Error(ErrorCode::malformed_spec, "W_{j->j} must be 0 (neuron " + std::to_string(j) + ")");
  }
  for (double w : weights_)
    if (!std::isfinite(w)) throw Error(ErrorCode::malformed_spec, "non-finite weight");
  for (auto& p : phi_) {
    p.delta = delta_;
    if (p.family == PhiFamily::saturated_linear && !(p.gamma > 0.0))
      throw Error(ErrorCode::malformed_spec, "phi.gamma must be positive");
    if (p.refractory_tau < 0.0) throw Error(ErrorCode::malformed_spec, "refractory_tau < 0");
  }
  for (const auto& a : g_) {
    if (a.scale < 0.0) throw Error(ErrorCode::malformed_spec, "g scale must be nonnegative");
    if (a.family == AgingFamily::exponential && !(a.rate > 0.0))
      throw Error(ErrorCode::malformed_spec, "exponential g needs rate > 0");
    if (a.family == AgingFamily::power_law && !(a.exponent > 0.0))
      throw Error(ErrorCode::malformed_spec, "power-law g needs exponent > 0");
    if (a.family == AgingFamily::finite_support && a.support < 1)
      throw Error(ErrorCode::malformed_spec, "finite-support g needs support >= 1");
  }
  if (policy_ == NeighborhoodPolicy::lattice_shells && static_cast<int>(coords_.size()) != n_)
    throw Error(ErrorCode::malformed_spec, "lattice_shells needs one coordinate per neuron");
  if (policy_ == NeighborhoodPolicy::explicit_layers && explicit_layers_.size() != nn)
    throw Error(ErrorCode::malformed_spec, "explicit layers matrix size");

  inputs_.assign(n_, {});
  layer_.assign(nn, kNotInNeighborhood);
  k_sat_.assign(n_, 0);
  residual_.assign(n_, {});
  for (int i = 0; i < n_; ++i) {
    layer_[i * n_ + i] = 0;
    std::vector<InEdge> in;
    for (int j = 0; j < n_; ++j)
      if (j != i && weights_[j * n_ + i] != 0.0) in.push_back({j, weights_[j * n_ + i], 0});
    std::vector<int> raw(in.size());
    switch (policy_) {
      case NeighborhoodPolicy::by_weight: {
        std::vector<std::size_t> order(in.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          const double wa = std::abs(in[a].weight), wb = std::abs(in[b].weight);
          if (wa != wb) return wa > wb;
          return in[a].source < in[b].source;
        });
        for (std::size_t r = 0; r < order.size(); ++r) raw[order[r]] = static_cast<int>(r) + 1;
        break;
      }
      case NeighborhoodPolicy::lattice_shells:
        for (std::size_t e = 0; e < in.size(); ++e) {
          int d = 0;
          for (std::size_t c = 0; c < coords_[i].size(); ++c)
            d += std::abs(coords_[i][c] - coords_[in[e].source][c]);
          raw[e] = d;
        }
        break;
      case NeighborhoodPolicy::explicit_layers:
        for (std::size_t e = 0; e < in.size(); ++e) {
          raw[e] = explicit_layers_[in[e].source * n_ + i];
          if (raw[e] < 1) throw Error(ErrorCode::malformed_spec, "explicit layers must be >= 1");
        }
        break;
    }
    // Compress so that every step adds at least one neuron.
    std::vector<int> distinct(raw.begin(), raw.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t e = 0; e < in.size(); ++e) {
      in[e].layer = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), raw[e]) -
                                     distinct.begin()) + 1;
      layer_[in[e].source * n_ + i] = in[e].layer;
    }
    std::sort(in.begin(), in.end(), [](const InEdge& a, const InEdge& b) {
      return a.layer != b.layer ? a.layer < b.layer : a.source < b.source;
    });
    k_sat_[i] = static_cast<int>(distinct.size());
    residual_[i].assign(k_sat_[i] + 1, 0.0);
    for (int k = 0; k <= k_sat_[i]; ++k) {
      double r = 0.0;
      for (const auto& e : in)
        if (e.layer > k) r += std::abs(e.weight);
      residual_[i][k] = r;
    }
    inputs_[i] = std::move(in);
  }
}

std::span<const InEdge> ModelSpec::inputs(NeuronId i) const { return inputs_[i]; }

int ModelSpec::layer_of(NeuronId i, NeuronId j) const { return layer_[j * n_ + i]; }

std::size_t ModelSpec::neighborhood_size(NeuronId i, int k) const {
  if (k < 0) return 0;
  std::size_t c = 1;
  for (const auto& e : inputs_[i])
    if (e.layer <= k) ++c;
  return c;
}

std::vector<NeuronId> ModelSpec::neighborhood(NeuronId i, int k) const {
  std::vector<NeuronId> v;
  if (k < 0) return v;
  v.push_back(i);
  for (const auto& e : inputs_[i])
    if (e.layer <= k) v.push_back(e.source);
  return v;
}

double ModelSpec::residual_weight(NeuronId i, int k) const {
  if (k < 0) return residual_[i].empty() ? 0.0 : residual_[i][0];
  if (k >= k_sat_[i]) return 0.0;
  return residual_[i][k];
}

double ModelSpec::gamma() const {
  double g = 0.0;
  for (const auto& p : phi_) g = std::max(g, p.lipschitz());
  return g;
}

bool ModelSpec::attractive() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w >= 0.0; });
}

bool ModelSpec::age_independent() const {
  return std::none_of(phi_.begin(), phi_.end(), [](const PhiDescriptor& p) { return p.age_dependent(); });
}

bool ModelSpec::all_summable() const {
  return std::all_of(g_.begin(), g_.end(), [](const AgingDescriptor& a) { return a.summable(); });
}

std::optional<Time> ModelSpec::max_support() const {
  Time m = 0;
  for (const auto& a : g_) {
    const auto s = a.support_length();
    if (!s) return std::nullopt;
    m = std::max(m, *s);
  }
  return m;
}

double ModelSpec::summability_sup() const {
  double best = 0.0;
  for (int i = 0; i < n_; ++i) best = std::max(best, residual_weight(i, -1));
  return best;
}

std::uint64_t ModelSpec::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  h = mix(h, n_);
  h = mix(h, delta_);
  for (double w : weights_) h = mix(h, w);
  for (const auto& p : phi_) {
    h = mix(h, static_cast<int>(p.family));
    h = mix(h, p.gamma);
    h = mix(h, p.refractory_tau);
  }
  for (const auto& a : g_) {
    h = mix(h, static_cast<int>(a.family));
    h = mix(h, a.scale);
    h = mix(h, a.rate);
    h = mix(h, a.exponent);
    h = mix(h, a.support);
  }
  h = mix(h, static_cast<int>(policy_));
  for (int l : layer_) h = mix(h, l);
  return h;
}

ModelSpec ModelSpec::with_delta(double delta) const {
  return ModelSpec(n_, delta, weights_, phi_, g_, policy_, explicit_layers_, coords_);
}

namespace presets {

namespace {

PhiDescriptor linear_phi(double delta, double gamma) {
  PhiDescriptor p;
  p.family = PhiFamily::saturated_linear;
  p.delta = delta;
  p.gamma = gamma;
  return p;
}

AgingDescriptor finite_g(Time m, double value = 1.0) {
  AgingDescriptor g;
  g.family = AgingFamily::finite_support;
  g.support = m;
  g.scale = value;
  return g;
}

}  // namespace

ModelSpec zero_interaction(int n, double delta) {
  return ModelSpec(n, delta, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0),
                   {linear_phi(delta, 0.1)}, {AgingDescriptor{}});
}

ModelSpec single_neuron(double delta) { return zero_interaction(1, delta); }

ModelSpec two_neuron_support1(double delta, double gamma, double w) {
  return ModelSpec(2, delta, {0.0, w, w, 0.0}, {linear_phi(delta, gamma)}, {finite_g(1)});
}

ModelSpec three_neuron_attractive(double delta, double gamma, Time support) {
  // 0→1, 1→2, 2→0 strong; 0→2 weak.
  std::vector<double> w(9, 0.0);
  w[0 * 3 + 1] = 1.0;
  w[1 * 3 + 2] = 1.0;
  w[2 * 3 + 0] = 1.0;
  w[0 * 3 + 2] = 0.5;
  return ModelSpec(3, delta, w, {linear_phi(delta, gamma)}, {finite_g(support)});
}

ModelSpec exponential_memory(double delta, double gamma, double c, double beta) {
  AgingDescriptor g;
  g.family = AgingFamily::exponential;
  g.scale = c;
  g.rate = beta;
  // Each neuron has one strong input and one weak input of size e^{−β}/2, so the
  // residual weights decay like e^{−βn} as well.
  const double weak = 0.5 * std::exp(-beta);
  std::vector<double> w(9, 0.0);
  w[0 * 3 + 1] = 1.0;
  w[1 * 3 + 2] = 1.0;
  w[2 * 3 + 0] = 1.0;
  w[2 * 3 + 1] = weak;
  w[0 * 3 + 2] = weak;
  w[1 * 3 + 0] = weak;
  return ModelSpec(3, delta, w, {linear_phi(delta, gamma)}, {g});
}

ModelSpec lattice_window(int dim, int side, double alpha, double delta, double gamma) {
  if (dim < 1 || dim > 2) throw Error(ErrorCode::malformed_spec, "lattice dim must be 1 or 2");
  if (side < 1) throw Error(ErrorCode::malformed_spec, "lattice side must be positive");
  if (!(alpha > 1.0)) throw Error(ErrorCode::malformed_spec, "lattice alpha must exceed 1");
  const int n = dim == 1 ? side : side * side;
  std::vector<std::vector<int>> coords(n);
  for (int a = 0; a < n; ++a) {
    if (dim == 1) coords[a] = {a};
    else coords[a] = {a / side, a % side};
  }
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      int d = 0;
      for (int c = 0; c < dim; ++c) d += std::abs(coords[i][c] - coords[j][c]);
      w[j * n + i] = std::pow(static_cast<double>(d), -(2.0 * dim + alpha));
    }
  return ModelSpec(n, delta, w, {linear_phi(delta, gamma)}, {AgingDescriptor{}},
                   NeighborhoodPolicy::lattice_shells, {}, coords);
}

}  // namespace presets

}  // namespace spikechain
