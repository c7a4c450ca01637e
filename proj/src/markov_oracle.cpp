#include <cmath>

#include <Eigen/Dense>

#include "spikechain/forward_sim.hpp"

namespace spikechain {

namespace {

// State bit m·N + j holds X_{t−1−m}(j).
double spike_prob(const ModelSpec& spec, int n, int memory, std::size_t state, NeuronId i) {
  auto bit = [&](int m, int j) { return static_cast<int>((state >> (m * n + j)) & 1u); };
  int own = memory;  // offset of i's last spike inside the window, if any
  for (int m = 0; m < memory; ++m)
    if (bit(m, i)) {
      own = m;
      break;
    }
  const int deepest = std::min(own, memory - 1);
  double drive = 0.0;
  for (const auto& e : spec.inputs(i)) {
    const auto& g = spec.aging(e.source);
    double acc = 0.0;
    for (int m = 0; m <= deepest; ++m)
      if (bit(m, e.source)) acc += g(m + 1);
    drive += e.weight * acc;
  }
  return spec.rate(i, drive, 1);
}

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace

MarkovOracle::MarkovOracle(const ModelSpec& spec) : n_(spec.neuron_count()) {
  if (!spec.age_independent())
    throw Error(ErrorCode::regime_mismatch, "oracle needs an age-independent phi");
  // Only neurons with outgoing edges need a finite memory.
  Time m = 1;
  for (int j = 0; j < n_; ++j) {
    bool source = false;
    for (int i = 0; i < n_; ++i) source = source || spec.weight(j, i) != 0.0;
    if (!source) continue;
    const auto len = spec.aging(j).support_length();
    if (!len) throw Error(ErrorCode::regime_mismatch, "oracle needs finite-support g");
    m = std::max(m, *len);
  }
  memory_ = static_cast<int>(m);
  if (n_ * memory_ > kMaxBits)
    throw Error(ErrorCode::state_space_too_large,
                std::to_string(n_ * memory_) + " state bits exceed " + std::to_string(kMaxBits));
  states_ = std::size_t{1} << (n_ * memory_);
  const std::size_t configs = std::size_t{1} << n_;
  const std::size_t mask = states_ - 1;
  p_.assign(states_ * states_, 0.0);
  std::vector<double> q(n_);
  for (std::size_t s = 0; s < states_; ++s) {
    for (int i = 0; i < n_; ++i) q[i] = spike_prob(spec, n_, memory_, s, i);
    for (std::size_t c = 0; c < configs; ++c) {
      double pr = 1.0;
      for (int i = 0; i < n_; ++i) pr *= ((c >> i) & 1u) ? q[i] : 1.0 - q[i];
      const std::size_t next = ((s << n_) | c) & mask;
      p_[s * states_ + next] += pr;
    }
  }
  // π (P − I) = 0 with one equation replaced by Σπ = 1.
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> P(
      p_.data(), states_, states_);
  Matrix a = P.transpose() - Matrix::Identity(states_, states_);
  a.row(0).setOnes();
  Vector b = Vector::Zero(states_);
  b(0) = 1.0;
  Vector pi = a.partialPivLu().solve(b);
  pi_.assign(pi.data(), pi.data() + states_);
  for (auto& v : pi_) v = std::max(v, 0.0);
  double total = 0.0;
  for (double v : pi_) total += v;
  for (auto& v : pi_) v /= total;
}

double MarkovOracle::row_sum_error() const {
  double worst = 0.0;
  for (std::size_t s = 0; s < states_; ++s) {
    double sum = 0.0;
    for (std::size_t r = 0; r < states_; ++r) sum += p_[s * states_ + r];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double MarkovOracle::fixed_point_error() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < states_; ++r) {
    double v = 0.0;
    for (std::size_t s = 0; s < states_; ++s) v += pi_[s] * p_[s * states_ + r];
    worst = std::max(worst, std::abs(v - pi_[r]));
  }
  return worst;
}

double MarkovOracle::spike_rate(NeuronId i) const {
  double r = 0.0;
  for (std::size_t s = 0; s < states_; ++s)
    if ((s >> i) & 1u) r += pi_[s];
  return r;
}

std::vector<double> MarkovOracle::newest_config_distribution() const {
  std::vector<double> out(std::size_t{1} << n_, 0.0);
  const std::size_t low = out.size() - 1;
  for (std::size_t s = 0; s < states_; ++s) out[s & low] += pi_[s];
  return out;
}

IsiMoments MarkovOracle::isi_moments(NeuronId i) const {
  const double rate = spike_rate(i);
  if (!(rate > 0.0)) throw Error(ErrorCode::degenerate, "neuron never spikes");
  const std::size_t n = states_;
  auto in_a = [i](std::size_t s) { return ((s >> i) & 1u) != 0; };
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> P(
      p_.data(), n, n);
  // Q keeps transitions into states where i is silent; PA those where it spikes.
  Matrix q = P, pa = P;
  for (std::size_t r = 0; r < n; ++r) {
    if (in_a(r)) q.col(r).setZero();
    else pa.col(r).setZero();
  }
  const auto lu = (Matrix::Identity(n, n) - q).partialPivLu();
  const Vector ones = Vector::Ones(n);
  // h = E[T], k = E[T²], gh = E[h(S_T)], f = E[T h(S_T)] for T the next return time.
  const Vector h = lu.solve(ones);
  const Vector k = lu.solve(ones + 2.0 * q * h);
  const Vector pah = pa * h;
  const Vector gh = lu.solve(pah);
  const Vector f = lu.solve(pah + q * gh);
  // Palm measure: stationary law given a spike of i at the newest time.
  double eh = 0.0, ek = 0.0, ef = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (!in_a(s)) continue;
    const double w = pi_[s] / rate;
    eh += w * h(s);
    ek += w * k(s);
    ef += w * f(s);
  }
  return {eh, ek - eh * eh, ef - eh * eh};
}

MarkovOracle exact_stationary(const ModelSpec& spec) { return MarkovOracle(spec); }

}  // namespace spikechain
