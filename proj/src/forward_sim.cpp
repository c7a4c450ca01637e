#include "spikechain/forward_sim.hpp"

#include <algorithm>

namespace spikechain {

ChainState::ChainState(const ModelSpec& spec, ArtificialPast past, Time horizon)
    : n_(spec.neuron_count()), last_(spec.neuron_count(), 0), support_(spec.max_support()) {
  // An infinite-support g anywhere makes the whole history relevant.
  for (int i = 0; i < n_; ++i)
    if (!spec.aging(i).support_length()) support_.reset();
  if (past == ArtificialPast::spike_at_zero) {
    ring_.emplace_back(n_, 1);
  } else {
    if (horizon < 1) throw Error(ErrorCode::malformed_spec, "silent horizon must be positive");
    ring_.emplace_back(n_, 1);
    for (Time s = -horizon + 1; s <= 0; ++s) ring_.emplace_back(n_, 0);
    std::fill(last_.begin(), last_.end(), -horizon);
  }
  trim();
}

int ChainState::at(NeuronId j, Time s) const {
  const Time first = time_ - static_cast<Time>(ring_.size());
  if (s < first || s >= time_) return 0;
  return ring_[static_cast<std::size_t>(s - first)][j];
}

double ChainState::drive(const ModelSpec& spec, NeuronId i) const {
  const Time t = time_;
  Time from = last_[i];
  if (support_) from = std::max(from, t - *support_);
  double total = 0.0;
  for (const auto& e : spec.inputs(i)) {
    const auto& g = spec.aging(e.source);
    double acc = 0.0;
    for (Time s = from; s < t; ++s)
      if (at(e.source, s)) acc += g(t - s);
    total += e.weight * acc;
  }
  return total;
}

double ChainState::spike_probability(const ModelSpec& spec, NeuronId i) const {
  return spec.rate(i, drive(spec, i), age(i));
}

void ChainState::push(std::vector<std::uint8_t> config) {
  for (int i = 0; i < n_; ++i)
    if (config[i]) last_[i] = time_;
  ring_.push_back(std::move(config));
  ++time_;
  trim();
}

void ChainState::trim() {
  Time oldest = *std::min_element(last_.begin(), last_.end());
  if (support_) oldest = std::max(oldest, time_ - *support_);
  oldest = std::min(oldest, time_ - 1);
  while (time_ - static_cast<Time>(ring_.size()) < oldest) ring_.pop_front();
  if (ring_.size() > kHistoryCap)
    throw Error(ErrorCode::unbounded_memory, "forward history exceeds " + std::to_string(kHistoryCap) +
                                                 " steps");
}

void step(ChainState& state, const ModelSpec& spec, const CoordinateRng& src) {
  const Time t = state.time();
  std::vector<std::uint8_t> next(state.neurons(), 0);
  for (int i = 0; i < state.neurons(); ++i)
    next[i] = src.uniform(StreamTag::forward, i, t) < state.spike_probability(spec, i) ? 1 : 0;
  state.push(std::move(next));
}

void simulate_observe(const ModelSpec& spec, Time steps, Time burnin, const CoordinateRng& src,
                      const std::function<void(Time, const std::vector<std::uint8_t>&)>& observe,
                      ArtificialPast past) {
  if (steps < 0 || burnin < 0) throw Error(ErrorCode::malformed_spec, "steps and burnin must be >= 0");
  ChainState state(spec, past);
  for (Time k = 0; k < burnin + steps; ++k) {
    step(state, spec, src);
    const Time t = state.time() - 1;
    if (t > burnin) observe(t, state.current());
  }
}

SpikeField simulate(const ModelSpec& spec, Time steps, Time burnin, const CoordinateRng& src,
                    ArtificialPast past) {
  std::vector<NeuronId> all(spec.neuron_count());
  for (int i = 0; i < spec.neuron_count(); ++i) all[i] = i;
  SpikeField field(all, burnin + 1, burnin + steps);
  simulate_observe(
      spec, steps, burnin, src,
      [&](Time t, const std::vector<std::uint8_t>& x) {
        for (int i = 0; i < spec.neuron_count(); ++i) field.set_row(i, t, x[i]);
      },
      past);
  return field;
}

std::vector<Time> forward_spike_times(const ModelSpec& spec, NeuronId i, Time steps, Time burnin,
                                      const CoordinateRng& src) {
  std::vector<Time> out;
  simulate_observe(spec, steps, burnin, src, [&](Time t, const std::vector<std::uint8_t>& x) {
    if (x[i]) out.push_back(t);
  });
  return out;
}

}  // namespace spikechain
