#include "spikechain/field.hpp"

#include <algorithm>
#include <numeric>

namespace spikechain {

SpikeField::SpikeField(std::vector<NeuronId> neurons, Time t0, Time t1)
    : neurons_(std::move(neurons)), t0_(t0), t1_(t1) {
  cells_.assign(neurons_.size() * static_cast<std::size_t>(length()), 0);
}

int SpikeField::row(NeuronId i) const {
  const auto it = std::find(neurons_.begin(), neurons_.end(), i);
  return it == neurons_.end() ? -1 : static_cast<int>(it - neurons_.begin());
}

std::uint64_t SpikeField::spike_count() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0});
}

std::uint64_t SpikeField::spike_count(NeuronId i) const {
  const int r = row(i);
  if (r < 0) return 0;
  std::uint64_t c = 0;
  for (Time t = t0_; t <= t1_; ++t) c += at_row(r, t);
  return c;
}

}  // namespace spikechain
