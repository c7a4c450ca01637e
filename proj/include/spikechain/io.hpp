#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spikechain/field.hpp"

namespace spikechain {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

// `neuron,time` per spike, sorted by time then neuron, with a header line.
std::string raster_csv(const SpikeField& field);
SpikeField parse_raster_csv(const std::string& text, std::vector<NeuronId> neurons, Time t0, Time t1);
std::string edges_csv(const std::vector<std::pair<NeuronId, NeuronId>>& edges);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view bytes);

}  // namespace spikechain
