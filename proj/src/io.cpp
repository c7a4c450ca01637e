#include "spikechain/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spikechain {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string raster_csv(const SpikeField& field) {
  std::string out = "neuron,time\n";
  if (field.empty()) return out;
  // Rows keep window order; emit by neuron id within each time.
  std::vector<std::pair<NeuronId, int>> order;
  for (std::size_t r = 0; r < field.neurons().size(); ++r)
    order.emplace_back(field.neurons()[r], static_cast<int>(r));
  std::sort(order.begin(), order.end());
  for (Time t = field.start(); t <= field.end(); ++t)
    for (const auto& [id, r] : order)
      if (field.at_row(r, t)) out += std::to_string(id) + "," + std::to_string(t) + "\n";
  return out;
}

SpikeField parse_raster_csv(const std::string& text, std::vector<NeuronId> neurons, Time t0, Time t1) {
  SpikeField field(std::move(neurons), t0, t1);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "neuron,time")
    throw Error(ErrorCode::io_error, "raster CSV header must be 'neuron,time'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::io_error, "bad raster line: " + line);
    const auto i = static_cast<NeuronId>(std::stol(line.substr(0, comma)));
    const Time t = std::stoll(line.substr(comma + 1));
    if (field.row(i) < 0 || t < t0 || t > t1)
      throw Error(ErrorCode::io_error, "raster entry outside window: " + line);
    field.set(i, t, 1);
  }
  return field;
}

std::string edges_csv(const std::vector<std::pair<NeuronId, NeuronId>>& edges) {
  std::string out = "src,dst\n";
  for (const auto& [a, b] : edges) out += std::to_string(a) + "," + std::to_string(b) + "\n";
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view bytes) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "short write to " + p.string());
}

}  // namespace spikechain
