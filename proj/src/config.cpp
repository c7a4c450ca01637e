#include "spikechain/config.hpp"

#include <set>

#include "spikechain/io.hpp"

namespace spikechain {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::config_error, path + ": " + what);
}

class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail(path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return;
    const std::string where = path_ + "." + key;
    try {
      check_type(*it, out, where);
      out = it->template get<T>();
    } catch (const json::exception& e) {
      fail(where, e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [k, v] : doc_.items())
      if (!seen_.count(k)) fail(path_ + "." + k, "unknown key");
  }

 private:
  template <class T>
  static void check_type(const json& v, const T&, const std::string& where) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) fail(where, "expected a number");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<long long>() >= 0))
        fail(where, "expected a nonnegative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(where, "expected an integer");
    } else {
      if (!v.is_array()) fail(where, "expected an array");
    }
  }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

Config parse_config(const json& doc) {
  Config cfg;
  Section top(doc, "config");
  top.get("seed", cfg.seed);
  if (const auto* m = top.child("model")) {
    Section s(*m, "model");
    auto& c = cfg.model;
    s.get("preset", c.preset);
    s.get("neurons", c.neurons);
    s.get("delta", c.delta);
    s.get("coupling", c.coupling);
    s.get("weights", c.weights);
    s.get("neighborhood", c.neighborhood);
    s.get("layers", c.layers);
    s.get("coordinates", c.coordinates);
    s.get("lattice_dim", c.lattice_dim);
    s.get("lattice_side", c.lattice_side);
    s.get("lattice_alpha", c.lattice_alpha);
    s.finish();
  }
  if (const auto* m = top.child("phi")) {
    Section s(*m, "phi");
    s.get("family", cfg.phi.family);
    s.get("gamma", cfg.phi.gamma);
    s.get("refractory_tau", cfg.phi.refractory_tau);
    s.finish();
  }
  if (const auto* m = top.child("g")) {
    Section s(*m, "g");
    s.get("family", cfg.g.family);
    s.get("scale", cfg.g.scale);
    s.get("rate", cfg.g.rate);
    s.get("exponent", cfg.g.exponent);
    s.get("support", cfg.g.support);
    s.finish();
  }
  if (const auto* m = top.child("graph")) {
    Section s(*m, "graph");
    s.get("neurons", cfg.graph.neurons);
    s.get("theta", cfg.graph.theta);
    s.get("neuron", cfg.graph.neuron);
    s.get("ks", cfg.graph.ks);
    s.get("reps", cfg.graph.reps);
    s.get("weight", cfg.graph.weight);
    s.finish();
  }
  if (const auto* m = top.child("experiment")) {
    Section s(*m, "experiment");
    auto& e = cfg.experiment;
    s.get("neuron", e.neuron);
    s.get("window_neurons", e.window_neurons);
    s.get("t0", e.t0);
    s.get("t1", e.t1);
    s.get("budget", e.budget);
    s.get("mode", e.mode);
    s.get("sampler", e.sampler);
    s.get("steps", e.steps);
    s.get("burnin", e.burnin);
    s.get("reps", e.reps);
    s.get("ns", e.ns);
    s.get("graphs", e.graphs);
    s.get("a_graphs", e.a_graphs);
    s.get("s_grid", e.s_grid);
    s.get("beta", e.beta);
    s.get("oracle_samples", e.oracle_samples);
    s.finish();
  }
  if (const auto* m = top.child("output")) {
    Section s(*m, "output");
    s.get("dir", cfg.output.dir);
    s.finish();
  }
  top.finish();
  // Enumerations are checked here so errors name the field.
  const std::set<std::string> presets{"zero_interaction",        "single_neuron",      "two_neuron_support1",
                                      "three_neuron_attractive", "exponential_memory", "lattice_window",
                                      "explicit"};
  if (!presets.count(cfg.model.preset)) fail("model.preset", "unknown preset '" + cfg.model.preset + "'");
  if (cfg.model.neighborhood != "by_weight" && cfg.model.neighborhood != "lattice_shells" &&
      cfg.model.neighborhood != "explicit_layers")
    fail("model.neighborhood", "unknown policy '" + cfg.model.neighborhood + "'");
  if (cfg.experiment.mode != "auto" && cfg.experiment.mode != "exact" && cfg.experiment.mode != "dominated")
    fail("experiment.mode", "expected auto, exact or dominated");
  if (cfg.experiment.sampler != "clan" && cfg.experiment.sampler != "spacetime")
    fail("experiment.sampler", "expected clan or spacetime");
  try {
    phi_family_from_string(cfg.phi.family);
  } catch (const Error& e) {
    fail("phi.family", e.what());
  }
  try {
    aging_family_from_string(cfg.g.family);
  } catch (const Error& e) {
    fail("g.family", e.what());
  }
  if (cfg.experiment.t1 < cfg.experiment.t0) fail("experiment.t1", "must be >= t0");
  if (cfg.experiment.steps < 0) fail("experiment.steps", "must be >= 0");
  if (cfg.experiment.burnin < 0) fail("experiment.burnin", "must be >= 0");
  if (cfg.graph.neurons < 2) fail("graph.neurons", "must be >= 2");
  if (cfg.graph.theta < 0.0) fail("graph.theta", "must be >= 0");
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::config_error, e.what());
  }
  return parse_config(doc);
}

nlohmann::ordered_json to_json(const Config& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["model"] = {{"preset", c.model.preset},
                {"neurons", c.model.neurons},
                {"delta", c.model.delta},
                {"coupling", c.model.coupling},
                {"weights", c.model.weights},
                {"neighborhood", c.model.neighborhood},
                {"layers", c.model.layers},
                {"coordinates", c.model.coordinates},
                {"lattice_dim", c.model.lattice_dim},
                {"lattice_side", c.model.lattice_side},
                {"lattice_alpha", c.model.lattice_alpha}};
  j["phi"] = {{"family", c.phi.family}, {"gamma", c.phi.gamma}, {"refractory_tau", c.phi.refractory_tau}};
  j["g"] = {{"family", c.g.family},
            {"scale", c.g.scale},
            {"rate", c.g.rate},
            {"exponent", c.g.exponent},
            {"support", c.g.support}};
  j["graph"] = {{"neurons", c.graph.neurons}, {"theta", c.graph.theta}, {"neuron", c.graph.neuron},
                {"ks", c.graph.ks},           {"reps", c.graph.reps},   {"weight", c.graph.weight}};
  const auto& e = c.experiment;
  j["experiment"] = {{"neuron", e.neuron},
                     {"window_neurons", e.window_neurons},
                     {"t0", e.t0},
                     {"t1", e.t1},
                     {"budget", e.budget},
                     {"mode", e.mode},
                     {"sampler", e.sampler},
                     {"steps", e.steps},
                     {"burnin", e.burnin},
                     {"reps", e.reps},
                     {"ns", e.ns},
                     {"graphs", e.graphs},
                     {"a_graphs", e.a_graphs},
                     {"s_grid", e.s_grid},
                     {"beta", e.beta},
                     {"oracle_samples", e.oracle_samples}};
  j["output"] = {{"dir", c.output.dir}};
  return j;
}

std::string dump_config(const Config& cfg) { return to_json(cfg).dump(2) + "\n"; }

PhiDescriptor phi_of(const Config& cfg) {
  PhiDescriptor p;
  p.family = phi_family_from_string(cfg.phi.family);
  p.delta = cfg.model.delta;
  p.gamma = cfg.phi.gamma;
  p.refractory_tau = cfg.phi.refractory_tau;
  return p;
}

AgingDescriptor aging_of(const Config& cfg) {
  AgingDescriptor a;
  a.family = aging_family_from_string(cfg.g.family);
  a.scale = cfg.g.scale;
  a.rate = cfg.g.rate;
  a.exponent = cfg.g.exponent;
  a.support = cfg.g.support;
  return a;
}

ModelSpec build_model(const Config& cfg) {
  const auto& m = cfg.model;
  try {
    if (m.preset == "zero_interaction") return presets::zero_interaction(m.neurons, m.delta);
    if (m.preset == "single_neuron") return presets::single_neuron(m.delta);
    if (m.preset == "two_neuron_support1")
      return presets::two_neuron_support1(m.delta, cfg.phi.gamma, m.coupling);
    if (m.preset == "three_neuron_attractive")
      return presets::three_neuron_attractive(m.delta, cfg.phi.gamma, cfg.g.support);
    if (m.preset == "exponential_memory")
      return presets::exponential_memory(m.delta, cfg.phi.gamma, cfg.g.scale, cfg.g.rate);
    if (m.preset == "lattice_window")
      return presets::lattice_window(m.lattice_dim, m.lattice_side, m.lattice_alpha, m.delta, cfg.phi.gamma);
    const int n = m.neurons;
    if (static_cast<int>(m.weights.size()) != n) fail("model.weights", "expected neurons rows");
    std::vector<double> w;
    for (const auto& row : m.weights) {
      if (static_cast<int>(row.size()) != n) fail("model.weights", "expected neurons columns");
      w.insert(w.end(), row.begin(), row.end());
    }
    std::vector<int> layers;
    for (const auto& row : m.layers) layers.insert(layers.end(), row.begin(), row.end());
    const auto policy = m.neighborhood == "lattice_shells"    ? NeighborhoodPolicy::lattice_shells
                        : m.neighborhood == "explicit_layers" ? NeighborhoodPolicy::explicit_layers
                                                              : NeighborhoodPolicy::by_weight;
    return ModelSpec(n, m.delta, std::move(w), {phi_of(cfg)}, {aging_of(cfg)}, policy, std::move(layers),
                     m.coordinates);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_error) throw;
    throw Error(ErrorCode::config_error, std::string("model: ") + e.what());
  }
}

std::optional<MassMode> mode_of(const Config& cfg) {
  if (cfg.experiment.mode == "exact") return MassMode::exact;
  if (cfg.experiment.mode == "dominated") return MassMode::dominated;
  return std::nullopt;
}

}  // namespace spikechain
