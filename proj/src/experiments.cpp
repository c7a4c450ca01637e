#include "spikechain/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>

#include "spikechain/constants.hpp"
#include "spikechain/forward_sim.hpp"
#include "spikechain/graph.hpp"
#include "spikechain/io.hpp"
#include "spikechain/isi_stats.hpp"

namespace spikechain {

namespace {

constexpr const char* kVersion = "spikechain 0.1.0";

using ojson = nlohmann::ordered_json;

// Artifacts are kept in memory until the run succeeds, then written at once.
struct Artifacts {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string bytes) { files[name] = std::move(bytes); }
  void add_json(const std::string& name, const ojson& j) { files[name] = j.dump(2) + "\n"; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ojson est(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

std::vector<NeuronId> window_neurons(const Config& cfg, const ModelSpec& spec) {
  std::vector<NeuronId> out(cfg.experiment.window_neurons.begin(), cfg.experiment.window_neurons.end());
  if (out.empty())
    for (int i = 0; i < spec.neuron_count(); ++i) out.push_back(i);
  return out;
}

std::string run_validate(const Config& cfg, const CoordinateRng&, Artifacts& art, int& code) {
  const auto spec = build_model(cfg);
  const auto report = validate_model(spec, 16);
  art.add_json("validation.json", report.to_json());
  code = report.violations.empty() ? 0 : 2;
  return std::string("regime=") + to_string(report.regime) + " e(delta)=" + fmt(report.e_delta) +
         " violations=" + std::to_string(report.violations.size());
}

std::string run_decompose(const Config& cfg, const CoordinateRng& src, Artifacts& art) {
  const auto spec = build_model(cfg);
  const NeuronId i = cfg.experiment.neuron;
  const Time t = cfg.experiment.t1;
  if (i < 0 || i >= spec.neuron_count()) throw Error(ErrorCode::config_error, "experiment.neuron: out of range");
  const auto ctx = context_at(src, spec, i, t);
  const SiteTimeKernel kernel(ctx, spec);
  const auto mode = mode_of(cfg).value_or(default_mode(spec));
  const auto w = kernel.weights(mode);
  ojson doc{{"neuron", i}, {"time", t}, {"last_spontaneous", ctx.last_xi}, {"kalikow", w.to_json()}};
  if (spec.age_independent() && spec.all_summable()) {
    try {
      doc["spacetime"] = spacetime_weights(spec, i, mode).to_json();
    } catch (const Error& e) {
      doc["spacetime"] = {{"error", e.what()}};
    }
  }
  art.add_json("decompose.json", doc);
  return "k_max=" + std::to_string(w.k_max) + " lambda(-1)=" + fmt(w.lambda_at(-1));
}

std::string run_sample_perfect(const Config& cfg, const CoordinateRng& src, Artifacts& art) {
  const auto spec = build_model(cfg);
  const auto neurons = window_neurons(cfg, spec);
  const auto& e = cfg.experiment;
  SampleStats stats;
  const auto field = e.sampler == "spacetime"
                         ? spacetime_sample(src, spec, neurons, e.t0, e.t1, e.budget, &stats, mode_of(cfg))
                         : perfect_sample(src, spec, neurons, e.t0, e.t1, e.budget, &stats, mode_of(cfg));
  const auto report = validate_model(spec, 16);
  art.add("raster.csv", raster_csv(field));
  art.add_json("raster.json", {{"seed", cfg.seed},
                               {"spec_hash", hex64(spec.hash())},
                               {"regime", to_string(report.regime)},
                               {"sampler", e.sampler},
                               {"neurons", neurons},
                               {"t0", e.t0},
                               {"t1", e.t1},
                               {"budget", e.budget},
                               {"stats", stats.to_json()}});
  return "spikes=" + std::to_string(field.spike_count()) + " cells=" + std::to_string(stats.cells);
}

std::string run_simulate(const Config& cfg, const CoordinateRng& src, Artifacts& art) {
  const auto spec = build_model(cfg);
  const auto field = simulate(spec, cfg.experiment.steps, cfg.experiment.burnin, src);
  art.add("raster.csv", raster_csv(field));
  art.add_json("raster.json", {{"seed", cfg.seed},
                               {"spec_hash", hex64(spec.hash())},
                               {"steps", cfg.experiment.steps},
                               {"burnin", cfg.experiment.burnin},
                               {"past", "spike_at_zero"}});
  return "spikes=" + std::to_string(field.spike_count());
}

std::string run_graph_tau(const Config& cfg, const CoordinateRng& src, Artifacts& art) {
  const auto& g = cfg.graph;
  const int kN = default_kN(g.neurons);
  std::vector<int> ks = g.ks;
  if (ks.empty())
    for (int k = 2; k <= kN; ++k) ks.push_back(k);
  if (ks.empty()) ks.push_back(1);
  const int k_max = std::max(*std::max_element(ks.begin(), ks.end()), 2 * kN);
  const auto taus = sample_tau(g.neurons, g.theta, g.neuron, k_max, g.reps, src);
  std::string csv = "k,estimate,se,bound,pass\n";
  bool all_ok = true;
  auto rows = ojson::array();
  for (int k : ks) {
    const auto hits = static_cast<std::uint64_t>(std::count_if(taus.begin(), taus.end(), [k](int t) { return t <= k; }));
    const auto p = proportion(hits, g.reps);
    const double bound = tau_tail_bound(g.neurons, g.theta, k);
    const bool ok = p.value <= bound + 3.0 * p.se;
    all_ok = all_ok && ok;
    csv += std::to_string(k) + "," + fmt(p.value) + "," + fmt(p.se) + "," + fmt(bound) + "," + (ok ? "1" : "0") + "\n";
    rows.push_back({{"k", k}, {"estimate", est(p)}, {"bound", bound}, {"pass", ok}});
  }
  const auto a_miss = static_cast<std::uint64_t>(
      std::count_if(taus.begin(), taus.end(), [kN](int t) { return t <= 2 * kN; }));
  const auto pa = proportion(a_miss, g.reps);
  const double a_bound = std::exp(2.0 * g.theta) / std::sqrt(static_cast<double>(g.neurons));
  const auto first = sample_er_digraph(g.neurons, g.theta, src, 0);
  art.add("tau_cdf.csv", csv);
  art.add("edges.csv", edges_csv(first.edges()));
  art.add_json("graph.json", {{"N", first.neurons()},
                              {"theta", first.theta()},
                              {"p", first.p()},
                              {"seed", cfg.seed},
                              {"replica", 0},
                              {"replica_seed", first.seed()},
                              {"edges", first.edge_count()}});
  art.add_json("report.json", {{"N", g.neurons},
                               {"theta", g.theta},
                               {"reps", g.reps},
                               {"tau_cdf", rows},
                               {"kN", kN},
                               {"p_A_complement", est(pa)},
                               {"p_A_complement_bound", a_bound},
                               {"all_within_bound", all_ok}});
  return std::string("tau bound ") + (all_ok ? "holds" : "violated") + " P(A^c)=" + fmt(pa.value);
}

std::string run_isi_cov(const Config& cfg, const CoordinateRng& src, Artifacts& art) {
  Theorem4Config t4;
  t4.ns = cfg.experiment.ns;
  t4.theta = cfg.graph.theta;
  t4.delta = cfg.model.delta;
  t4.phi = phi_of(cfg);
  t4.aging = aging_of(cfg);
  t4.weight = cfg.graph.weight;
  t4.graphs = cfg.experiment.graphs;
  t4.a_graphs = cfg.experiment.a_graphs;
  t4.steps = cfg.experiment.steps;
  t4.burnin = cfg.experiment.burnin;
  t4.neuron = cfg.graph.neuron;
  const auto report = theorem4_experiment(t4, src);
  std::string csv = "N,theta,delta,kN,p_A_complement,se,p_A_complement_bound,theorem4_bound,median_abs_cov,within_bound\n";
  for (const auto& c : report.cells)
    csv += std::to_string(c.n) + "," + fmt(t4.theta) + "," + fmt(t4.delta) + "," + std::to_string(c.kN) + "," +
           fmt(c.a_complement.value) + "," + fmt(c.a_complement.se) + "," + fmt(c.a_complement_bound) + "," +
           fmt(c.bound) + "," + fmt(c.median_abs_cov) + "," + (c.within_bound ? "1" : "0") + "\n";
  art.add("cells.csv", csv);
  art.add_json("report.json", report.to_json());
  return std::string("median |cov| ") + (report.median_nonincreasing ? "nonincreasing" : "not monotone");
}

std::string run_loss_memory(const Config& cfg, const CoordinateRng& src, Artifacts& art) {
  const auto spec = build_model(cfg);
  const auto profile = loss_of_memory_profile(spec, cfg.experiment.neuron, cfg.experiment.s_grid,
                                              cfg.experiment.reps, src);
  std::string csv = "s,disagreement,se,signed_gap,signed_gap_se\n";
  for (std::size_t q = 0; q < profile.s.size(); ++q)
    csv += std::to_string(profile.s[q]) + "," + fmt(profile.disagreement[q].value) + "," +
           fmt(profile.disagreement[q].se) + "," + fmt(profile.signed_gap[q].value) + "," +
           fmt(profile.signed_gap[q].se) + "\n";
  ojson doc = profile.to_json();
  const double beta = cfg.experiment.beta > 0.0 ? cfg.experiment.beta : cfg.g.rate;
  try {
    const auto rho = mgf_rho(spec, beta);
    doc["mgf"] = {{"beta", beta}, {"C", rho.c}, {"rho", rho.rho}, {"below_beta_star", rho.below_beta_star}};
  } catch (const Error& e) {
    doc["mgf"] = {{"error", e.what()}};
  }
  art.add("profile.csv", csv);
  art.add_json("report.json", doc);
  return std::string("c_hat=") + fmt(profile.c_hat) + (profile.dominated ? " dominated" : " not dominated");
}

std::string run_oracle_check(const Config& cfg, const CoordinateRng& src, Artifacts& art, int& code) {
  const auto spec = build_model(cfg);
  const auto check = oracle_check(spec, cfg.experiment.oracle_samples, src,
                                  cfg.experiment.budget, mode_of(cfg));
  art.add_json("oracle_check.json", check.to_json());
  code = check.pass() ? 0 : 2;
  return std::string("oracle ") + (check.pass() ? "agrees" : "disagrees") + " chi2=" + fmt(check.chi2);
}

// The output root is where a run lives, not what it is.
ojson config_without_output(const Config& cfg) {
  auto j = to_json(cfg);
  j.erase("output");
  return j;
}

std::filesystem::path root_of(const Config& cfg) { return cfg.output.dir; }

RunResult execute(const std::string& sub, const Config& cfg, const std::filesystem::path& dir) {
  RunResult result;
  result.dir = dir;
  const auto start = std::chrono::steady_clock::now();
  const CoordinateRng probe(cfg.seed);  // shared draw counter for timing.json
  Artifacts art;
  int code = 0;
  try {
    if (sub == "validate") result.summary = run_validate(cfg, probe, art, code);
    else if (sub == "decompose") result.summary = run_decompose(cfg, probe, art);
    else if (sub == "sample-perfect") result.summary = run_sample_perfect(cfg, probe, art);
    else if (sub == "simulate") result.summary = run_simulate(cfg, probe, art);
    else if (sub == "graph-tau") result.summary = run_graph_tau(cfg, probe, art);
    else if (sub == "isi-cov") result.summary = run_isi_cov(cfg, probe, art);
    else if (sub == "loss-memory") result.summary = run_loss_memory(cfg, probe, art);
    else if (sub == "oracle-check") result.summary = run_oracle_check(cfg, probe, art, code);
    else throw Error(ErrorCode::config_error, "unknown subcommand '" + sub + "'");
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e);
    result.summary = e.what();
    return result;
  }
  result.exit_code = code;
  ojson hashes = ojson::object();
  for (const auto& [name, bytes] : art.files) {
    write_file(dir / name, bytes);
    hashes[name] = hex64(fnv1a64(bytes));
  }
  result.manifest = {{"run_id", run_id(cfg, sub)},
                     {"subcommand", sub},
                     {"seed", cfg.seed},
                     {"version", kVersion},
                     {"exit_code", code},
                     {"summary", result.summary},
                     {"config", config_without_output(cfg)},
                     {"artifacts", hashes}};
  write_file(dir / "manifest.json", result.manifest.dump(2) + "\n");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // Wall clock and draw counts depend on scheduling, so they stay out of the manifest.
  write_file(dir / "timing.json",
             ojson{{"wall_seconds", secs}, {"rng_draws", probe.draws()}}.dump(2) + "\n");
  return result;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"validate",  "decompose", "sample-perfect", "simulate",
                                              "graph-tau", "isi-cov",   "loss-memory",    "oracle-check",
                                              "replay"};
  return names;
}

RunOptions with_environment(RunOptions opts) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  auto number = [](const std::string& name, const std::string& v) {
    try {
      std::size_t used = 0;
      const auto n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
      throw Error(ErrorCode::config_error, name + ": expected an unsigned integer, got '" + v + "'");
    }
  };
  if (!opts.seed)
    if (auto v = env("SPIKECHAIN_SEED")) opts.seed = number("SPIKECHAIN_SEED", *v);
  if (!opts.out) opts.out = env("SPIKECHAIN_OUT");
  if (!opts.reps)
    if (auto v = env("SPIKECHAIN_REPS")) opts.reps = number("SPIKECHAIN_REPS", *v);
  if (!opts.budget)
    if (auto v = env("SPIKECHAIN_BUDGET")) opts.budget = number("SPIKECHAIN_BUDGET", *v);
  if (!opts.quiet)
    if (auto v = env("SPIKECHAIN_QUIET")) opts.quiet = *v != "0";
  return opts;
}

Config apply_overrides(Config cfg, const std::string& sub, const RunOptions& opts) {
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.output.dir = *opts.out;
  if (opts.budget) cfg.experiment.budget = *opts.budget;
  if (opts.reps) {
    if (sub == "graph-tau") cfg.graph.reps = *opts.reps;
    else if (sub == "isi-cov") cfg.experiment.graphs = *opts.reps;
    else if (sub == "oracle-check") cfg.experiment.oracle_samples = *opts.reps;
    else cfg.experiment.reps = *opts.reps;
  }
  return cfg;
}

std::string run_id(const Config& cfg, const std::string& sub) {
  auto j = to_json(cfg);
  j.erase("output");
  return hex64(fnv1a64(sub + "\n" + j.dump()));
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::budget_exceeded: return 3;
    case ErrorCode::config_error:
    case ErrorCode::io_error: return 4;
    default: return 2;
  }
}

RunResult run_subcommand(const std::string& sub, const Config& cfg) {
  return execute(sub, cfg, root_of(cfg) / run_id(cfg, sub));
}

RunResult replay_manifest(const std::filesystem::path& path) {
  ojson manifest;
  try {
    manifest = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config_error, path.string() + ": " + e.what());
  }
  if (!manifest.contains("config") || !manifest.contains("subcommand") || !manifest.contains("artifacts"))
    throw Error(ErrorCode::config_error, path.string() + ": not a run manifest");
  const auto cfg = parse_config(nlohmann::json::parse(manifest["config"].dump()));
  const auto sub = manifest["subcommand"].get<std::string>();
  const auto dir = path.parent_path() / "replay";
  auto result = execute(sub, cfg, dir);
  if (result.exit_code != manifest.value("exit_code", 0)) return result;
  std::vector<std::string> mismatched;
  for (const auto& [name, hash] : manifest["artifacts"].items()) {
    const auto& got = result.manifest["artifacts"];
    if (!got.contains(name) || got[name] != hash) mismatched.push_back(name);
  }
  if (!mismatched.empty()) {
    result.exit_code = 2;
    result.summary = "replay differs in";
    for (const auto& m : mismatched) result.summary += " " + m;
  } else {
    result.summary = "replay identical (" + std::to_string(manifest["artifacts"].size()) + " artifacts)";
  }
  return result;
}

ojson OracleCheck::to_json() const {
  auto rates = ojson::array();
  for (std::size_t i = 0; i < oracle_rate.size(); ++i)
    rates.push_back({{"neuron", i}, {"oracle", oracle_rate[i]}, {"sampled", est(sampled_rate[i])}, {"z", z[i]}});
  return {{"samples", samples},      {"rates", rates},     {"oracle_joint", oracle_joint},
          {"joint_counts", joint_counts}, {"chi2", chi2}, {"chi2_critical_0.01", chi2_critical},
          {"rates_ok", rates_ok},    {"joint_ok", joint_ok}};
}

OracleCheck oracle_check(const ModelSpec& spec, std::uint64_t samples, const CoordinateRng& src,
                         std::size_t budget, std::optional<MassMode> mode) {
  if (samples == 0) throw Error(ErrorCode::config_error, "oracle samples must be positive");
  const MarkovOracle oracle(spec);
  const int n = spec.neuron_count();
  const MassMode m = mode.value_or(default_mode(spec));
  std::vector<std::uint32_t> config(samples);
  std::exception_ptr err;
  std::uint64_t err_index = samples;
#pragma omp parallel for schedule(dynamic, 256)
  for (std::uint64_t r = 0; r < samples; ++r) {
    try {
      ClanEngine engine(spec, src.derive(StreamTag::replica, r), m);
      std::uint32_t c = 0;
      for (int i = 0; i < n; ++i) c |= static_cast<std::uint32_t>(engine.sample(i, 0, budget)) << i;
      config[r] = c;
    } catch (...) {
#pragma omp critical(spikechain_oracle)
      if (r < err_index) {
        err_index = r;
        err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  OracleCheck out;
  out.samples = samples;
  out.oracle_joint = oracle.newest_config_distribution();
  out.joint_counts.assign(out.oracle_joint.size(), 0);
  for (auto c : config) ++out.joint_counts[c];
  for (int i = 0; i < n; ++i) {
    std::uint64_t hits = 0;
    for (auto c : config) hits += (c >> i) & 1u;
    const double p = oracle.spike_rate(i);
    out.oracle_rate.push_back(p);
    out.sampled_rate.push_back(proportion(hits, samples));
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    const double gap = out.sampled_rate.back().value - p;
    out.z.push_back(se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : INFINITY));
    if (std::abs(out.z.back()) > 3.0) out.rates_ok = false;
  }
  int cells = 0;
  for (std::size_t c = 0; c < out.oracle_joint.size(); ++c) {
    const double e = out.oracle_joint[c] * static_cast<double>(samples);
    if (e <= 0.0) {
      if (out.joint_counts[c] > 0) out.joint_ok = false;
      continue;
    }
    ++cells;
    const double d = static_cast<double>(out.joint_counts[c]) - e;
    out.chi2 += d * d / e;
  }
  if (cells >= 2) {
    out.chi2_critical = chi_square_upper_quantile(cells - 1, 0.01);
    if (out.chi2 > out.chi2_critical) out.joint_ok = false;
  }
  return out;
}

}  // namespace spikechain
