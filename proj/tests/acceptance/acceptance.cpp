// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "spikechain/constants.hpp"
#include "spikechain/experiments.hpp"
#include "spikechain/graph.hpp"
#include "spikechain/io.hpp"
#include "spikechain/isi_stats.hpp"
#include "spikechain/kalikow.hpp"
#include "spikechain/perfect_sim.hpp"

using namespace spikechain;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Random attractive site-time instance with N ≤ 5 neurons.
struct Instance {
  ModelSpec spec;
  SiteTimeContext ctx;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 2 + static_cast<int>(u(rng) * 4.0);  // 2..5
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b && u(rng) < 0.6) w[a * n + b] = 0.1 + 1.4 * u(rng);
  PhiDescriptor phi;
  phi.family = u(rng) < 0.5 ? PhiFamily::saturated_linear : PhiFamily::sigmoid_floor;
  phi.gamma = 0.05 + 0.5 * u(rng);
  AgingDescriptor g;
  if (u(rng) < 0.5) {
    g.family = AgingFamily::finite_support;
    g.support = 1 + static_cast<Time>(u(rng) * 3.0);
  }
  const double delta = 0.1 + 0.8 * u(rng);
  ModelSpec spec(n, delta, w, {phi}, {g});
  const int age = 1 + static_cast<int>(u(rng) * (n <= 3 ? 4.0 : 3.0));
  const Time t = 0, R = -age;
  std::vector<std::uint8_t> xi(static_cast<std::size_t>(n) * age, 0);
  const NeuronId target = static_cast<NeuronId>(u(rng) * n);
  for (int j = 0; j < n; ++j)
    for (int s = 0; s < age; ++s)
      xi[j * age + s] = j == target ? (s == 0) : (u(rng) < delta);
  auto ctx = make_context(spec, target, t, R, xi);
  return {std::move(spec), std::move(ctx)};
}

// Compatible histories x ≥ ξ on [R, t−1]; all of them when few, else a random subset.
std::vector<std::vector<std::uint8_t>> histories(const SiteTimeContext& ctx, std::mt19937_64& rng) {
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < ctx.xi.size(); ++c)
    if (!ctx.xi[c]) free.push_back(c);
  constexpr std::size_t kCap = 4096;
  std::vector<std::vector<std::uint8_t>> out;
  auto make = [&](std::uint64_t mask) {
    auto x = ctx.xi;
    for (std::size_t b = 0; b < free.size(); ++b)
      if ((mask >> b) & 1u) x[free[b]] = 1;
    out.push_back(std::move(x));
  };
  if (free.size() < 12) {
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << free.size()); ++m) make(m);
  } else {
    make(0);
    make((std::uint64_t{1} << free.size()) - 1);
    std::uniform_int_distribution<std::uint64_t> d(0, (std::uint64_t{1} << free.size()) - 1);
    while (out.size() < kCap) make(d(rng));
  }
  return out;
}

Outcome criteria_1_2(bool reconstruction) {
  std::mt19937_64 rng(20240601);
  double worst_rec = 0.0, worst_norm = 0.0;
  bool bar_ok = true;
  std::size_t evaluated = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto inst = random_instance(rng);
    const auto& ctx = inst.ctx;
    const auto w = lambda_weights(ctx, inst.spec);
    double total = 0.0;
    for (int k = -1; k <= w.k_max; ++k) total += w.lambda_at(k);
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
    for (int k = 1; k <= w.k_max; ++k)
      if (w.lambda_at(k) > lambda_bar(ctx, inst.spec, k) + 1e-15) bar_ok = false;
    if (!reconstruction) continue;
    for (const auto& x : histories(ctx, rng)) {
      const int age = static_cast<int>(ctx.age_since_xi());
      const HistoryFn fn = [&](NeuronId j, Time s) {
        return static_cast<int>(x[static_cast<std::size_t>(j) * age + (s - ctx.last_xi)]);
      };
      worst_rec = std::max(worst_rec, reconstruct_transition(ctx, inst.spec, fn));
      ++evaluated;
    }
  }
  if (reconstruction)
    return {worst_rec < 1e-9, "max reconstruction error " + num(worst_rec) + " over " +
                                  std::to_string(evaluated) + " histories"};
  return {worst_norm < 1e-12 && bar_ok,
          "max |sum lambda - 1| " + num(worst_norm) + ", lambda_bar dominates: " + (bar_ok ? "yes" : "no")};
}

Outcome criterion_3() {
  std::string detail;
  bool ok = true;
  const std::pair<const char*, ModelSpec> cases[] = {
      {"single", presets::single_neuron(0.3)},
      {"two", presets::two_neuron_support1(0.5, 0.2, 1.0)},
  };
  std::uint64_t seed = 3;
  for (const auto& [name, spec] : cases) {
    const auto check = oracle_check(spec, 100000, CoordinateRng(seed++));
    ok = ok && check.pass();
    detail += std::string(name) + ": rate " + num(check.sampled_rate[0].value) + " vs " + num(check.oracle_rate[0]) +
              " (z " + num(check.z[0]) + "), chi2 " + num(check.chi2) + "/" + num(check.chi2_critical) + "; ";
  }
  return {ok, detail};
}

Outcome criterion_4() {
  const auto base = presets::two_neuron_support1(0.5, 0.2, 1.0);
  const auto ds = delta_star(base);
  const double delta = ds.value + 0.1;
  const auto spec = base.with_delta(delta);
  const double e = e_delta(spec, delta);
  const auto surv = clan_survival(CoordinateRng(4), spec, 0, 10000, 10);
  bool ok = surv.budget_failures == 0;
  std::string detail = "delta " + num(delta) + ", e(delta) " + num(e) + ", P(N_STOP>n):";
  for (int n = 1; n <= 10; ++n) {
    const auto& p = surv.survival[n - 1];
    if (p.value > std::pow(e, n) + 3.0 * p.se) ok = false;
    if (n <= 3) detail += " " + num(p.value);
  }
  return {ok, detail};
}

Outcome criterion_5() {
  bool ok = true;
  std::string detail;
  for (int n : {50, 200})
    for (double theta : {0.0, 1.0}) {
      const int kN = default_kN(n);
      std::vector<int> ks;
      for (int k = 2; k <= kN; ++k) ks.push_back(k);
      const auto est = estimate_tau_cdf(n, theta, 0, ks, 10000, CoordinateRng(5 + n + static_cast<int>(theta)));
      double worst = -1.0;
      for (std::size_t a = 0; a < ks.size(); ++a) {
        const double slack = est[a].value - tau_tail_bound(n, theta, ks[a]) - 3.0 * est[a].se;
        worst = std::max(worst, slack);
        if (slack > 0.0) ok = false;
      }
      detail += "(" + std::to_string(n) + "," + num(theta) + ") worst margin " + num(worst) + "; ";
    }
  return {ok, detail};
}

Outcome criterion_6() {
  bool ok = true;
  std::string detail;
  for (int n : {50, 100}) {
    const int kN = default_kN(n);
    const auto taus = sample_tau(n, 0.0, 0, 2 * kN, 10000, CoordinateRng(600 + n));
    const auto miss = static_cast<std::uint64_t>(std::count_if(taus.begin(), taus.end(), [](int t) { return t != kTauExceeds; }));
    const auto p = proportion(miss, taus.size());
    const double bound = 1.0 / std::sqrt(static_cast<double>(n));
    if (p.value > bound + 3.0 * p.se) ok = false;
    detail += "N=" + std::to_string(n) + ": " + num(p.value) + " <= " + num(bound) + "; ";
  }
  return {ok, detail};
}

Outcome criterion_7() {
  const auto spikes = forward_spike_times(presets::single_neuron(0.3), 0, 1000000, 0, CoordinateRng(7));
  const auto est = adjacent_isi_covariance(spikes);
  std::vector<Time> synthetic{0};
  for (int k = 0; k < 4000; ++k) synthetic.push_back(synthetic.back() + (k % 2 == 0 ? 2 : 8));
  const double period2 = adjacent_isi_covariance(synthetic).cov.value;
  const bool ok = std::abs(est.cov.value) <= 3.0 * est.cov.se && period2 == -9.0;
  return {ok, "renewal cov " + num(est.cov.value) + " (se " + num(est.cov.se) + "), period-2 cov " + num(period2)};
}

Outcome criterion_8() {
  Theorem4Config cfg;  // N ∈ {20, 50, 100}, δ = 0.5, ϑ = 0
  cfg.phi.gamma = 0.2;
  cfg.aging.family = AgingFamily::finite_support;
  cfg.aging.support = 2;
  const auto report = theorem4_experiment(cfg, CoordinateRng(8));
  bool within = true;
  std::string detail = "median |cov|:";
  for (const auto& c : report.cells) {
    within = within && c.within_bound;
    detail += " N=" + std::to_string(c.n) + " " + num(c.median_abs_cov) + " (" + std::to_string(c.graphs.size()) +
              " A-graphs, bound " + num(c.bound) + ")";
  }
  detail += std::string("; nonincreasing ") + (report.median_nonincreasing ? "yes" : "no") + ", within bound " +
            (within ? "yes" : "no");
  return {report.median_nonincreasing && within, detail};
}

Outcome criterion_9() {
  std::vector<int> grid;
  for (int s = 2; s <= 20; ++s) grid.push_back(s);
  const auto three = presets::three_neuron_attractive(0.8, 0.02, 3);
  const auto p1 = loss_of_memory_profile(three, 0, grid, 20000, CoordinateRng(9));
  const double beta = 3.0;
  const auto expo = presets::exponential_memory(0.5, 0.2, 2.0, beta);
  const auto p2 = loss_of_memory_profile(expo, 0, grid, 20000, CoordinateRng(10));
  const auto rho = mgf_rho(expo, beta);
  bool slope_ok = false;
  std::string slope = "none";
  if (p2.log_slope && rho.rho > 0.0 && rho.rho < 1.0) {
    slope_ok = p2.log_slope->value <= std::log(rho.rho) + 3.0 * p2.log_slope->se;
    slope = num(p2.log_slope->value) + " (se " + num(p2.log_slope->se) + ", " + std::to_string(p2.fit_points) +
            " points)";
  }
  return {p1.dominated && slope_ok, "3-neuron c_hat " + num(p1.c_hat) + " dominated " +
                                        (p1.dominated ? "yes" : "no") + "; exponential slope " + slope +
                                        " vs log rho " + num(std::log(rho.rho))};
}

int run_cli(const std::string& cli, const std::string& args) {
  const int status = std::system((cli + " " + args + " --quiet >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> run_artifacts(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() == "timing.json") continue;
    out[fs::relative(entry.path(), root).string()] = read_file(entry.path());
  }
  return out;
}

Outcome criterion_10() {
  const char* cli_env = std::getenv("SPIKECHAIN_CLI");
  const char* cfg_env = std::getenv("SPIKECHAIN_CONFIGS");
  if (!cli_env || !cfg_env) return {false, "SPIKECHAIN_CLI and SPIKECHAIN_CONFIGS must be set"};
  const std::string config = (fs::path(cfg_env) / "quick.json").string();
  std::string detail;
  bool ok = true;
  for (const auto& sub : subcommands()) {
    if (sub == "replay") continue;
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
      const auto dir = fs::temp_directory_path() / ("spikechain_acceptance_" + std::to_string(r));
      fs::remove_all(dir);
      const int code = run_cli(cli_env, sub + " --config " + config + " --out " + dir.string());
      if (code != 0) {
        ok = false;
        detail += sub + " exit " + std::to_string(code) + "; ";
      }
      runs[r] = run_artifacts(dir);
    }
    if (runs[0] != runs[1] || runs[0].empty()) {
      ok = false;
      detail += sub + " differs; ";
    }
  }
  return {ok, ok ? "all subcommands byte-identical across two runs" : detail};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional filter: run only the listed criteria, e.g. `acceptance 3 8`.
  std::vector<int> only;
  for (int a = 1; a < argc; ++a) only.push_back(std::atoi(argv[a]));
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [] { return criteria_1_2(true); }},
      {2, [] { return criteria_1_2(false); }},
      {3, criterion_3},
      {4, criterion_4},
      {5, criterion_5},
      {6, criterion_6},
      {7, criterion_7},
      {8, criterion_8},
      {9, criterion_9},
      {10, criterion_10},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += out.pass ? 0 : 1;
    std::printf("criterion %d: %s (%.1f s) %s\n", id, out.pass ? "PASS" : "FAIL", secs, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
