// Acceptance criteria 1-10. One PASS/FAIL line per criterion; exit status 1
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "slb/analysis.hpp"
#include "slb/commands.hpp"
#include "slb/config.hpp"
#include "slb/error.hpp"
#include "slb/potentials.hpp"
#include "slb/spectral.hpp"

using namespace slb;
namespace fs = std::filesystem;
using Exact = boost::multiprecision::cpp_rational;

namespace {

// Pinned tolerances and limits.
constexpr double kSpectralTol = 1e-8;
constexpr double kLemmaTol = 1e-9;
constexpr double kMonteCarloSigmas = 4.0;
constexpr int kMonteCarloRounds = 100000;
constexpr double kZ99 = 2.326;  // one-sided 99% normal quantile
constexpr double kSpectralSeconds = 60;
constexpr double kLemmaSeconds = 60;
constexpr double kQuarterSeconds = 300;
constexpr double kExactNeSeconds = 300;
constexpr double kTrendSeconds = 900;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool le(double lhs, double rhs) { return lhs <= rhs + kSpectralTol * std::max(1.0, std::abs(rhs)); }

SpeedProfile random_rational_profile(std::mt19937_64& rng, int n) {
  static const int dens[] = {1, 2, 3, 4, 5, 6};
  std::uniform_int_distribution<int> pick_den(0, 5);
  std::vector<Ratio> values;
  for (int i = 0; i < n; ++i) {
    int q = dens[pick_den(rng)];
    int p = std::uniform_int_distribution<int>(q, 4 * q)(rng);
    values.emplace_back(p, q);
  }
  return SpeedProfile::from_rationals(values);
}

const std::vector<GraphFamily> kFamilies = {GraphFamily::complete, GraphFamily::cycle,
                                            GraphFamily::path,     GraphFamily::torus2d,
                                            GraphFamily::grid2d,   GraphFamily::hypercube};

// 1. lambda2 simple, Fiedler, diameter bounds and interlacing.
Outcome spectral_bounds() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  Outcome out;
  int graphs = 0, profiles = 0, failures = 0;
  for (auto family : kFamilies) {
    for (int n : {4, 8, 16, 32, 64}) {
      auto g = make_graph_with_nodes(family, n);
      ++graphs;
      const double lambda2 = second_smallest_eigenvalue(laplacian(g));
      bool ok = le(4.0 / (n * n), lambda2) &&
                le(lambda2, static_cast<double>(n) / (n - 1) * g.min_degree()) &&
                le(4.0 / (n * lambda2), g.diameter());
      for (int t = 0; t < 20; ++t) {
        auto sp = random_rational_profile(rng, n);
        const double mu2 = second_smallest_eigenvalue(symmetrized_generalized_laplacian(g, sp));
        ++profiles;
        if (!(le(lambda2 / sp.s_max(), mu2) && le(mu2, lambda2 / sp.s_min()))) {
          ok = false;
          ++failures;
        }
      }
      if (!ok) {
        out.pass = false;
        out.detail += fmt::format(" [{} n={} fails]", to_string(family), n);
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs > kSpectralSeconds) out.pass = false;
  out.detail = fmt::format("{} graphs, {} speed profiles, {} interlacing failures, {:.1f}s{}",
                           graphs, profiles, failures, secs, out.detail);
  return out;
}

// 2. Cheeger sandwich with exhaustive isoperimetric number.
Outcome cheeger() {
  Outcome out;
  int graphs = 0;
  for (auto family : kFamilies) {
    for (int n = 3; n <= 12; ++n) {
      GraphTopology g = make_complete(2);
      try {
        g = make_graph_with_nodes(family, n);
      } catch (const ConfigError&) {
        continue;  // no member of this family with n nodes
      }
      ++graphs;
      const double i = boost::rational_cast<double>(isoperimetric_number(g, 12));
      const double lambda2 = second_smallest_eigenvalue(laplacian(g));
      const double lower = i * i / (2.0 * g.max_degree());
      const double upper = 2 * i;
      if (!(le(lower, lambda2) && le(lambda2, upper))) {
        out.pass = false;
        out.detail += fmt::format(" [{} n={}: {} <= {} <= {}]", to_string(family), n, lower,
                                  lambda2, upper);
      }
    }
  }
  out.detail = fmt::format("{} graphs with n <= 12{}", graphs, out.detail);
  return out;
}

// 3. Exact-oracle lemma suite.
Outcome lemma_suite() {
  const auto t0 = Clock::now();
  SuiteOptions options;
  options.tolerance = kLemmaTol;
  const auto corpus = build_corpus(CorpusKind::standard);
  const auto report = verify_lemma_suite(corpus, options);
  Outcome out;
  out.pass = report.all_hold();
  const auto names = report.lemma_names();
  for (const char* required :
       {"drop_quadratic", "psi0_drop_lambda2", "psi1_drop_bound", "variance_bound",
        "ldelta_psi0_lower", "ldelta_psi0_upper", "psi0_identity", "psi1_nonnegative",
        "psi1_deviation_form", "psi1_increment_equals_phi1_increment", "granularity_step"}) {
    if (std::find(names.begin(), names.end(), required) == names.end()) {
      out.pass = false;
      out.detail += fmt::format(" [missing {}]", required);
    }
  }
  const double secs = seconds_since(t0);
  if (secs > kLemmaSeconds) out.pass = false;
  out.detail = fmt::format("{} instances, {} checks, {} violations, {:.1f}s{}", corpus.size(),
                           report.checks.size(), report.violations(), secs, out.detail);
  return out;
}

// Exact expectation of the Psi0 drop on K2, w = (2, 0), alpha = 4 by
// enumerating the binomial number of movers.
Exact k2_enumerated_drop() {
  const Exact p(1, 8);
  const Exact q = 1 - p;
  const Exact probs[] = {q * q, 2 * p * q, p * p};
  Exact expected(0);
  for (int k = 0; k <= 2; ++k) {
    const Exact& prob = probs[k];
    Exact e = Exact(2 - k) - 1;  // deviation at node 0; node 1 mirrors it
    expected += prob * 2 * e * e;
  }
  return Exact(2) - expected;
}

// 4. Closed-form drop against Monte Carlo, plus the K2 golden value.
Outcome monte_carlo() {
  Outcome out;
  const auto corpus = build_corpus(CorpusKind::standard);
  std::vector<const CorpusInstance*> picked;
  std::vector<const CorpusInstance*> candidates;
  for (const auto& c : corpus)
    if (!is_nash(c.graph, c.speeds, c.state)) candidates.push_back(&c);
  for (int k = 0; k < 10; ++k) picked.push_back(candidates[k * candidates.size() / 10]);

  int within = 0;
  double worst = 0;
  for (std::size_t k = 0; k < picked.size(); ++k) {
    const auto& c = *picked[k];
    auto p = ProtocolParams::standard(c.speeds, c.state.is_uniform() ? Variant::algorithm1
                                                                     : Variant::algorithm2);
    p.rng_seed = 4000 + k;
    p.sampler = k % 2 ? Sampler::aggregated : Sampler::per_task;
    const double exact = exact_expected_psi0_drop(c.graph, c.speeds, c.state, p);
    const double psi0 = snapshot(c.speeds, c.state).psi0;
    double sum = 0, sumsq = 0;
    for (int r = 0; r < kMonteCarloRounds; ++r) {
      const double d = psi0 - snapshot(c.speeds, step_round(c.graph, c.speeds, c.state, p, r).state).psi0;
      sum += d;
      sumsq += d * d;
    }
    const double mean = sum / kMonteCarloRounds;
    const double se = std::sqrt(std::max(0.0, sumsq / kMonteCarloRounds - mean * mean) / kMonteCarloRounds);
    const double z = se > 0 ? std::abs(mean - exact) / se : (mean == exact ? 0 : INFINITY);
    worst = std::max(worst, z);
    if (z <= kMonteCarloSigmas) {
      ++within;
    } else {
      out.detail += fmt::format(" [{}: mean {} exact {} se {}]", c.label(), mean, exact, se);
    }
  }

  auto k2 = make_complete(2);
  auto u2 = SpeedProfile::uniform(2);
  ProtocolParams p;
  p.alpha = 4;
  const double closed = exact_expected_psi0_drop(k2, u2, LoadState::uniform({2, 0}), p);
  const Exact enumerated = k2_enumerated_drop();
  const bool golden = closed == 7.0 / 16 && enumerated == Exact(7, 16);
  out.pass = within == static_cast<int>(picked.size()) && golden;
  out.detail = fmt::format("{}/{} states within {} SE (worst {:.2f}); K2 golden closed {} enumerated {}{}",
                           within, picked.size(), kMonteCarloSigmas, worst, closed,
                           enumerated.str(), out.detail);
  return out;
}

// 5. Probability at least 3/4 of reaching psi0 <= 4 psi_c within 2 gamma ln(m/n).
Outcome three_quarters() {
  const auto t0 = Clock::now();
  Outcome out;
  for (auto family : {GraphFamily::complete, GraphFamily::cycle}) {
    const int n = 8;
    const std::int64_t m = 512;
    const int trials = 200;
    auto g = make_graph_with_nodes(family, n);
    auto sp = SpeedProfile::uniform(n);
    const double lambda2 = second_smallest_eigenvalue(laplacian(g));
    const double gamma = gamma_factor(g, sp, lambda2);
    const double horizon = 2 * gamma * std::log(static_cast<double>(m) / n);
    TrialSettings s;
    s.psi_critical = critical_value(g, sp, lambda2);
    auto params = ProtocolParams::standard(sp);
    params.rng_seed = 555;
    InitSpec init;
    init.count = m;
    const auto cap = static_cast<std::int64_t>(std::floor(horizon));
    auto summary = measure_convergence(g, sp, init, params, StopCondition::psi_threshold(),
                                       trials, cap, s);
    int hit = 0;
    for (const auto& r : summary.results)
      if (r.rounds_to_psi_threshold && *r.rounds_to_psi_threshold <= horizon) ++hit;
    const double frac = static_cast<double>(hit) / trials;
    const double sigma = std::sqrt(frac * (1 - frac) / trials);
    const bool ok = frac >= 0.75 - kZ99 * sigma;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}{}: {}/{} within T={:.0f} (median {})", out.detail.empty() ? "" : "; ",
                              to_string(family), hit, trials, horizon,
                              summary.psi_threshold.count ? fmt::format("{}", summary.psi_threshold.median) : "-");
  }
  const double secs = seconds_since(t0);
  if (secs > kQuarterSeconds) out.pass = false;
  out.detail += fmt::format(", {:.1f}s", secs);
  return out;
}

// 6. The first threshold state is a 2/(1+delta)-approximate equilibrium.
Outcome approx_implication() {
  const int n = 4;
  const double delta = 2;
  auto g = make_complete(n);
  auto sp = SpeedProfile::uniform(n);
  const auto m = static_cast<std::int64_t>(std::ceil(8 * delta * sp.s_max() * sp.total_capacity() * n * n));
  TrialSettings s;
  s.psi_critical = critical_value(g, sp);
  s.implication_eps = 2 / (1 + delta);
  auto params = ProtocolParams::standard(sp);
  params.rng_seed = 666;
  InitSpec init;
  init.count = m;
  auto summary = measure_convergence(g, sp, init, params, StopCondition::psi_threshold(), 50,
                                     1'000'000, s);
  Outcome out;
  out.pass = summary.implication_checked == 50 && summary.implication_failures == 0;
  out.detail = fmt::format("m={}, {} trials checked, {} not {:.4f}-approximate", m,
                           summary.implication_checked, summary.implication_failures,
                           s.implication_eps);
  return out;
}

// 7. Exact equilibrium within 607 n Delta^2 s_max^4 / lambda2 rounds.
Outcome exact_ne() {
  const auto t0 = Clock::now();
  Outcome out;
  std::vector<std::pair<std::string, GraphTopology>> graphs = {
      {"K2", make_complete(2)}, {"K4", make_complete(4)}, {"C4", make_cycle(4)},
      {"C6", make_cycle(6)},    {"P5", make_path(5)},     {"Q3", make_hypercube(3)}};
  int runs = 0, reached = 0;
  double worst_ratio = 0;
  for (const auto& [name, g] : graphs) {
    const int n = g.node_count();
    for (std::int64_t top : {1, 2, 3}) {
      std::vector<std::int64_t> pattern{1, top};
      auto sp = top == 1 ? SpeedProfile::uniform(n) : cyclic_speed_pattern(n, pattern);
      const double lambda2 = second_smallest_eigenvalue(laplacian(g));
      const double bound = exact_ne_round_bound(g, sp, lambda2);
      auto params = ProtocolParams::exact_equilibrium(sp);
      params.rng_seed = 777 + runs;
      InitSpec init;
      init.count = 10 * n + 3;
      TrialSettings s;
      s.psi_critical = critical_value(g, sp, lambda2);
      auto summary = measure_convergence(g, sp, init, params, StopCondition::exact_ne(), 100,
                                         static_cast<std::int64_t>(std::floor(bound)), s);
      for (const auto& r : summary.results) {
        ++runs;
        if (r.rounds_to_exact_ne && r.final_state && is_nash(g, sp, *r.final_state)) {
          ++reached;
          worst_ratio = std::max(worst_ratio, *r.rounds_to_exact_ne / bound);
        } else {
          out.detail += fmt::format(" [{} speeds 1,{} trial {}]", name, top, r.trial_id);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  out.pass = reached == runs && secs <= kExactNeSeconds;
  out.detail = fmt::format("{}/{} trials reached an exact NE; slowest used {:.2e} of the bound, {:.1f}s{}",
                           reached, runs, worst_ratio, secs, out.detail);
  return out;
}

// 8. Growth of the threshold hitting time from n = 16 to n = 32.
Outcome trends() {
  const auto t0 = Clock::now();
  Outcome out;
  struct Row {
    GraphFamily family;
    double lo, hi;
  };
  for (const auto& row : {Row{GraphFamily::complete, 1, 4}, Row{GraphFamily::cycle, 2, 16},
                          Row{GraphFamily::hypercube, 1, 6}}) {
    ScalingOptions opt;
    opt.trials = 50;
    opt.round_cap = 5'000'000;
    opt.master_seed = 888;
    opt.sampler = Sampler::aggregated;
    auto rows = scaling_experiment(
        row.family, {16, 32}, [](int n) { return static_cast<std::int64_t>(n) * n * n; },
        [](int n) { return SpeedProfile::uniform(n); }, StopCondition::psi_threshold(), opt);
    const double ratio = rows[1].median_rounds / rows[0].median_rounds;
    const bool ok = ratio >= row.lo && ratio <= row.hi && rows[0].truncated_fraction == 0 &&
                    rows[1].truncated_fraction == 0;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}{} {:.0f} -> {:.0f} ratio {:.2f} in [{}, {}]",
                              out.detail.empty() ? "" : "; ", to_string(row.family),
                              rows[0].median_rounds, rows[1].median_rounds, ratio, row.lo, row.hi);
  }
  const double secs = seconds_since(t0);
  if (secs > kTrendSeconds) out.pass = false;
  out.detail += fmt::format(", {:.1f}s", secs);
  return out;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(entry.path(), dir).string()] = s.str();
  }
  return files;
}

// 9. Repeated runs of one config produce identical files.
Outcome determinism() {
  Outcome out;
  const auto root = fs::temp_directory_path() / "slb_acceptance_determinism";
  const std::vector<std::string> configs = {
      "graph.family = torus2d\ngraph.size = 3,4\nspeeds.mode = random-integers\nspeeds.max = 3\n"
      "tasks.count = 600\ntasks.placement = uniform-random\nrun.trials = 3\n"
      "run.stop = psi-threshold\nrun.master_seed = 99\n",
      "graph.family = cycle\ngraph.size = 6\ntasks.mode = weighted-random\ntasks.count = 300\n"
      "tasks.node = 0\nprotocol.variant = algorithm2\nprotocol.sampler = aggregated\n"
      "run.trials = 3\nrun.stop = exact-ne\n",
      "graph.family = path\ngraph.size = 5\nspeeds.mode = explicit\nspeeds.values = 1,3/2,2,1,1\n"
      "tasks.count = 53\nrun.trials = 2\nrun.stop = exact-ne\n"};
  int identical = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    const auto dir = root / std::to_string(k);
    std::vector<std::map<std::string, std::string>> outputs;
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(dir);
      auto config = parse_config_text(configs[k] + "output.directory = " + dir.string() + "\n");
      std::ostringstream sink;
      if (cmd_run(config, "", sink) != kExitOk) out.pass = false;
      outputs.push_back(read_tree(dir));
    }
    if (outputs[0] == outputs[1] && outputs[0].count("summary.json")) {
      ++identical;
    } else {
      out.pass = false;
    }
  }
  fs::remove_all(root);
  out.detail = fmt::format("{}/{} configs byte-identical across repeated runs", identical,
                           configs.size());
  return out;
}

// 10. Weighted tasks reach the threshold state within 10 * 2 gamma ln W.
Outcome weighted() {
  Outcome out;
  const int n = 8;
  const double delta = 2;
  auto g = make_cycle(n);
  std::vector<std::int64_t> pattern{1, 2};
  auto sp = cyclic_speed_pattern(n, pattern);
  const double lambda2 = second_smallest_eigenvalue(laplacian(g));
  const double gamma = gamma_factor(g, sp, lambda2);
  const double threshold = 8 * delta * sp.s_max() / sp.s_min() * sp.total_capacity() * n * n;
  // Weights are uniform on (0, 1], so 2.2 * threshold tasks carry about 1.1 * threshold.
  const auto count = static_cast<std::int64_t>(std::ceil(2.2 * threshold));
  auto params = ProtocolParams::standard(sp, Variant::algorithm2);
  params.rng_seed = 1010;
  params.sampler = Sampler::aggregated;
  InitSpec init;
  init.kind = InitKind::weighted_random;
  init.count = count;
  init.node = 0;
  TrialSettings s;
  s.psi_critical = critical_value(g, sp, lambda2);

  int reached = 0, below_threshold = 0;
  double worst = 0;
  std::int64_t worst_cap = 0;
  for (int t = 0; t < 50; ++t) {
    ProtocolParams p = params;
    p.rng_seed = trial_seed(params.rng_seed, t);
    p.trial = t;
    auto x = init.build(sp, p.rng_seed);
    if (x.total_weight() <= threshold) ++below_threshold;
    const auto cap = static_cast<std::int64_t>(std::floor(10 * 2 * gamma * std::log(x.total_weight())));
    worst_cap = std::max(worst_cap, cap);
    auto r = run_trial(g, sp, x, p, StopCondition::exact_ne(), cap, s);
    if (r.rounds_to_exact_ne && r.final_state && is_nash(g, sp, *r.final_state)) {
      ++reached;
      worst = std::max(worst, static_cast<double>(*r.rounds_to_exact_ne) / cap);
    }
  }
  out.pass = reached == 50 && below_threshold == 0;
  out.detail = fmt::format(
      "speeds 1,2 cyclic, {} tasks, W above {:.0f} in {}/50; {}/50 reached the threshold state, "
      "slowest used {:.3f} of the cap (<= {} rounds)",
      count, threshold, 50 - below_threshold, reached, worst, worst_cap);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spectral bounds", spectral_bounds},
      {"Cheeger sandwich", cheeger},
      {"lemma suite", lemma_suite},
      {"oracle vs Monte Carlo", monte_carlo},
      {"3/4 probability threshold", three_quarters},
      {"approximate NE at threshold", approx_implication},
      {"exact NE convergence", exact_ne},
      {"scaling trends", trends},
      {"determinism", determinism},
      {"weighted protocol", weighted},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} {:>2} {}: {}", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                             o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed ? 1 : 0;
}
