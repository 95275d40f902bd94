#include "slb/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "slb/error.hpp"
#include "slb/rng.hpp"
#include "slb/spectral.hpp"

namespace slb {

// --- stop conditions ---------------------------------------------------------

std::string to_string(const StopCondition& stop) {
  switch (stop.kind) {
    case StopKind::psi_threshold: return "psi-threshold";
    case StopKind::approx_ne: return fmt::format("approx-ne:{}", stop.eps);
    case StopKind::exact_ne: return "exact-ne";
    case StopKind::fixed_rounds: return fmt::format("fixed-rounds:{}", stop.rounds);
  }
  throw InternalError("unknown stop kind");
}

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", what, text));
  }
  return value;
}

}  // namespace

StopCondition parse_stop(std::string_view text) {
  auto colon = text.find(':');
  std::string_view head = text.substr(0, colon);
  std::string_view arg = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "psi-threshold" && arg.empty()) return StopCondition::psi_threshold();
  if (head == "exact-ne" && arg.empty()) return StopCondition::exact_ne();
  if (head == "approx-ne") {
    double eps = arg.empty() ? 0.5 : parse_double(arg, "approx-ne epsilon");
    if (!(eps > 0 && eps < 1)) throw ConfigError(fmt::format("approx-ne epsilon {} not in (0, 1)", eps));
    return StopCondition::approx_ne(eps);
  }
  if (head == "fixed-rounds" && !arg.empty()) {
    auto r = parse_int(arg, "fixed-rounds");
    if (r < 0) throw ConfigError("fixed-rounds must be non-negative");
    return StopCondition::fixed_rounds(r);
  }
  throw ConfigError(fmt::format(
      "unknown stop '{}' (psi-threshold, approx-ne:<eps>, exact-ne, fixed-rounds:<R>)", text));
}

std::string trace_csv_row(const TraceRow& row) {
  return fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}", row.round, row.psi0,
                     row.psi1, row.l_delta, row.max_load, row.min_load, row.moves);
}

// --- trials ------------------------------------------------------------------

TrialResult run_trial(const GraphTopology& g, const SpeedProfile& sp, const LoadState& init,
                      const ProtocolParams& params, const StopCondition& stop,
                      std::int64_t round_cap, const TrialSettings& settings) {
  if (round_cap < 1) throw ConfigError("round cap must be at least 1");
  if (stop.kind == StopKind::psi_threshold && !(settings.psi_critical > 0)) {
    throw ConfigError("psi-threshold stop needs a positive critical value");
  }
  validate(params, sp, init);

  TrialResult r;
  r.trial_id = static_cast<std::int64_t>(params.trial);
  r.seed = params.rng_seed;
  const double threshold = 4 * settings.psi_critical;

  LoadState x = init;
  std::int64_t last_moves = 0;
  for (std::int64_t t = 0;; ++t) {
    const auto snap = snapshot(sp, x, t);
    if (settings.record_trace) {
      TraceRow row{t, snap.psi0, snap.psi1, snap.l_delta, load(x, sp, 0), load(x, sp, 0),
                   last_moves};
      for (int i = 1; i < x.node_count(); ++i) {
        row.max_load = std::max(row.max_load, load(x, sp, i));
        row.min_load = std::min(row.min_load, load(x, sp, i));
      }
      r.trace.push_back(row);
    }
    if (!r.rounds_to_psi_threshold && settings.psi_critical > 0 && snap.psi0 <= threshold) {
      r.rounds_to_psi_threshold = t;
      if (settings.implication_eps > 0) {
        r.approx_ne_at_threshold = is_approx_nash(g, sp, x, settings.implication_eps);
      }
    }
    if (!r.rounds_to_approx_ne && is_approx_nash(g, sp, x, settings.approx_eps)) {
      r.rounds_to_approx_ne = t;
    }
    if (!r.rounds_to_exact_ne && is_nash(g, sp, x)) r.rounds_to_exact_ne = t;

    bool done = false;
    switch (stop.kind) {
      case StopKind::psi_threshold: done = r.rounds_to_psi_threshold.has_value(); break;
      case StopKind::approx_ne:
        done = stop.eps == settings.approx_eps ? r.rounds_to_approx_ne.has_value()
                                               : is_approx_nash(g, sp, x, stop.eps);
        break;
      case StopKind::exact_ne: done = r.rounds_to_exact_ne.has_value(); break;
      case StopKind::fixed_rounds: done = t >= stop.rounds; break;
    }
    if (done || t >= round_cap) {
      r.truncated = !done;
      r.rounds_run = t;
      r.final_snapshot = snap;
      r.final_state = std::move(x);
      return r;
    }
    auto out = step_round(g, sp, x, params, static_cast<std::uint64_t>(t));
    last_moves = out.moved_tasks();
    x = std::move(out.state);
  }
}

std::string_view to_string(InitKind kind) {
  switch (kind) {
    case InitKind::all_on_one_node: return "all-on-one-node";
    case InitKind::uniform_random: return "uniform-random";
    case InitKind::proportional: return "proportional";
    case InitKind::weighted_random: return "weighted-random";
    case InitKind::fixed: return "explicit";
  }
  throw InternalError("unknown init kind");
}

InitKind parse_init_kind(std::string_view text) {
  if (text == "all-on-one-node") return InitKind::all_on_one_node;
  if (text == "uniform-random") return InitKind::uniform_random;
  if (text == "proportional") return InitKind::proportional;
  if (text == "weighted-random") return InitKind::weighted_random;
  if (text == "explicit") return InitKind::fixed;
  throw ConfigError(fmt::format(
      "unknown initial state '{}' (all-on-one-node, uniform-random, proportional, "
      "weighted-random, explicit)",
      text));
}

LoadState InitSpec::build(const SpeedProfile& sp, std::uint64_t trial_seed) const {
  const std::uint64_t seed = this->seed.value_or(trial_seed);
  switch (kind) {
    case InitKind::all_on_one_node: return all_on_one_node(sp.size(), count, node);
    case InitKind::uniform_random: return uniform_random_placement(sp.size(), count, seed);
    case InitKind::proportional: return proportional_placement(sp, count);
    case InitKind::weighted_random: return weighted_random(sp.size(), count, seed, node);
    case InitKind::fixed:
      if (!state) throw ConfigError("explicit initial state is missing");
      if (state->node_count() != sp.size()) {
        throw ConfigError(fmt::format("explicit state has {} nodes, graph has {}",
                                      state->node_count(), sp.size()));
      }
      return *state;
  }
  throw InternalError("unknown init kind");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::int64_t trial) {
  return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

HittingStats hitting_stats(std::vector<double> values) {
  HittingStats s;
  s.count = static_cast<std::int64_t>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return s;
}

const HittingStats& ConvergenceSummary::for_stop(const StopCondition& stop) const {
  switch (stop.kind) {
    case StopKind::psi_threshold: return psi_threshold;
    case StopKind::approx_ne: return approx_ne;
    default: return exact_ne;
  }
}

ConvergenceSummary measure_convergence(
    const GraphTopology& g, const SpeedProfile& sp, const InitSpec& init,
    const ProtocolParams& params, const StopCondition& stop, std::int64_t trials,
    std::int64_t round_cap, const TrialSettings& settings,
    const std::function<void(TrialResult&)>& on_trial) {
  if (trials < 1) throw ConfigError("trials must be at least 1");
  ConvergenceSummary out;
  out.trials = trials;
  std::vector<double> psi, approx, exact;
  std::int64_t truncated = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    ProtocolParams p = params;
    p.rng_seed = trial_seed(params.rng_seed, t);
    p.trial = static_cast<std::uint64_t>(t);
    auto result = run_trial(g, sp, init.build(sp, p.rng_seed), p, stop, round_cap, settings);
    if (result.rounds_to_psi_threshold) psi.push_back(static_cast<double>(*result.rounds_to_psi_threshold));
    if (result.rounds_to_approx_ne) approx.push_back(static_cast<double>(*result.rounds_to_approx_ne));
    if (result.rounds_to_exact_ne) exact.push_back(static_cast<double>(*result.rounds_to_exact_ne));
    if (result.approx_ne_at_threshold) {
      ++out.implication_checked;
      if (!*result.approx_ne_at_threshold) ++out.implication_failures;
    }
    if (result.truncated) ++truncated;
    if (on_trial) on_trial(result);
    out.results.push_back(std::move(result));
  }
  out.psi_threshold = hitting_stats(std::move(psi));
  out.approx_ne = hitting_stats(std::move(approx));
  out.exact_ne = hitting_stats(std::move(exact));
  out.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(trials);
  return out;
}

std::vector<ScalingRow> scaling_experiment(
    GraphFamily family, const std::vector<int>& sizes,
    const std::function<std::int64_t(int)>& m_rule,
    const std::function<SpeedProfile(int)>& speed_rule, const StopCondition& stop,
    const ScalingOptions& options) {
  std::vector<ScalingRow> rows;
  for (int n : sizes) {
    auto g = make_graph_with_nodes(family, n);
    auto sp = speed_rule(n);
    if (sp.size() != n) throw ConfigError("speed rule returned the wrong number of speeds");
    ScalingRow row;
    row.n = n;
    row.m = m_rule(n);
    row.lambda2 = second_smallest_eigenvalue(laplacian(g));
    row.gamma = gamma_factor(g, sp, row.lambda2);
    row.psi_critical = critical_value(g, sp, row.lambda2, options.psi_constant);

    auto params = ProtocolParams::standard(sp);
    params.rng_seed = options.master_seed;
    params.sampler = options.sampler;
    TrialSettings settings;
    settings.psi_critical = row.psi_critical;
    InitSpec init{InitKind::all_on_one_node, row.m, 0, std::nullopt, std::nullopt};
    auto summary = measure_convergence(g, sp, init, params, stop, options.trials,
                                       options.round_cap, settings);
    row.median_rounds = summary.for_stop(stop).median;
    row.truncated_fraction = summary.truncated_fraction;
    rows.push_back(row);
  }
  return rows;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("log-log slope needs at least two matching points");
  }
  const double k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw ConfigError("log-log slope needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = k * sxx - sx * sx;
  if (denom == 0) throw ConfigError("log-log slope needs distinct x values");
  return (k * sxy - sx * sy) / denom;
}

double exact_ne_round_bound(const GraphTopology& g, const SpeedProfile& sp, double lambda2) {
  const double delta = g.max_degree();
  const double s2 = sp.s_max() * sp.s_max();
  const double eps = sp.epsilon();
  return 607.0 * g.node_count() * delta * delta * s2 * s2 / (lambda2 * eps * eps);
}

// --- state text form ---------------------------------------------------------

std::string format_state(const LoadState& x) {
  std::string out;
  if (x.is_uniform()) {
    out = "uniform:";
    for (int i = 0; i < x.node_count(); ++i) {
      if (i) out += ',';
      out += fmt::format("{}", x.count(i));
    }
    return out;
  }
  out = "weighted:";
  for (int i = 0; i < x.node_count(); ++i) {
    if (i) out += '|';
    bool first = true;
    for (double w : x.tasks(i)) {
      if (!first) out += ',';
      out += fmt::format("{:.17g}", w);
      first = false;
    }
  }
  return out;
}

LoadState parse_state(std::string_view text) {
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto pos = s.find(sep, start);
      parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return parts;
  };
  auto trim = [](std::string_view s) {
    auto a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return std::string_view{};
    auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };
  if (text.starts_with("uniform:")) {
    std::vector<std::int64_t> counts;
    for (auto part : split(text.substr(8), ',')) counts.push_back(parse_int(trim(part), "task count"));
    return LoadState::uniform(std::move(counts));
  }
  if (text.starts_with("weighted:")) {
    std::vector<std::vector<double>> tasks;
    for (auto node : split(text.substr(9), '|')) {
      auto& list = tasks.emplace_back();
      if (trim(node).empty()) continue;
      for (auto part : split(node, ',')) list.push_back(parse_double(trim(part), "task weight"));
    }
    return LoadState::weighted(std::move(tasks));
  }
  throw ConfigError(fmt::format("state '{}' must start with 'uniform:' or 'weighted:'", text));
}

// --- lemma suite ---------------------------------------------------------------

std::int64_t LemmaReport::violations() const {
  return std::count_if(checks.begin(), checks.end(), [](const LemmaCheck& c) { return !c.holds; });
}

std::vector<std::string> LemmaReport::lemma_names() const {
  std::vector<std::string> names;
  for (const auto& c : checks)
    if (std::find(names.begin(), names.end(), c.lemma) == names.end()) names.push_back(c.lemma);
  return names;
}

std::string_view to_string(CorpusKind kind) {
  return kind == CorpusKind::standard ? "standard" : "nash-only";
}

CorpusKind parse_corpus_kind(std::string_view text) {
  if (text == "standard" || text == "default") return CorpusKind::standard;
  if (text == "nash-only") return CorpusKind::nash_only;
  throw ConfigError(fmt::format("unknown corpus '{}' (standard, nash-only)", text));
}

std::string CorpusInstance::label() const {
  return fmt::format("{} / {} / {}", graph_name, speed_name, state_name);
}

std::vector<CorpusInstance> build_corpus(CorpusKind kind) {
  struct NamedGraph {
    std::string name;
    GraphTopology graph;
  };
  std::vector<NamedGraph> graphs;
  graphs.push_back({"K2", make_complete(2)});
  graphs.push_back({"K4", make_complete(4)});
  graphs.push_back({"C4", make_cycle(4)});
  graphs.push_back({"C6", make_cycle(6)});
  graphs.push_back({"P5", make_path(5)});
  graphs.push_back({"Q3", make_hypercube(3)});

  const std::vector<std::pair<std::string, std::vector<std::int64_t>>> patterns = {
      {"speeds 1", {1}}, {"speeds 1,2", {1, 2}}, {"speeds 1,3", {1, 3}}};

  std::vector<CorpusInstance> corpus;
  for (const auto& ng : graphs) {
    const int n = ng.graph.node_count();
    for (const auto& [speed_name, pattern] : patterns) {
      auto sp = cyclic_speed_pattern(n, pattern);
      const std::int64_t m = 10 * n + 3;

      std::vector<std::pair<std::string, LoadState>> states;
      states.emplace_back(fmt::format("one-node m={}", n), all_on_one_node(n, n));
      states.emplace_back(fmt::format("one-node m={}", m), all_on_one_node(n, m));
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        states.emplace_back(fmt::format("random seed={} m={}", seed, m),
                            uniform_random_placement(n, m, seed));
      }
      auto prop = proportional_placement(sp, m);
      states.emplace_back(fmt::format("proportional m={}", m), prop);
      for (auto [from, to] : {std::pair{0, 1}, std::pair{1, 0}}) {
        auto counts = prop.counts();
        if (counts[from] == 0) continue;
        --counts[from];
        ++counts[to];
        states.emplace_back(fmt::format("proportional m={} move {}->{}", m, from, to),
                            LoadState::uniform(std::move(counts)));
      }

      if (kind == CorpusKind::nash_only) {
        for (auto& [name, state] : states) {
          corpus.push_back({ng.name, speed_name, "settled " + name, ng.graph, sp,
                            settle_to_nash(ng.graph, sp, state)});
        }
        continue;
      }
      for (auto& [name, state] : states) {
        corpus.push_back({ng.name, speed_name, name, ng.graph, sp, state});
      }
      for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        corpus.push_back({ng.name, speed_name, fmt::format("weighted seed={} tasks={}", seed, 4 * n),
                          ng.graph, sp, weighted_random(n, 4 * n, seed)});
      }
      corpus.push_back({ng.name, speed_name, fmt::format("weighted one-node tasks={}", 3 * n),
                        ng.graph, sp, weighted_random(n, 3 * n, 3, 0)});
    }
  }
  return corpus;
}

namespace {

using BigQ = boost::multiprecision::cpp_rational;

double to_double(const BigQ& q) { return q.convert_to<double>(); }

struct ExactPotentials {
  BigQ phi0, phi1, psi0, psi1_definition, psi1_shifted, psi1_deviation, l_delta, capacity;
};

// Uniform mode only; every quantity in exact rational arithmetic.
ExactPotentials exact_potentials(const SpeedProfile& sp, const LoadState& x) {
  const int n = x.node_count();
  ExactPotentials p;
  BigQ inverse_sum = 0;
  std::vector<BigQ> s(n);
  for (int i = 0; i < n; ++i) {
    s[i] = BigQ(sp.scaled(i), sp.scale());
    p.capacity += s[i];
    inverse_sum += 1 / s[i];
  }
  const BigQ m = x.total_count();
  const BigQ nq = n;
  const BigQ mean_a = p.capacity / nq;
  const BigQ mean_h = nq / inverse_sum;
  BigQ sum_e_over_s = 0, shifted = 0;
  for (int i = 0; i < n; ++i) {
    const BigQ w = x.count(i);
    const BigQ e = w - m * s[i] / p.capacity;
    p.phi0 += w * w / s[i];
    p.phi1 += w * (w + 1) / s[i];
    p.psi0 += e * e / s[i];
    sum_e_over_s += e / s[i];
    const BigQ half = e + BigQ(1, 2);
    shifted += half * half / s[i];
    const BigQ ratio = abs(e / s[i]);
    if (ratio > p.l_delta) p.l_delta = ratio;
  }
  const BigQ correction = nq / 4 * (1 / mean_h - 1 / mean_a);
  p.psi1_definition = p.phi1 - m * m / p.capacity - m * nq / p.capacity + correction;
  p.psi1_shifted = shifted - nq / (4 * mean_a);
  p.psi1_deviation = p.psi0 + sum_e_over_s + correction;
  return p;
}

class Recorder {
 public:
  Recorder(LemmaReport& report, double tol) : report_(report), tol_(tol) {}

  void set_instance(std::string label, std::string state) {
    label_ = std::move(label);
    state_ = std::move(state);
  }

  void check(std::string lemma, Relation rel, double lhs, double rhs, std::string detail = {}) {
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    const double slack = tol_ * scale;
    bool holds = false;
    switch (rel) {
      case Relation::ge: holds = lhs >= rhs - slack; break;
      case Relation::le: holds = lhs <= rhs + slack; break;
      case Relation::eq: holds = std::abs(lhs - rhs) <= slack; break;
    }
    push(std::move(lemma), rel, lhs, rhs, holds, std::move(detail));
  }

  void exact(std::string lemma, Relation rel, const BigQ& lhs, const BigQ& rhs,
             std::string detail = {}) {
    bool holds = false;
    switch (rel) {
      case Relation::ge: holds = lhs >= rhs; break;
      case Relation::le: holds = lhs <= rhs; break;
      case Relation::eq: holds = lhs == rhs; break;
    }
    push(std::move(lemma), rel, to_double(lhs), to_double(rhs), holds, std::move(detail));
  }

 private:
  void push(std::string lemma, Relation rel, double lhs, double rhs, bool holds,
            std::string detail) {
    LemmaCheck c;
    c.lemma = std::move(lemma);
    c.instance = detail.empty() ? label_ : label_ + " / " + detail;
    c.relation = rel;
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = rel == Relation::ge ? lhs - rhs
               : rel == Relation::le ? rhs - lhs
                                     : -std::abs(lhs - rhs);
    c.holds = holds;
    if (!holds) c.state = state_;
    report_.checks.push_back(std::move(c));
  }

  LemmaReport& report_;
  double tol_;
  std::string label_;
  std::string state_;
};

void check_protocol(Recorder& rec, const CorpusInstance& c, const ProtocolParams& params) {
  const auto& g = c.graph;
  const auto& x = c.state;
  double max_p = 0, worst_identity = 0, flow = 0, identity_flow = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (NodeId j : g.neighbors(i)) {
      const double p = migration_probability(g, c.speeds, x, params, i, j);
      const double f = expected_flow(g, c.speeds, x, params, i, j);
      const double via_p = x.node_weight(i) * p / g.degree(i);
      max_p = std::max(max_p, p);
      if (std::abs(f - via_p) >= worst_identity) {
        worst_identity = std::abs(f - via_p);
        flow = f;
        identity_flow = via_p;
      }
    }
  }
  rec.check("migration_probability_cap", Relation::le, max_p, 0.125);
  rec.check("flow_identity", Relation::eq, flow, identity_flow);
}

void check_uniform(Recorder& rec, const CorpusInstance& c, double lambda2,
                   const ProtocolParams& standard, const ProtocolParams& exact_params,
                   std::uint64_t seed) {
  const auto& g = c.graph;
  const auto& sp = c.speeds;
  const auto& x = c.state;

  const auto ex = exact_potentials(sp, x);
  const BigQ m = x.total_count();
  rec.exact("psi0_identity", Relation::eq, ex.phi0 - m * m / ex.capacity, ex.psi0);
  rec.exact("psi1_shifted_square_form", Relation::eq, ex.psi1_definition, ex.psi1_shifted);
  rec.exact("psi1_nonnegative", Relation::ge, ex.psi1_definition, BigQ(0));
  rec.exact("psi1_deviation_form", Relation::eq, ex.psi1_definition, ex.psi1_deviation);
  rec.exact("ldelta_psi0_lower", Relation::le, ex.l_delta * ex.l_delta, ex.psi0);
  rec.exact("ldelta_psi0_upper", Relation::le, ex.psi0, ex.capacity * ex.l_delta * ex.l_delta);

  {
    ProtocolParams p = standard;
    p.rng_seed = seed;
    auto next = step_round(g, sp, x, p, 0).state;
    const auto ex_next = exact_potentials(sp, next);
    rec.exact("psi1_increment_equals_phi1_increment", Relation::eq,
              ex_next.psi1_definition - ex.psi1_definition, ex_next.phi1 - ex.phi1);
  }

  std::int64_t gcd_k = 0;
  for (int i = 0; i < sp.size(); ++i) gcd_k = std::gcd(gcd_k, sp.scaled(i));
  for (const auto& d : non_nash_edges(g, sp, x)) {
    // l_i - l_j >= 1/s_j + eps/(s_i s_j)  <=>  w_i k_j - w_j k_i >= k_i + gcd(k)
    const BigQ lhs = BigQ(x.count(d.from)) * sp.scaled(d.to) -
                     BigQ(x.count(d.to)) * sp.scaled(d.from);
    const BigQ rhs = BigQ(sp.scaled(d.from)) + gcd_k;
    rec.exact("granularity_step", Relation::ge, lhs, rhs, fmt::format("edge {}->{}", d.from, d.to));
  }

  const double psi0 = to_double(ex.psi0);
  const double psi1 = to_double(ex.psi1_definition);
  const double drop0 = exact_expected_psi0_drop(g, sp, x, standard);
  const double drop1 = exact_expected_psi1_drop(g, sp, x, standard);
  rec.check("drop_quadratic", Relation::ge, drop0, quadratic_drop_bound(g, sp, x, standard));
  rec.check("psi0_drop_lambda2", Relation::ge, drop0, spectral_drop_bound(g, sp, lambda2, psi0));
  rec.check("expected_phi0_drop_flow", Relation::ge, drop0, flow_drop_bound(g, sp, x, standard, 0));
  rec.check("expected_phi1_drop_flow", Relation::ge, drop1, flow_drop_bound(g, sp, x, standard, 1));
  rec.check("variance_bound", Relation::le, exact_variance_sum(g, sp, x, standard),
            variance_bound(g, sp, x, standard));
  rec.check("psi1_psi0_relation", Relation::le, psi1, psi1_upper_bound(sp, psi0));

  if (!is_nash(g, sp, x)) {
    const double v = nash_step_drop_bound(g, sp);
    const double drop_exact = exact_expected_psi1_drop(g, sp, x, exact_params);
    rec.check("psi1_drop_bound", Relation::ge, drop_exact, v);
    rec.check("supermartingale", Relation::le, psi1 - drop_exact + v, psi1);
  }
}

void check_weighted(Recorder& rec, const CorpusInstance& c, const ProtocolParams& params) {
  const auto& g = c.graph;
  const auto& sp = c.speeds;
  const auto& x = c.state;
  const auto snap = snapshot(sp, x);
  const double w = x.total_weight();
  rec.check("psi0_identity", Relation::eq, snap.phi0 - w * w / sp.total_capacity(), snap.psi0);
  rec.check("ldelta_psi0_lower", Relation::le, snap.l_delta * snap.l_delta, snap.psi0);
  rec.check("ldelta_psi0_upper", Relation::le, snap.psi0,
            sp.total_capacity() * snap.l_delta * snap.l_delta);
  rec.check("psi1_nonnegative", Relation::ge, snap.psi1, 0.0);
  rec.check("variance_bound", Relation::le, exact_variance_sum(g, sp, x, params),
            variance_bound(g, sp, x, params));
  rec.check("expected_phi0_drop_flow_weighted", Relation::ge,
            exact_expected_psi0_drop(g, sp, x, params),
            flow_drop_bound(g, sp, x, params, 0, true));
}

}  // namespace

LemmaReport verify_lemma_suite(const std::vector<CorpusInstance>& corpus,
                               const SuiteOptions& options) {
  LemmaReport report;
  Recorder rec(report, options.tolerance);

  std::string last_key;
  double lambda2 = 0;

  for (const auto& c : corpus) {
    const std::string key = c.graph_name + "|" + c.speed_name;
    ProtocolParams standard = ProtocolParams::standard(c.speeds);
    ProtocolParams exact = ProtocolParams::exact_equilibrium(c.speeds);
    if (options.alpha) {
      standard.alpha = *options.alpha;
      exact.alpha = *options.alpha;
    }
    if (!c.state.is_uniform()) {
      standard.variant = Variant::algorithm2;
      exact.variant = Variant::algorithm2;
    }
    validate(standard, c.speeds, c.state);

    if (key != last_key) {
      auto summary = spectral_summary(c.graph, c.speeds);
      lambda2 = summary.lambda2;
      rec.set_instance(c.graph_name + " / " + c.speed_name, "");
      for (const auto& b : summary.bound_report) {
        rec.check("spectral_" + b.name, Relation::le, b.lhs, b.rhs);
        // The spectral module applies its own absolute tolerance; keep its verdict.
        report.checks.back().holds = b.holds;
      }
      last_key = key;
    }

    rec.set_instance(c.label(), format_state(c.state));
    check_protocol(rec, c, standard);
    if (c.state.is_uniform()) {
      check_uniform(rec, c, lambda2, standard, exact, options.seed);
    } else {
      check_weighted(rec, c, standard);
    }
  }
  return report;
}

}  // namespace slb
