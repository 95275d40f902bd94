#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slb/graph.hpp"
#include "slb/potentials.hpp"
#include "slb/protocol.hpp"
#include "slb/speeds.hpp"

namespace slb {

enum class StopKind { psi_threshold, approx_ne, exact_ne, fixed_rounds };

struct StopCondition {
  StopKind kind = StopKind::exact_ne;
  double eps = 0.5;          // approx_ne only
  std::int64_t rounds = 0;   // fixed_rounds only

  static StopCondition psi_threshold() { return {StopKind::psi_threshold}; }
  static StopCondition approx_ne(double eps) { return {StopKind::approx_ne, eps}; }
  static StopCondition exact_ne() { return {StopKind::exact_ne}; }
  static StopCondition fixed_rounds(std::int64_t r) { return {StopKind::fixed_rounds, 0.5, r}; }

  friend bool operator==(const StopCondition&, const StopCondition&) = default;
};

// "psi-threshold", "approx-ne:<eps>", "exact-ne", "fixed-rounds:<R>"
std::string to_string(const StopCondition& stop);
StopCondition parse_stop(std::string_view text);

struct TraceRow {
  std::int64_t round = 0;
  double psi0 = 0;
  double psi1 = 0;
  double l_delta = 0;
  double max_load = 0;
  double min_load = 0;
  std::int64_t moves = 0;  // tasks that moved in the round leading to this state
};

inline constexpr const char* kTraceCsvHeader = "round,psi0,psi1,l_delta,max_load,min_load,moves";
std::string trace_csv_row(const TraceRow& row);

struct TrialSettings {
  double psi_critical = 0;       // psi_c; the threshold is 4 psi_c
  double approx_eps = 0.5;       // used for rounds_to_approx_ne
  // If > 0, the first state with psi0 <= 4 psi_c is also tested with
  // is_approx_nash(implication_eps).
  double implication_eps = 0;
  bool record_trace = false;
};

struct TrialResult {
  std::int64_t trial_id = 0;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> rounds_to_psi_threshold;
  std::optional<std::int64_t> rounds_to_approx_ne;
  std::optional<std::int64_t> rounds_to_exact_ne;  // threshold state in weighted mode
  std::optional<bool> approx_ne_at_threshold;
  std::int64_t rounds_run = 0;
  bool truncated = false;
  PotentialSnapshot final_snapshot;
  std::optional<LoadState> final_state;
  std::vector<TraceRow> trace;
};

// Runs step_round from `init` until `stop` holds or round_cap rounds have
// been executed. Every hitting time is recorded as the first qualifying
// round, whichever stop was requested; round 0 is the initial state.
// For weighted states exact_ne means the threshold state of is_nash.
TrialResult run_trial(const GraphTopology& g, const SpeedProfile& sp, const LoadState& init,
                      const ProtocolParams& params, const StopCondition& stop,
                      std::int64_t round_cap, const TrialSettings& settings);

enum class InitKind { all_on_one_node, uniform_random, proportional, weighted_random, fixed };

std::string_view to_string(InitKind kind);
InitKind parse_init_kind(std::string_view text);

struct InitSpec {
  InitKind kind = InitKind::all_on_one_node;
  std::int64_t count = 0;  // tasks
  NodeId node = 0;         // all_on_one_node; weighted_random with node >= 0
  std::optional<LoadState> state;  // fixed
  std::optional<std::uint64_t> seed;  // overrides the per-trial seed

  LoadState build(const SpeedProfile& sp, std::uint64_t seed) const;
};

// Per-trial seed derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master_seed, std::int64_t trial);

struct HittingStats {
  std::int64_t count = 0;  // trials that reached it
  double min = 0;
  double q1 = 0;
  double median = 0;
  double mean = 0;
  double q3 = 0;
  double max = 0;
};

// Quartiles by linear interpolation between order statistics.
HittingStats hitting_stats(std::vector<double> values);

struct ConvergenceSummary {
  std::int64_t trials = 0;
  HittingStats psi_threshold;
  HittingStats approx_ne;
  HittingStats exact_ne;
  double truncated_fraction = 0;
  std::int64_t implication_checked = 0;
  std::int64_t implication_failures = 0;
  std::vector<TrialResult> results;  // ordered by trial_id

  // Stats for the hitting time the stop condition targets.
  const HittingStats& for_stop(const StopCondition& stop) const;
};

// Trials 0..trials-1; trial t uses rng seed trial_seed(params.rng_seed, t)
// for both the initial state and the protocol.
// `on_trial`, if given, sees each result before it is stored (for example to
// write and drop its trace).
ConvergenceSummary measure_convergence(
    const GraphTopology& g, const SpeedProfile& sp, const InitSpec& init,
    const ProtocolParams& params, const StopCondition& stop, std::int64_t trials,
    std::int64_t round_cap, const TrialSettings& settings,
    const std::function<void(TrialResult&)>& on_trial = {});

struct ScalingRow {
  int n = 0;
  std::int64_t m = 0;
  double lambda2 = 0;
  double gamma = 0;
  double psi_critical = 0;
  double median_rounds = 0;
  double truncated_fraction = 0;
};

struct ScalingOptions {
  std::int64_t trials = 10;
  std::int64_t round_cap = 1'000'000;
  std::uint64_t master_seed = 1;
  double psi_constant = 8;
  Sampler sampler = Sampler::aggregated;
};

// One row per size; sizes are node counts (see make_graph_with_nodes).
// Initial states put all m tasks on node 0.
std::vector<ScalingRow> scaling_experiment(
    GraphFamily family, const std::vector<int>& sizes,
    const std::function<std::int64_t(int)>& m_rule,
    const std::function<SpeedProfile(int)>& speed_rule, const StopCondition& stop,
    const ScalingOptions& options);

// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// 607 n Delta^2 s_max^4 / (lambda2 eps^2)
double exact_ne_round_bound(const GraphTopology& g, const SpeedProfile& sp, double lambda2);

// --- lemma suite ------------------------------------------------------------

enum class Relation { le, ge, eq };

struct LemmaCheck {
  std::string lemma;
  std::string instance;
  Relation relation = Relation::ge;
  double lhs = 0;
  double rhs = 0;
  double margin = 0;  // >= 0 when the inequality has slack
  bool holds = false;
  std::string state;  // serialized state, for counterexamples
};

struct LemmaReport {
  std::vector<LemmaCheck> checks;

  std::int64_t violations() const;
  bool all_hold() const { return violations() == 0; }
  std::vector<std::string> lemma_names() const;  // in first-seen order
};

enum class CorpusKind { standard, nash_only };

std::string_view to_string(CorpusKind kind);
CorpusKind parse_corpus_kind(std::string_view text);

struct CorpusInstance {
  std::string graph_name;
  std::string speed_name;
  std::string state_name;
  GraphTopology graph;
  SpeedProfile speeds;
  LoadState state;

  std::string label() const;
};

// Graphs K2, K4, C4, C6, P5, Q3 with speeds all-1, cyclic (1,2), cyclic
// (1,3); uniform states all-on-one (m = n and 10n + 3), three seeded random
// placements, proportional placement and two one-task perturbations of it,
// plus weighted random states. nash_only replaces the uniform states by
// settle_to_nash of each and drops the weighted ones.
std::vector<CorpusInstance> build_corpus(CorpusKind kind);

struct SuiteOptions {
  double tolerance = 1e-9;  // relative, on max(1, |lhs|, |rhs|)
  // Overrides alpha for the drop checks. The default uses 4 s_max and, for
  // the exact-equilibrium checks, 4 s_max / eps. An override below 4 s_max
  // is rejected with ConfigError.
  std::optional<double> alpha;
  std::uint64_t seed = 7;  // for the sampled-round observation
};

LemmaReport verify_lemma_suite(const std::vector<CorpusInstance>& corpus,
                               const SuiteOptions& options = {});

// "uniform:3,0,1" or "weighted:0.5 0.25|1|" (nodes separated by '|').
std::string format_state(const LoadState& x);
LoadState parse_state(std::string_view text);

}  // namespace slb
