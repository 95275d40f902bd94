#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "slb/graph.hpp"
#include "slb/rng.hpp"
#include "slb/speeds.hpp"

namespace slb {

enum class TaskMode { uniform, weighted };

// Distribution of tasks over nodes.
//
// Uniform mode stores a task count per node (every task has weight 1).
// Weighted mode stores the weight of each task, w in (0, 1], per node.
class LoadState {
 public:
  static LoadState uniform(std::vector<std::int64_t> counts);
  static LoadState weighted(std::vector<std::vector<double>> tasks);

  TaskMode mode() const { return mode_; }
  bool is_uniform() const { return mode_ == TaskMode::uniform; }
  int node_count() const { return static_cast<int>(node_weight_.size()); }

  // Uniform mode only.
  std::int64_t count(int i) const { return counts_[i]; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total_count() const { return total_count_; }

  // Weighted mode only.
  std::span<const double> tasks(int i) const { return tasks_[i]; }

  // Number of tasks at node i in either mode.
  std::int64_t task_count(int i) const;

  // W_i: task count in uniform mode, summed weight in weighted mode.
  double node_weight(int i) const { return node_weight_[i]; }
  // Sum of squared task weights at node i (== count in uniform mode).
  double node_weight_squares(int i) const { return node_weight_sq_[i]; }
  double total_weight() const { return total_weight_; }

  friend bool operator==(const LoadState&, const LoadState&) = default;

 private:
  LoadState() = default;
  void refresh_weighted_totals();

  TaskMode mode_ = TaskMode::uniform;
  std::vector<std::int64_t> counts_;
  std::vector<std::vector<double>> tasks_;
  std::vector<double> node_weight_;
  std::vector<double> node_weight_sq_;
  std::int64_t total_count_ = 0;
  double total_weight_ = 0;
};

// l_i = W_i / s_i
double load(const LoadState& x, const SpeedProfile& sp, int i);
// e_i = W_i - (W/S) s_i
double deviation(const LoadState& x, const SpeedProfile& sp, int i);
std::vector<double> deviations(const LoadState& x, const SpeedProfile& sp);

enum class Variant { algorithm1, algorithm2 };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

// How a round draws its randomness. Both samplers realise the same
// per-task distribution; they differ in cost and in how draws are keyed.
//   per_task:   one keyed draw per task slot (node, slot) -> O(m) per round
//   aggregated: one keyed stream per node; uniform mode draws the per-edge
//               migrant counts as a binomial chain, weighted mode skips to
//               the migrating slots geometrically -> O(n * Delta + movers)
enum class Sampler { per_task, aggregated };

std::string_view to_string(Sampler s);
Sampler parse_sampler(std::string_view text);

struct ProtocolParams {
  double alpha = 4.0;
  std::uint64_t rng_seed = 0;
  std::uint64_t trial = 0;
  Variant variant = Variant::algorithm1;
  // Algorithm 2 only: use (deg(i)/d_ij) (W_i - W_j) / (2 alpha W_i) instead
  // of the rule whose expected weight flow matches the analysis.
  bool printed_weighted_rule = false;
  Sampler sampler = Sampler::per_task;

  // alpha = 4 s_max
  static ProtocolParams standard(const SpeedProfile& sp, Variant variant = Variant::algorithm1);
  // alpha = 4 s_max / epsilon, epsilon the speed granularity
  static ProtocolParams exact_equilibrium(const SpeedProfile& sp);
};

// ConfigError unless alpha >= 4 s_max (within 1e-12 relative) and the
// variant matches the task mode.
void validate(const ProtocolParams& params, const SpeedProfile& sp);
void validate(const ProtocolParams& params, const SpeedProfile& sp, const LoadState& x);

struct DirectedEdge {
  NodeId from;
  NodeId to;

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
  friend auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
};

// l_i - l_j > 1/s_j. Uniform mode compares exactly on scaled integers,
// weighted mode in floating point with ties resolving to false.
bool exceeds_threshold(const LoadState& x, const SpeedProfile& sp, NodeId i, NodeId j);

// l_i - l_j as a double; in uniform mode computed from the exact integer
// numerator.
double load_difference(const LoadState& x, const SpeedProfile& sp, NodeId i, NodeId j);

// Probability that one task at i, having picked neighbour j, migrates.
// Throws InternalError if the raw value leaves [0, 1].
double migration_probability(const GraphTopology& g, const SpeedProfile& sp,
                             const LoadState& x, const ProtocolParams& params, NodeId i,
                             NodeId j);

// Expected weight moving from i to j in one round, W_i p_ij / deg(i).
double expected_flow(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                     const ProtocolParams& params, NodeId i, NodeId j);

// All directed (i, j) with l_i - l_j > 1/s_j, in (from, to) order.
std::vector<DirectedEdge> non_nash_edges(const GraphTopology& g, const SpeedProfile& sp,
                                         const LoadState& x);

bool is_nash(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x);

// (1 - eps) l_i - l_j <= 1/s_j on every directed edge; eps in (0, 1).
bool is_approx_nash(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                    double eps);

struct Migration {
  NodeId from;
  NodeId to;
  std::int64_t tasks;  // tasks moved in this record
  double weight;       // their total weight

  friend bool operator==(const Migration&, const Migration&) = default;
};

struct RoundOutcome {
  LoadState state;
  // Uniform mode: one record per (from, to) pair with migrants.
  // Weighted mode: one record per migrating task.
  std::vector<Migration> moves;

  std::int64_t moved_tasks() const;
  double moved_weight() const;
};

// One synchronous round. Every probability is evaluated against x; draws
// are keyed by (params.rng_seed, params.trial, round_index, node, slot).
RoundOutcome step_round(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                        const ProtocolParams& params, std::uint64_t round_index);

// Sequential best response: repeatedly moves one task over the first
// non-Nash edge until none is left. Terminates because every move lowers
// sum_i w_i (w_i + 1) / s_i. Uniform mode only.
LoadState settle_to_nash(const GraphTopology& g, const SpeedProfile& sp, LoadState x);

// Initial states.
LoadState all_on_one_node(int n, std::int64_t m, NodeId node = 0);
LoadState uniform_random_placement(int n, std::int64_t m, std::uint64_t seed);
// Closest integer split of m proportional to speeds (largest remainder).
LoadState proportional_placement(const SpeedProfile& sp, std::int64_t m);
// count tasks with weights uniform in (0, 1]; all on `node`, or spread
// uniformly at random when node < 0.
LoadState weighted_random(int n, std::int64_t count, std::uint64_t seed, NodeId node = -1);

}  // namespace slb
