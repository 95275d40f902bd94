#include "slb/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "slb/error.hpp"

namespace slb {

// --- LoadState ---------------------------------------------------------------

LoadState LoadState::uniform(std::vector<std::int64_t> counts) {
  if (counts.empty()) throw ConfigError("load state needs at least one node");
  LoadState x;
  x.mode_ = TaskMode::uniform;
  x.node_weight_.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) {
      throw ConfigError(fmt::format("task count at node {} is negative ({})", i, counts[i]));
    }
    x.total_count_ += counts[i];
    x.node_weight_.push_back(static_cast<double>(counts[i]));
  }
  x.node_weight_sq_ = x.node_weight_;
  x.total_weight_ = static_cast<double>(x.total_count_);
  x.counts_ = std::move(counts);
  return x;
}

LoadState LoadState::weighted(std::vector<std::vector<double>> tasks) {
  if (tasks.empty()) throw ConfigError("load state needs at least one node");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (double w : tasks[i]) {
      if (!(w > 0.0 && w <= 1.0)) {
        throw ConfigError(fmt::format("task weight {} at node {} is outside (0, 1]", w, i));
      }
    }
  }
  LoadState x;
  x.mode_ = TaskMode::weighted;
  x.tasks_ = std::move(tasks);
  x.refresh_weighted_totals();
  return x;
}

void LoadState::refresh_weighted_totals() {
  node_weight_.assign(tasks_.size(), 0.0);
  node_weight_sq_.assign(tasks_.size(), 0.0);
  total_weight_ = 0;
  total_count_ = 0;
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    double sum = 0, sq = 0;
    for (double w : tasks_[i]) {
      sum += w;
      sq += w * w;
    }
    node_weight_[i] = sum;
    node_weight_sq_[i] = sq;
    total_weight_ += sum;
    total_count_ += static_cast<std::int64_t>(tasks_[i].size());
  }
}

std::int64_t LoadState::task_count(int i) const {
  return mode_ == TaskMode::uniform ? counts_[i] : static_cast<std::int64_t>(tasks_[i].size());
}

double load(const LoadState& x, const SpeedProfile& sp, int i) {
  return x.node_weight(i) / sp.speed(i);
}

double deviation(const LoadState& x, const SpeedProfile& sp, int i) {
  if (x.is_uniform()) {
    // (w_i K - m k_i) / K with K the scaled total capacity.
    __int128 num = static_cast<__int128>(x.count(i)) * sp.scaled_total() -
                   static_cast<__int128>(x.total_count()) * sp.scaled(i);
    return static_cast<double>(num) / static_cast<double>(sp.scaled_total());
  }
  return x.node_weight(i) - x.total_weight() / sp.total_capacity() * sp.speed(i);
}

std::vector<double> deviations(const LoadState& x, const SpeedProfile& sp) {
  std::vector<double> e(x.node_count());
  for (int i = 0; i < x.node_count(); ++i) e[i] = deviation(x, sp, i);
  return e;
}

// --- parameters --------------------------------------------------------------

std::string_view to_string(Variant v) {
  return v == Variant::algorithm1 ? "algorithm1" : "algorithm2";
}

Variant parse_variant(std::string_view text) {
  if (text == "algorithm1" || text == "1") return Variant::algorithm1;
  if (text == "algorithm2" || text == "2") return Variant::algorithm2;
  throw ConfigError(fmt::format("unknown protocol variant '{}'", text));
}

std::string_view to_string(Sampler s) {
  return s == Sampler::per_task ? "per-task" : "aggregated";
}

Sampler parse_sampler(std::string_view text) {
  if (text == "per-task" || text == "per_task") return Sampler::per_task;
  if (text == "aggregated") return Sampler::aggregated;
  throw ConfigError(fmt::format("unknown sampler '{}'", text));
}

ProtocolParams ProtocolParams::standard(const SpeedProfile& sp, Variant variant) {
  ProtocolParams p;
  p.alpha = 4 * sp.s_max();
  p.variant = variant;
  return p;
}

ProtocolParams ProtocolParams::exact_equilibrium(const SpeedProfile& sp) {
  ProtocolParams p;
  p.alpha = 4 * sp.s_max() / sp.epsilon();
  return p;
}

void validate(const ProtocolParams& params, const SpeedProfile& sp) {
  const double floor = 4 * sp.s_max();
  if (!std::isfinite(params.alpha) || params.alpha < floor * (1 - 1e-12)) {
    throw ConfigError(fmt::format(
        "protocol.alpha = {} is below 4 * s_max = {}; migration probabilities are only "
        "guaranteed to stay in [0, 1/8] above that",
        params.alpha, floor));
  }
}

void validate(const ProtocolParams& params, const SpeedProfile& sp, const LoadState& x) {
  validate(params, sp);
  if (x.node_count() != sp.size()) {
    throw ConfigError(fmt::format("state has {} nodes but the speed profile has {}",
                                  x.node_count(), sp.size()));
  }
  if (x.is_uniform() && params.variant != Variant::algorithm1) {
    throw ConfigError("algorithm2 is the weighted-task protocol; uniform states use algorithm1");
  }
  if (!x.is_uniform() && params.variant != Variant::algorithm2) {
    throw ConfigError("algorithm1 is the uniform-task protocol; weighted states use algorithm2");
  }
}

// --- edge predicates ---------------------------------------------------------

namespace {

// Exact numerator of l_i - l_j: (w_i k_j - w_j k_i); the difference itself is
// that times D / (k_i k_j).
__int128 scaled_difference(const LoadState& x, const SpeedProfile& sp, NodeId i, NodeId j) {
  return static_cast<__int128>(x.count(i)) * sp.scaled(j) -
         static_cast<__int128>(x.count(j)) * sp.scaled(i);
}

double raw_probability(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                       const ProtocolParams& params, NodeId i, NodeId j) {
  if (!exceeds_threshold(x, sp, i, j)) return 0.0;
  const double wi = x.node_weight(i);
  if (!(wi > 0)) {
    throw InternalError(fmt::format("edge ({}, {}) exceeds the threshold with W_i = {}", i, j, wi));
  }
  const double di = g.degree(i);
  const double dij = std::max(g.degree(i), g.degree(j));
  double p;
  if (params.variant == Variant::algorithm2 && params.printed_weighted_rule) {
    p = (di / dij) * (wi - x.node_weight(j)) / (2 * params.alpha * wi);
    p = std::max(p, 0.0);
  } else {
    const double inv = 1 / sp.speed(i) + 1 / sp.speed(j);
    p = (di / dij) * load_difference(x, sp, i, j) / (params.alpha * inv * wi);
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InternalError(fmt::format(
        "migration probability {} on ({}, {}) left [0, 1] (alpha = {})", p, i, j, params.alpha));
  }
  return p;
}

void require_edge(const GraphTopology& g, NodeId i, NodeId j) {
  if (!g.has_edge(i, j)) throw ConfigError(fmt::format("({}, {}) is not an edge", i, j));
}

}  // namespace

bool exceeds_threshold(const LoadState& x, const SpeedProfile& sp, NodeId i, NodeId j) {
  if (x.is_uniform()) return scaled_difference(x, sp, i, j) > sp.scaled(i);
  return x.node_weight(i) / sp.speed(i) - x.node_weight(j) / sp.speed(j) > 1 / sp.speed(j);
}

double load_difference(const LoadState& x, const SpeedProfile& sp, NodeId i, NodeId j) {
  if (x.is_uniform()) {
    return static_cast<double>(scaled_difference(x, sp, i, j)) *
           static_cast<double>(sp.scale()) /
           (static_cast<double>(sp.scaled(i)) * static_cast<double>(sp.scaled(j)));
  }
  return x.node_weight(i) / sp.speed(i) - x.node_weight(j) / sp.speed(j);
}

double migration_probability(const GraphTopology& g, const SpeedProfile& sp,
                             const LoadState& x, const ProtocolParams& params, NodeId i,
                             NodeId j) {
  require_edge(g, i, j);
  return raw_probability(g, sp, x, params, i, j);
}

double expected_flow(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                     const ProtocolParams& params, NodeId i, NodeId j) {
  require_edge(g, i, j);
  if (!exceeds_threshold(x, sp, i, j)) return 0.0;
  if (params.variant == Variant::algorithm2 && params.printed_weighted_rule) {
    return x.node_weight(i) * raw_probability(g, sp, x, params, i, j) / g.degree(i);
  }
  const double dij = std::max(g.degree(i), g.degree(j));
  return load_difference(x, sp, i, j) /
         (params.alpha * dij * (1 / sp.speed(i) + 1 / sp.speed(j)));
}

std::vector<DirectedEdge> non_nash_edges(const GraphTopology& g, const SpeedProfile& sp,
                                         const LoadState& x) {
  std::vector<DirectedEdge> out;
  for (NodeId i = 0; i < g.node_count(); ++i)
    for (NodeId j : g.neighbors(i))
      if (exceeds_threshold(x, sp, i, j)) out.push_back({i, j});
  return out;
}

bool is_nash(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x) {
  for (const auto& e : g.edges()) {
    if (exceeds_threshold(x, sp, e.u, e.v) || exceeds_threshold(x, sp, e.v, e.u)) return false;
  }
  return true;
}

bool is_approx_nash(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                    double eps) {
  if (!(eps > 0 && eps < 1)) {
    throw ConfigError(fmt::format("approximation factor {} is outside (0, 1)", eps));
  }
  auto ok = [&](NodeId i, NodeId j) {
    return (1 - eps) * load(x, sp, i) - load(x, sp, j) <= 1 / sp.speed(j);
  };
  for (const auto& e : g.edges()) {
    if (!ok(e.u, e.v) || !ok(e.v, e.u)) return false;
  }
  return true;
}

// --- rounds ------------------------------------------------------------------

std::int64_t RoundOutcome::moved_tasks() const {
  std::int64_t total = 0;
  for (const auto& m : moves) total += m.tasks;
  return total;
}

double RoundOutcome::moved_weight() const {
  double total = 0;
  for (const auto& m : moves) total += m.weight;
  return total;
}

namespace {

constexpr std::uint32_t kAggregateSlot = 0xFFFFFFFFu;

// Per-neighbour migration probabilities of node i, indexed like neighbors(i).
struct NodeRule {
  std::vector<double> p;
  double leave = 0;  // sum_k p_k / deg(i)
};

std::vector<NodeRule> round_rules(const GraphTopology& g, const SpeedProfile& sp,
                                  const LoadState& x, const ProtocolParams& params) {
  std::vector<NodeRule> rules(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto nbrs = g.neighbors(i);
    auto& rule = rules[i];
    if (x.node_weight(i) <= 0) continue;
    rule.p.assign(nbrs.size(), 0.0);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      rule.p[k] = raw_probability(g, sp, x, params, i, nbrs[k]);
      rule.leave += rule.p[k];
    }
    rule.leave /= static_cast<double>(nbrs.size());
  }
  return rules;
}

// Destination index for a task whose neighbour coin is u_pick and migration
// coin u_move; -1 to stay.
int per_task_choice(const NodeRule& rule, double u_pick, double u_move) {
  const auto deg = rule.p.size();
  auto k = std::min(static_cast<std::size_t>(u_pick * static_cast<double>(deg)), deg - 1);
  return u_move < rule.p[k] ? static_cast<int>(k) : -1;
}

RoundOutcome uniform_round(const GraphTopology& g, const LoadState& x,
                           const ProtocolParams& params, const std::vector<NodeRule>& rules,
                           std::uint64_t round_index) {
  const CounterRng rng(params.rng_seed, params.trial);
  std::vector<std::int64_t> next = x.counts();
  std::vector<Migration> moves;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto& rule = rules[i];
    if (rule.leave <= 0) continue;
    auto nbrs = g.neighbors(i);
    std::vector<std::int64_t> out(nbrs.size(), 0);
    if (params.sampler == Sampler::per_task) {
      for (std::int64_t slot = 0; slot < x.count(i); ++slot) {
        auto [u_pick, u_move] = rng.uniform_pair(round_index, static_cast<std::uint32_t>(i),
                                                 static_cast<std::uint64_t>(slot));
        int k = per_task_choice(rule, u_pick, u_move);
        if (k >= 0) ++out[k];
      }
    } else {
      auto stream = rng.stream(round_index, static_cast<std::uint32_t>(i), kAggregateSlot);
      std::int64_t remaining = x.count(i);
      double mass_left = 1.0;
      const double deg = static_cast<double>(nbrs.size());
      for (std::size_t k = 0; k < nbrs.size() && remaining > 0; ++k) {
        const double q = rule.p[k] / deg;
        if (q <= 0) continue;
        const double conditional = std::min(1.0, q / mass_left);
        std::binomial_distribution<std::int64_t> draw(remaining, conditional);
        out[k] = draw(stream);
        remaining -= out[k];
        mass_left -= q;
      }
    }
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (out[k] == 0) continue;
      next[i] -= out[k];
      next[nbrs[k]] += out[k];
      moves.push_back({i, nbrs[k], out[k], static_cast<double>(out[k])});
    }
  }
  return {LoadState::uniform(std::move(next)), std::move(moves)};
}

RoundOutcome weighted_round(const GraphTopology& g, const LoadState& x,
                            const ProtocolParams& params, const std::vector<NodeRule>& rules,
                            std::uint64_t round_index) {
  const CounterRng rng(params.rng_seed, params.trial);
  struct Departure {
    std::int64_t slot;
    NodeId to;
  };
  std::vector<std::vector<Departure>> departures(g.node_count());

  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto& rule = rules[i];
    if (rule.leave <= 0) continue;
    auto nbrs = g.neighbors(i);
    const auto count = x.task_count(i);
    auto& dep = departures[i];
    if (params.sampler == Sampler::per_task) {
      for (std::int64_t slot = 0; slot < count; ++slot) {
        auto [u_pick, u_move] = rng.uniform_pair(round_index, static_cast<std::uint32_t>(i),
                                                 static_cast<std::uint64_t>(slot));
        int k = per_task_choice(rule, u_pick, u_move);
        if (k >= 0) dep.push_back({slot, nbrs[k]});
      }
    } else {
      // Gaps between migrating slots are geometric with success rate `leave`;
      // the destination is then drawn proportionally to p_k.
      auto stream = rng.stream(round_index, static_cast<std::uint32_t>(i), kAggregateSlot);
      const double log_stay = std::log1p(-rule.leave);
      std::int64_t slot = -1;
      while (true) {
        const double u = stream.uniform();
        const double gap = std::floor(std::log1p(-u) / log_stay);
        if (!(gap < static_cast<double>(count - slot))) break;
        slot += static_cast<std::int64_t>(gap) + 1;
        if (slot >= count) break;
        const double target = stream.uniform() * rule.leave * static_cast<double>(nbrs.size());
        double acc = 0;
        std::size_t k = 0;
        for (; k + 1 < nbrs.size(); ++k) {
          acc += rule.p[k];
          if (target < acc) break;
        }
        while (rule.p[k] <= 0 && k > 0) --k;
        dep.push_back({slot, nbrs[k]});
      }
    }
  }

  std::vector<std::vector<double>> next(g.node_count());
  std::vector<Migration> moves;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto tasks = x.tasks(i);
    const auto& dep = departures[i];
    next[i].reserve(tasks.size());
    std::size_t d = 0;
    for (std::size_t slot = 0; slot < tasks.size(); ++slot) {
      if (d < dep.size() && dep[d].slot == static_cast<std::int64_t>(slot)) {
        ++d;
        continue;
      }
      next[i].push_back(tasks[slot]);
    }
  }
  for (NodeId i = 0; i < g.node_count(); ++i) {
    auto tasks = x.tasks(i);
    for (const auto& dep : departures[i]) {
      const double w = tasks[static_cast<std::size_t>(dep.slot)];
      next[dep.to].push_back(w);
      moves.push_back({i, dep.to, 1, w});
    }
  }
  return {LoadState::weighted(std::move(next)), std::move(moves)};
}

}  // namespace

RoundOutcome step_round(const GraphTopology& g, const SpeedProfile& sp, const LoadState& x,
                        const ProtocolParams& params, std::uint64_t round_index) {
  if (x.node_count() != g.node_count() || sp.size() != g.node_count()) {
    throw ConfigError("graph, speeds and state disagree on the node count");
  }
  auto rules = round_rules(g, sp, x, params);
  return x.is_uniform() ? uniform_round(g, x, params, rules, round_index)
                        : weighted_round(g, x, params, rules, round_index);
}

LoadState settle_to_nash(const GraphTopology& g, const SpeedProfile& sp, LoadState x) {
  if (!x.is_uniform()) throw ConfigError("settle_to_nash is defined for uniform tasks");
  auto counts = x.counts();
  bool moved = true;
  while (moved) {
    moved = false;
    auto current = LoadState::uniform(counts);
    for (NodeId i = 0; i < g.node_count() && !moved; ++i) {
      for (NodeId j : g.neighbors(i)) {
        if (exceeds_threshold(current, sp, i, j)) {
          --counts[i];
          ++counts[j];
          moved = true;
          break;
        }
      }
    }
  }
  return LoadState::uniform(std::move(counts));
}

// --- initial states ----------------------------------------------------------

LoadState all_on_one_node(int n, std::int64_t m, NodeId node) {
  if (n < 1) throw ConfigError("state needs at least one node");
  if (node < 0 || node >= n) throw ConfigError(fmt::format("node {} out of range", node));
  if (m < 0) throw ConfigError("task count must be non-negative");
  std::vector<std::int64_t> counts(n, 0);
  counts[node] = m;
  return LoadState::uniform(std::move(counts));
}

LoadState uniform_random_placement(int n, std::int64_t m, std::uint64_t seed) {
  if (n < 1) throw ConfigError("state needs at least one node");
  if (m < 0) throw ConfigError("task count must be non-negative");
  std::vector<std::int64_t> counts(n, 0);
  auto stream = CounterRng(seed, 0).stream(0, 0, 1);
  for (std::int64_t t = 0; t < m; ++t) ++counts[to_bounded(stream(), static_cast<std::uint64_t>(n))];
  return LoadState::uniform(std::move(counts));
}

LoadState proportional_placement(const SpeedProfile& sp, std::int64_t m) {
  if (m < 0) throw ConfigError("task count must be non-negative");
  const int n = sp.size();
  const __int128 total = sp.scaled_total();
  std::vector<std::int64_t> counts(n);
  std::vector<std::pair<__int128, int>> remainders;
  std::int64_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    __int128 share = static_cast<__int128>(m) * sp.scaled(i);
    counts[i] = static_cast<std::int64_t>(share / total);
    assigned += counts[i];
    remainders.emplace_back(share % total, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t k = 0; k < m - assigned; ++k) ++counts[remainders[k].second];
  return LoadState::uniform(std::move(counts));
}

LoadState weighted_random(int n, std::int64_t count, std::uint64_t seed, NodeId node) {
  if (n < 1) throw ConfigError("state needs at least one node");
  if (count < 0) throw ConfigError("task count must be non-negative");
  if (node >= n) throw ConfigError(fmt::format("node {} out of range", node));
  std::vector<std::vector<double>> tasks(n);
  auto stream = CounterRng(seed, 0).stream(0, 0, 2);
  for (std::int64_t t = 0; t < count; ++t) {
    const double w = 1.0 - stream.uniform();  // (0, 1]
    const auto target =
        node >= 0 ? static_cast<std::size_t>(node)
                  : static_cast<std::size_t>(to_bounded(stream(), static_cast<std::uint64_t>(n)));
    tasks[target].push_back(w);
  }
  return LoadState::weighted(std::move(tasks));
}

}  // namespace slb
