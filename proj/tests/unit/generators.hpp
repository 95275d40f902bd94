#pragma once

// Small hand-rolled generators for property tests. Seeded std::mt19937_64 so
// failures reproduce.

#include <cstdint>
#include <random>
#include <vector>

#include "slb/graph.hpp"
#include "slb/protocol.hpp"
#include "slb/speeds.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random spanning tree plus extra edges: always connected.
inline slb::GraphTopology connected_graph(Rng& rng, int n, double extra_density) {
  std::vector<slb::Edge> edges;
  for (int v = 1; v < n; ++v) edges.push_back({uniform_int(rng, 0, v - 1), v});
  std::bernoulli_distribution coin(extra_density);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v});
  return slb::GraphTopology::from_edges(n, edges);
}

// Rationals p/q with q in {1, 2, 3, 4, 6} and value in [1, max_value].
inline slb::SpeedProfile rational_speeds(Rng& rng, int n, int max_value = 4) {
  static const int dens[] = {1, 2, 3, 4, 6};
  std::vector<slb::Ratio> values;
  for (int i = 0; i < n; ++i) {
    int q = dens[uniform_int(rng, 0, 4)];
    int p = uniform_int(rng, q, max_value * q);
    values.emplace_back(p, q);
  }
  return slb::SpeedProfile::from_rationals(values);
}

inline slb::SpeedProfile integer_speeds(Rng& rng, int n, int max_value = 3) {
  std::vector<std::int64_t> values;
  for (int i = 0; i < n; ++i) values.push_back(uniform_int(rng, 1, max_value));
  return slb::SpeedProfile::from_integers(values);
}

inline slb::LoadState uniform_state(Rng& rng, int n, int max_count) {
  std::vector<std::int64_t> counts;
  for (int i = 0; i < n; ++i) counts.push_back(uniform_int(rng, 0, max_count));
  return slb::LoadState::uniform(counts);
}

inline slb::LoadState weighted_state(Rng& rng, int n, int max_tasks) {
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::vector<std::vector<double>> tasks(n);
  for (auto& list : tasks) {
    int k = uniform_int(rng, 0, max_tasks);
    for (int t = 0; t < k; ++t) list.push_back(1.0 - w(rng));
  }
  return slb::LoadState::weighted(tasks);
}

}  // namespace gen
