#include "slb/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

#include <fmt/format.h>

#include "slb/error.hpp"

namespace slb {

std::string_view to_string(GraphFamily family) {
  switch (family) {
    case GraphFamily::complete: return "complete";
    case GraphFamily::cycle: return "cycle";
    case GraphFamily::path: return "path";
    case GraphFamily::torus2d: return "torus2d";
    case GraphFamily::grid2d: return "grid2d";
    case GraphFamily::hypercube: return "hypercube";
    case GraphFamily::explicit_edges: return "explicit";
  }
  return "unknown";
}

GraphFamily parse_graph_family(std::string_view name) {
  if (name == "complete") return GraphFamily::complete;
  if (name == "cycle" || name == "ring") return GraphFamily::cycle;
  if (name == "path") return GraphFamily::path;
  if (name == "torus2d" || name == "torus" || name == "mesh") return GraphFamily::torus2d;
  if (name == "grid2d" || name == "grid") return GraphFamily::grid2d;
  if (name == "hypercube") return GraphFamily::hypercube;
  if (name == "explicit" || name == "explicit-edge-list") return GraphFamily::explicit_edges;
  throw ConfigError(fmt::format("unknown graph family '{}'", name));
}

GraphTopology GraphTopology::from_edges(int node_count, std::vector<Edge> edges) {
  if (node_count < 1) {
    throw ConfigError(fmt::format("graph needs at least one node, got {}", node_count));
  }
  for (auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= node_count || e.v >= node_count) {
      throw ConfigError(fmt::format("edge ({}, {}) out of range for n = {}", e.u, e.v,
                                    node_count));
    }
    if (e.u == e.v) throw ConfigError(fmt::format("self-loop at node {}", e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  GraphTopology g;
  g.edges_ = std::move(edges);
  g.adjacency_.assign(node_count, {});
  for (const auto& e : g.edges_) {
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());

  if (node_count > 1) {
    auto dist = g.bfs_distances(0);
    auto unreached = std::count(dist.begin(), dist.end(), -1);
    if (unreached > 0) {
      throw ConfigError(fmt::format(
          "graph is disconnected: {} of {} nodes unreachable from node 0", unreached,
          node_count));
    }
  }

  g.max_degree_ = 0;
  g.min_degree_ = node_count > 1 ? node_count : 0;
  for (NodeId v = 0; v < node_count; ++v) {
    g.max_degree_ = std::max(g.max_degree_, g.degree(v));
    g.min_degree_ = std::min(g.min_degree_, g.degree(v));
  }

  int diam = 0;
  for (NodeId v = 0; v < node_count; ++v) {
    auto dist = g.bfs_distances(v);
    diam = std::max(diam, *std::max_element(dist.begin(), dist.end()));
  }
  g.diameter_ = diam;
  return g;
}

bool GraphTopology::has_edge(NodeId a, NodeId b) const {
  if (a < 0 || b < 0 || a >= node_count() || b >= node_count()) return false;
  const auto& nbrs = adjacency_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::vector<int> GraphTopology::bfs_distances(NodeId source) const {
  std::vector<int> dist(adjacency_.size(), -1);
  std::queue<NodeId> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : adjacency_[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        frontier.push(w);
      }
    }
  }
  return dist;
}

GraphTopology make_complete(int n) {
  if (n < 2) throw ConfigError(fmt::format("complete graph needs n >= 2, got {}", n));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return GraphTopology::from_edges(n, std::move(edges));
}

GraphTopology make_cycle(int n) {
  if (n < 3) throw ConfigError(fmt::format("cycle needs n >= 3, got {}", n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return GraphTopology::from_edges(n, std::move(edges));
}

GraphTopology make_path(int n) {
  if (n < 2) throw ConfigError(fmt::format("path needs n >= 2, got {}", n));
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return GraphTopology::from_edges(n, std::move(edges));
}

namespace {

GraphTopology make_lattice(int rows, int cols, bool wrap) {
  if (rows < 2 || cols < 2) {
    throw ConfigError(fmt::format("{} needs both dimensions >= 2, got {}x{}",
                                  wrap ? "torus" : "grid", rows, cols));
  }
  // Row-major labels: node = r * cols + c.
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1});
      else if (wrap) edges.push_back({r * cols, v});
      if (r + 1 < rows) edges.push_back({v, v + cols});
      else if (wrap) edges.push_back({c, v});
    }
  }
  return GraphTopology::from_edges(rows * cols, std::move(edges));
}

}  // namespace

GraphTopology make_torus(int rows, int cols) { return make_lattice(rows, cols, true); }

GraphTopology make_grid(int rows, int cols) { return make_lattice(rows, cols, false); }

GraphTopology make_hypercube(int dimension) {
  if (dimension < 1 || dimension > 20) {
    throw ConfigError(fmt::format("hypercube dimension must be in [1, 20], got {}", dimension));
  }
  int n = 1 << dimension;
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v)
    for (int b = 0; b < dimension; ++b) {
      int w = v ^ (1 << b);
      if (v < w) edges.push_back({v, w});
    }
  return GraphTopology::from_edges(n, std::move(edges));
}

GraphTopology make_graph(GraphFamily family, std::span<const int> size_params) {
  auto need = [&](std::size_t count) {
    if (size_params.size() != count) {
      throw ConfigError(fmt::format("{} expects {} size parameter(s), got {}", to_string(family),
                                    count, size_params.size()));
    }
  };
  switch (family) {
    case GraphFamily::complete: need(1); return make_complete(size_params[0]);
    case GraphFamily::cycle: need(1); return make_cycle(size_params[0]);
    case GraphFamily::path: need(1); return make_path(size_params[0]);
    case GraphFamily::torus2d: need(2); return make_torus(size_params[0], size_params[1]);
    case GraphFamily::grid2d: need(2); return make_grid(size_params[0], size_params[1]);
    case GraphFamily::hypercube: need(1); return make_hypercube(size_params[0]);
    case GraphFamily::explicit_edges:
      throw ConfigError("explicit graphs are built from an edge list, not size parameters");
  }
  throw ConfigError("unknown graph family");
}

GraphTopology make_graph_with_nodes(GraphFamily family, int n) {
  switch (family) {
    case GraphFamily::torus2d:
    case GraphFamily::grid2d: {
      // Most square factorization rows x cols with rows <= cols.
      int rows = 1;
      for (int r = 2; r * r <= n; ++r)
        if (n % r == 0) rows = r;
      if (rows < 2) {
        throw ConfigError(fmt::format("{} needs a node count with a factor pair >= 2, got {}",
                                      to_string(family), n));
      }
      const int cols = n / rows;
      return family == GraphFamily::torus2d ? make_torus(rows, cols) : make_grid(rows, cols);
    }
    case GraphFamily::hypercube: {
      if (n < 2 || !std::has_single_bit(static_cast<unsigned>(n))) {
        throw ConfigError(fmt::format("hypercube needs a power-of-two node count, got {}", n));
      }
      return make_hypercube(std::countr_zero(static_cast<unsigned>(n)));
    }
    default: {
      int params[] = {n};
      return make_graph(family, params);
    }
  }
}

int pair_degree(const GraphTopology& g, NodeId i, NodeId j) {
  if (!g.has_edge(i, j)) throw ConfigError(fmt::format("({}, {}) is not an edge", i, j));
  return std::max(g.degree(i), g.degree(j));
}

Ratio isoperimetric_number(const GraphTopology& g, int node_cap) {
  const int n = g.node_count();
  if (n > node_cap || n > 30) {
    throw ConfigError(fmt::format(
        "isoperimetric number enumeration is capped at n = {} (got n = {}); "
        "use bound-check-only mode",
        node_cap, n));
  }
  if (n < 2) throw ConfigError("isoperimetric number needs at least two nodes");

  std::vector<std::uint32_t> adj(n, 0);
  for (const auto& e : g.edges()) {
    adj[e.u] |= 1u << e.v;
    adj[e.v] |= 1u << e.u;
  }
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);

  std::int64_t best_boundary = 0;
  std::int64_t best_size = 0;
  for (std::uint32_t subset = 1; subset <= full && subset != 0; ++subset) {
    int size = std::popcount(subset);
    if (2 * size > n) continue;
    std::int64_t boundary = 0;
    for (std::uint32_t rest = subset; rest != 0; rest &= rest - 1) {
      int v = std::countr_zero(rest);
      boundary += std::popcount(adj[v] & ~subset & full);
    }
    // boundary/size < best_boundary/best_size
    if (best_size == 0 || boundary * best_size < best_boundary * size) {
      best_boundary = boundary;
      best_size = size;
    }
  }
  return Ratio(best_boundary, best_size);
}

GraphTopology read_edge_list(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_content_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '#') continue;
      return true;
    }
    return false;
  };

  if (!next_content_line(line)) throw ConfigError("edge list: missing node count line");
  int n = 0;
  {
    std::istringstream head(line);
    if (!(head >> n) || n < 1) {
      throw ConfigError(fmt::format("edge list line {}: expected positive node count", line_no));
    }
  }
  std::vector<Edge> edges;
  while (next_content_line(line)) {
    std::istringstream row(line);
    long long u = 0, v = 0;
    std::string extra;
    if (!(row >> u >> v) || (row >> extra)) {
      throw ConfigError(fmt::format("edge list line {}: expected 'u v'", line_no));
    }
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw ConfigError(fmt::format("edge list line {}: node out of range [0, {})", line_no, n));
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return GraphTopology::from_edges(n, std::move(edges));
}

GraphTopology read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open edge list '{}'", path));
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const GraphTopology& g) {
  out << g.node_count() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

}  // namespace slb
