#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

namespace slb {

using NodeId = int;

// Undirected edge, stored with u < v.
struct Edge {
  NodeId u;
  NodeId v;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class GraphFamily {
  complete,
  cycle,
  path,
  torus2d,
  grid2d,
  hypercube,
  explicit_edges,
};

std::string_view to_string(GraphFamily family);
// Accepts the canonical names above plus "ring", "mesh", "torus", "grid",
// "explicit".
GraphFamily parse_graph_family(std::string_view name);

// Immutable, connected, simple undirected graph on nodes 0..n-1.
class GraphTopology {
 public:
  // Throws ConfigError on self-loops, out-of-range endpoints or a
  // disconnected result. Duplicate edges are merged.
  static GraphTopology from_edges(int node_count, std::vector<Edge> edges);

  int node_count() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Sorted ascending.
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  int degree(NodeId v) const { return static_cast<int>(adjacency_[v].size()); }
  int max_degree() const { return max_degree_; }
  int min_degree() const { return min_degree_; }
  int diameter() const { return diameter_; }

  bool has_edge(NodeId a, NodeId b) const;
  // Hop distances from source; -1 for unreachable nodes.
  std::vector<int> bfs_distances(NodeId source) const;

 private:
  GraphTopology() = default;

  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  int max_degree_ = 0;
  int min_degree_ = 0;
  int diameter_ = 0;
};

// size_params per family:
//   complete, cycle, path: {n}
//   torus2d, grid2d:       {rows, cols}
//   hypercube:             {dimension}
// Explicit graphs go through GraphTopology::from_edges or read_edge_list.
GraphTopology make_graph(GraphFamily family, std::span<const int> size_params);

GraphTopology make_complete(int n);
GraphTopology make_cycle(int n);
GraphTopology make_path(int n);
GraphTopology make_torus(int rows, int cols);
GraphTopology make_grid(int rows, int cols);
GraphTopology make_hypercube(int dimension);

// Builds the family member with exactly n nodes: torus/grid use the most
// square factorization rows x cols (both >= 2), hypercube needs a power of two.
GraphTopology make_graph_with_nodes(GraphFamily family, int n);

// max(deg(i), deg(j)) for an edge (i, j); ConfigError for non-edges.
int pair_degree(const GraphTopology& g, NodeId i, NodeId j);

using Ratio = boost::rational<std::int64_t>;

inline constexpr int kDefaultIsoperimetricCap = 14;

// min |boundary(S)| / |S| over nonempty S with |S| <= n/2, by exhaustive
// enumeration. ConfigError when n exceeds node_cap.
Ratio isoperimetric_number(const GraphTopology& g,
                           int node_cap = kDefaultIsoperimetricCap);

// Plain-text edge list: first line "n", then one "u v" pair per line,
// 0-indexed. Blank lines and lines starting with '#' are skipped.
GraphTopology read_edge_list(std::istream& in);
GraphTopology read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const GraphTopology& g);

}  // namespace slb
