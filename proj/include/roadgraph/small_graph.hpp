#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "roadgraph/types.hpp"

// Exhaustive isomorphism machinery for desk-scale graphs. Everything here is
// complete backtracking search (no heuristics that could miss a mapping), so
// it doubles as a test oracle for the structural claims about line graphs.
namespace roadgraph::small {

// Public entry points on RoadGraph refuse graphs larger than this.
inline constexpr std::size_t kOracleNodeCap = 10;
// Internal limit of the bitmask representation (line graphs of 6-node graphs
// have up to 15 nodes).
inline constexpr std::size_t kMaxNodes = 32;

// Dense adjacency as bitmasks; nodes are 0..n-1.
class SmallGraph {
 public:
  SmallGraph() = default;
  explicit SmallGraph(std::size_t n);

  std::size_t size() const { return adj_.size(); }
  void add_edge(std::size_t u, std::size_t v);
  bool adjacent(std::size_t u, std::size_t v) const { return (adj_[u] >> v) & 1U; }
  std::uint32_t row(std::size_t u) const { return adj_[u]; }
  int degree(std::size_t u) const;
  std::size_t edge_count() const;
  bool connected() const;
  // Edges (u < v) in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

 private:
  std::vector<std::uint32_t> adj_;
};

// Node i of the result is the i-th node of g by ascending id; throws
// CapacityError above `cap`.
SmallGraph from_road_graph(const RoadGraph& g, std::size_t cap = kOracleNodeCap);

// Line graph whose node k is the k-th edge of g.edges().
SmallGraph line_graph(const SmallGraph& g);

bool isomorphic(const SmallGraph& a, const SmallGraph& b);

// True iff some automorphism maps the node set `from` onto `to` (bitmasks).
bool set_isomorphic(const SmallGraph& g, std::uint32_t from, std::uint32_t to);

// color[i] = smallest node index in i's automorphism orbit.
std::vector<std::size_t> orbits(const SmallGraph& g);

// Number of automorphisms (exhaustive count).
std::uint64_t automorphism_count(const SmallGraph& g);

// One representative per isomorphism class of connected graphs on 1..max_n
// nodes, ordered by (node count, edge count, discovery order).
std::vector<SmallGraph> connected_graph_classes(std::size_t max_n);

SmallGraph complete(std::size_t n);
SmallGraph star(std::size_t leaves);
SmallGraph path(std::size_t n);
SmallGraph cycle(std::size_t n);
SmallGraph triangular_prism();

// --- RoadGraph entry points (node cap kOracleNodeCap) ---

bool set_isomorphic(const RoadGraph& g, const std::vector<NodeId>& s, const std::vector<NodeId>& s2);

// Per-node color keyed by node id; the color is the smallest id in the orbit.
std::unordered_map<NodeId, NodeId> orbit_colors(const RoadGraph& g);

// --- Exhaustive structural checks ---

struct WhitneyReport {
  std::size_t graphs_checked = 0;
  std::size_t pairs_checked = 0;
  // Non-isomorphic pairs whose line graphs are isomorphic.
  std::vector<std::pair<SmallGraph, SmallGraph>> violations;
  // True iff the violations are exactly the single pair {K3, K1,3}.
  bool only_k3_k13 = false;
};

WhitneyReport whitney_check(std::size_t max_n);

struct EdgeOrbitReport {
  std::size_t graphs_checked = 0;
  std::size_t edge_pairs_checked = 0;
  // Graphs where line-graph orbit equality disagrees with edge
  // set-isomorphism in the source graph.
  std::vector<SmallGraph> mismatches;
};

// For every connected graph on <= max_n nodes except K3 and K1,3: two edges
// share a line-graph orbit iff their endpoint sets are set-isomorphic.
EdgeOrbitReport edge_orbit_check(std::size_t max_n);

std::string describe(const SmallGraph& g);

}  // namespace roadgraph::small
