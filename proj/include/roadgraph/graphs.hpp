#pragma once

#include <optional>
#include <span>
#include <vector>

#include "roadgraph/types.hpp"

namespace roadgraph {

// Graph over `vertices` (ids 0..n-1 in input order) with an edge for every
// pair at Euclidean distance <= d_nei.
RoadGraph build_euclidean_graph(std::span<const Point> vertices, double d_nei);

// Same, preserving the ids of the given nodes.
RoadGraph build_euclidean_graph(std::span<const Node> vertices, double d_nei);

// Line graph: one line-node per source edge, canonical order by
// (min endpoint id, max endpoint id); two line-nodes are adjacent iff their
// edges share an endpoint.
struct LineGraphView {
  std::vector<EdgeKey> line_nodes;
  std::vector<std::vector<std::size_t>> line_adj;  // ascending indices

  std::size_t size() const { return line_nodes.size(); }
  std::size_t edge_count() const;
};

LineGraphView line_graph(const RoadGraph& g);
LineGraphView line_graph(std::span<const EdgeKey> edges);

struct SpecialComponentCounts {
  int k3 = 0;
  int k13 = 0;
  friend bool operator==(const SpecialComponentCounts&, const SpecialComponentCounts&) = default;
};

// Counts connected components that are exactly a triangle or a 3-star.
SpecialComponentCounts count_special_components(const RoadGraph& g);

// Connected components as lists of node indices (ascending).
std::vector<std::vector<std::size_t>> connected_components(const RoadGraph& g);

}  // namespace roadgraph
