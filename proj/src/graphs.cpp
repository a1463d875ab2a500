#include "roadgraph/graphs.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "roadgraph/error.hpp"
#include "roadgraph/spatial_hash.hpp"

namespace roadgraph {

RoadGraph build_euclidean_graph(std::span<const Node> vertices, double d_nei) {
  if (!(d_nei > 0.0)) throw ConfigError("d_nei must be positive");
  SpatialHash hash(d_nei);
  for (std::size_t i = 0; i < vertices.size(); ++i) hash.insert(vertices[i].pos(), i);

  std::vector<EdgeKey> edges;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    std::vector<std::size_t> near;
    hash.for_each_within(vertices[i].pos(), d_nei, true, [&](std::size_t j, Point) {
      if (j > i) near.push_back(j);
    });
    std::sort(near.begin(), near.end());
    for (std::size_t j : near) edges.push_back(EdgeKey::make(vertices[i].id, vertices[j].id));
  }
  return RoadGraph(std::vector<Node>(vertices.begin(), vertices.end()), std::move(edges));
}

RoadGraph build_euclidean_graph(std::span<const Point> vertices, double d_nei) {
  std::vector<Node> nodes;
  nodes.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    nodes.push_back(Node{static_cast<NodeId>(i), vertices[i].x, vertices[i].y});
  }
  return build_euclidean_graph(std::span<const Node>(nodes), d_nei);
}

std::size_t LineGraphView::edge_count() const {
  std::size_t twice = 0;
  for (const auto& adj : line_adj) twice += adj.size();
  return twice / 2;
}

LineGraphView line_graph(std::span<const EdgeKey> edges) {
  LineGraphView lg;
  lg.line_nodes.reserve(edges.size());
  for (const EdgeKey& e : edges) lg.line_nodes.push_back(EdgeKey::make(e.a, e.b));
  std::sort(lg.line_nodes.begin(), lg.line_nodes.end());
  lg.line_nodes.erase(std::unique(lg.line_nodes.begin(), lg.line_nodes.end()), lg.line_nodes.end());

  // Incidence lists keyed by endpoint id.
  std::unordered_map<NodeId, std::vector<std::size_t>> incident;
  for (std::size_t k = 0; k < lg.line_nodes.size(); ++k) {
    incident[lg.line_nodes[k].a].push_back(k);
    incident[lg.line_nodes[k].b].push_back(k);
  }
  lg.line_adj.assign(lg.line_nodes.size(), {});
  for (const auto& [v, inc] : incident) {
    for (std::size_t i = 0; i < inc.size(); ++i) {
      for (std::size_t j = i + 1; j < inc.size(); ++j) {
        lg.line_adj[inc[i]].push_back(inc[j]);
        lg.line_adj[inc[j]].push_back(inc[i]);
      }
    }
  }
  for (auto& adj : lg.line_adj) std::sort(adj.begin(), adj.end());
  return lg;
}

LineGraphView line_graph(const RoadGraph& g) { return line_graph(std::span<const EdgeKey>(g.edges())); }

std::vector<std::vector<std::size_t>> connected_components(const RoadGraph& g) {
  std::vector<std::vector<std::size_t>> comps;
  std::vector<char> seen(g.node_count(), 0);
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp{s};
    seen[s] = 1;
    for (std::size_t head = 0; head < comp.size(); ++head) {
      for (std::size_t nb : g.neighbors(comp[head])) {
        if (!seen[nb]) {
          seen[nb] = 1;
          comp.push_back(nb);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

SpecialComponentCounts count_special_components(const RoadGraph& g) {
  SpecialComponentCounts counts;
  for (const auto& comp : connected_components(g)) {
    // Degrees within a component equal full degrees.
    if (comp.size() == 3) {
      if (std::all_of(comp.begin(), comp.end(), [&](std::size_t v) { return g.degree(v) == 2; })) ++counts.k3;
    } else if (comp.size() == 4) {
      int deg3 = 0, deg1 = 0;
      for (std::size_t v : comp) {
        if (g.degree(v) == 3) ++deg3;
        if (g.degree(v) == 1) ++deg1;
      }
      if (deg3 == 1 && deg1 == 3) ++counts.k13;
    }
  }
  return counts;
}

}  // namespace roadgraph
