#include "roadgraph/refine.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"

namespace roadgraph {

void RefineParams::validate() const {
  if (!(tau > 0.0)) throw ConfigError("refine: tau must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("refine: gamma must be nonnegative");
  if (!(step_scale > 0.0)) throw ConfigError("refine: step scale must be positive");
  if (max_iters < 1) throw ConfigError("refine: max iterations must be >= 1");
  if (merge_period < 1) throw ConfigError("refine: merge period must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("refine: tolerance must be positive");
}

namespace {

constexpr double kEdgeCell = 32.0;

// Edge-bucket index: each edge is registered in every cell its bounding box
// touches; candidate pairs are edges sharing a cell.
std::vector<std::pair<std::size_t, std::size_t>> candidate_edge_pairs(const std::vector<geom::Segment>& segs) {
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells;
  auto key = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xFFFFFFFFULL);
  };
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    const auto x0 = static_cast<std::int64_t>(std::floor(std::min(s.p.x, s.q.x) / kEdgeCell));
    const auto x1 = static_cast<std::int64_t>(std::floor(std::max(s.p.x, s.q.x) / kEdgeCell));
    const auto y0 = static_cast<std::int64_t>(std::floor(std::min(s.p.y, s.q.y) / kEdgeCell));
    const auto y1 = static_cast<std::int64_t>(std::floor(std::max(s.p.y, s.q.y) / kEdgeCell));
    for (auto cy = y0; cy <= y1; ++cy) {
      for (auto cx = x0; cx <= x1; ++cx) cells[key(cx, cy)].push_back(i);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [k, list] : cells) {
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) pairs.emplace_back(list[a], list[b]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

struct Working {
  std::vector<Node> nodes;
  std::vector<char> alive;
  std::vector<EdgeKey> edges;  // by node index
  std::vector<char> edge_alive;
  std::unordered_map<NodeId, std::size_t> index;

  explicit Working(const RoadGraph& g) : nodes(g.nodes()), alive(g.node_count(), 1) {
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i].id] = i;
    for (const EdgeKey& e : g.edges()) {
      edges.push_back({static_cast<NodeId>(index[e.a]), static_cast<NodeId>(index[e.b])});
      edge_alive.push_back(1);
    }
  }

  Point pos(std::size_t i) const { return nodes[i].pos(); }

  struct IndexCrossing {
    std::size_t e1, e2;
    Point at;
  };

  std::vector<IndexCrossing> crossings() const {
    std::vector<std::size_t> live;
    std::vector<geom::Segment> segs;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (!edge_alive[k]) continue;
      live.push_back(k);
      segs.push_back({pos(static_cast<std::size_t>(edges[k].a)), pos(static_cast<std::size_t>(edges[k].b))});
    }
    std::vector<IndexCrossing> out;
    for (const auto& [i, j] : candidate_edge_pairs(segs)) {
      const EdgeKey& e = edges[live[i]];
      const EdgeKey& f = edges[live[j]];
      if (e.a == f.a || e.a == f.b || e.b == f.a || e.b == f.b) continue;
      if (auto p = geom::intersection_point(segs[i], segs[j])) out.push_back({live[i], live[j], *p});
    }
    return out;
  }

  std::vector<std::size_t> neighbors(std::size_t v) const {
    std::vector<std::size_t> nb;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (!edge_alive[k]) continue;
      if (static_cast<std::size_t>(edges[k].a) == v) nb.push_back(static_cast<std::size_t>(edges[k].b));
      if (static_cast<std::size_t>(edges[k].b) == v) nb.push_back(static_cast<std::size_t>(edges[k].a));
    }
    return nb;
  }

  bool adjacent(std::size_t u, std::size_t v) const {
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (!edge_alive[k]) continue;
      const auto a = static_cast<std::size_t>(edges[k].a), b = static_cast<std::size_t>(edges[k].b);
      if ((a == u && b == v) || (a == v && b == u)) return true;
    }
    return false;
  }

  void remove_node(std::size_t v) {
    alive[v] = 0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (edge_alive[k] && (static_cast<std::size_t>(edges[k].a) == v || static_cast<std::size_t>(edges[k].b) == v)) {
        edge_alive[k] = 0;
      }
    }
  }

  RoadGraph to_graph() const {
    std::vector<Node> out_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (alive[i]) out_nodes.push_back(nodes[i]);
    }
    std::vector<EdgeKey> out_edges;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (edge_alive[k]) {
        out_edges.push_back(EdgeKey::make(nodes[static_cast<std::size_t>(edges[k].a)].id,
                                          nodes[static_cast<std::size_t>(edges[k].b)].id));
      }
    }
    return RoadGraph(std::move(out_nodes), std::move(out_edges));
  }

  EdgeKey ids(std::size_t k) const {
    return EdgeKey::make(nodes[static_cast<std::size_t>(edges[k].a)].id, nodes[static_cast<std::size_t>(edges[k].b)].id);
  }
};

}  // namespace

std::vector<Crossing> find_crossings(const RoadGraph& g) {
  const Working w(g);
  std::vector<Crossing> out;
  for (const auto& c : w.crossings()) out.push_back({w.ids(c.e1), w.ids(c.e2), c.at});
  return out;
}

RefineResult refine_graph(const RoadGraph& g, const RefineParams& p) {
  p.validate();
  Working w(g);
  RefineResult result;
  const std::size_t n = w.nodes.size();

  // Node processing order: ascending id.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return w.nodes[l].id < w.nodes[r].id; });

  for (int t = 1; t <= p.max_iters; ++t) {
    result.iterations = t;
    std::vector<Point> delta(n, Point{});
    std::vector<char> touched(n, 0);
    for (const auto& c : w.crossings()) {
      for (const std::size_t k : {c.e1, c.e2}) {
        const auto a = static_cast<std::size_t>(w.edges[k].a), b = static_cast<std::size_t>(w.edges[k].b);
        for (const auto& [v, other] : {std::pair{a, b}, std::pair{b, a}}) {
          const double d = geom::dist(w.pos(v), c.at);
          if (d >= p.tau) continue;
          const Point dir = w.pos(other) - w.pos(v);
          const double len = geom::norm(dir);
          if (len == 0.0) continue;
          delta[v] = delta[v] + ((p.tau - d) / p.tau / len) * dir;
          touched[v] = 1;
        }
      }
    }

    if (t % p.merge_period == 0) {
      for (std::size_t k : order) {
        if (!w.alive[k]) continue;
        const auto nb = w.neighbors(k);
        if (nb.size() != 2) continue;
        if (geom::dist(w.pos(nb[0]), w.pos(nb[1])) >= p.gamma) continue;
        const bool linked = w.adjacent(nb[0], nb[1]);
        w.remove_node(k);
        if (!linked) {
          w.edges.push_back({static_cast<NodeId>(nb[0]), static_cast<NodeId>(nb[1])});
          w.edge_alive.push_back(1);
        }
      }
      continue;
    }

    int moved = 0;
    for (std::size_t v : order) {
      if (!touched[v] || !w.alive[v]) continue;
      const double mag = geom::norm(delta[v]);
      if (mag <= p.tolerance) continue;
      const Point target = w.pos(v) + (p.step_scale / mag) * delta[v];
      bool overlaps = false;
      for (std::size_t u = 0; u < n && !overlaps; ++u) {
        overlaps = u != v && w.alive[u] && geom::dist(w.pos(u), target) < p.overlap_radius;
      }
      if (overlaps) continue;
      w.nodes[v].x = target.x;
      w.nodes[v].y = target.y;
      ++moved;
    }
    if (moved == 0) {
      result.converged = true;
      break;
    }
  }

  for (const auto& c : w.crossings()) {
    for (const std::size_t k : {c.e1, c.e2}) {
      result.witnesses.push_back(w.nodes[static_cast<std::size_t>(w.edges[k].a)].id);
      result.witnesses.push_back(w.nodes[static_cast<std::size_t>(w.edges[k].b)].id);
    }
  }
  result.graph = w.to_graph();
  return result;
}

std::vector<Point> overpass_points(const RoadGraph& g, const RefineParams& p) {
  const RefineResult r = refine_graph(g, p);
  std::vector<Point> out;
  std::unordered_set<NodeId> seen;
  for (NodeId id : r.witnesses) {
    if (seen.insert(id).second) out.push_back(r.graph.position(id));
  }
  return out;
}

}  // namespace roadgraph
