#include "roadgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <tuple>
#include <unordered_set>

#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"
#include "roadgraph/parallel.hpp"
#include "roadgraph/spatial_hash.hpp"

namespace roadgraph {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using WeightedAdj = std::vector<std::vector<std::pair<std::size_t, double>>>;

std::vector<double> dijkstra(const WeightedAdj& adj, std::size_t src, double limit = kInf) {
  std::vector<double> d(adj.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    const auto [du, u] = pq.top();
    pq.pop();
    if (du > d[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      const double nd = du + w;
      if (nd < d[v] && nd <= limit) {
        d[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return d;
}

// Undirected line direction in degrees, [0, 180).
double line_angle(Point a, Point b) {
  double deg = std::atan2(b.y - a.y, b.x - a.x) * 180.0 / std::numbers::pi;
  deg = std::fmod(deg + 360.0, 180.0);
  return deg >= 180.0 ? deg - 180.0 : deg;
}

double angle_gap(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 180.0 - d);
}

// ---------------------------------------------------------------------------
// TOPO

struct SampleGraph {
  std::vector<Point> pos;
  std::vector<std::vector<double>> dirs;
  WeightedAdj adj;

  std::size_t add(Point p) {
    pos.push_back(p);
    dirs.emplace_back();
    adj.emplace_back();
    return pos.size() - 1;
  }
  void link(std::size_t u, std::size_t v) {
    const double w = geom::dist(pos[u], pos[v]);
    adj[u].push_back({v, w});
    adj[v].push_back({u, w});
  }
};

// Samples are laid out by arc length along chains: maximal paths whose
// interior nodes have degree 2. Chain ends (and isolated nodes) come first in
// graph order; each chain of length L is cut into ceil(L / interval) equal
// pieces, so sample density does not depend on how finely the input graph
// was segmented.
SampleGraph sample_graph(const RoadGraph& g, double interval) {
  SampleGraph s;
  const std::size_t n = g.node_count();
  std::vector<std::ptrdiff_t> sample_of(n, -1);
  auto is_end = [&](std::size_t i) { return g.degree(i) != 2; };
  for (std::size_t i = 0; i < n; ++i) {
    if (is_end(i)) sample_of[i] = static_cast<std::ptrdiff_t>(s.add(g.nodes()[i].pos()));
  }

  std::unordered_set<EdgeKey, EdgeKeyHash> used;
  auto key = [&](std::size_t u, std::size_t v) { return EdgeKey::make(g.nodes()[u].id, g.nodes()[v].id); };

  auto emit_chain = [&](const std::vector<std::size_t>& chain) {
    std::vector<double> cum{0.0};
    for (std::size_t k = 1; k < chain.size(); ++k) {
      cum.push_back(cum.back() + geom::dist(g.nodes()[chain[k - 1]].pos(), g.nodes()[chain[k]].pos()));
    }
    const double total = cum.back();
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / interval - 1e-9)));
    const double step = total / static_cast<double>(pieces);
    auto seg_angle = [&](std::size_t k) {
      return line_angle(g.nodes()[chain[k]].pos(), g.nodes()[chain[k + 1]].pos());
    };
    const std::size_t first = static_cast<std::size_t>(sample_of[chain.front()]);
    const std::size_t last = static_cast<std::size_t>(sample_of[chain.back()]);
    if (total > 0.0) {
      s.dirs[first].push_back(seg_angle(0));
      s.dirs[last].push_back(seg_angle(chain.size() - 2));
    }
    std::size_t prev = first, seg = 0;
    for (std::size_t k = 1; k < pieces; ++k) {
      const double at = step * static_cast<double>(k);
      while (seg + 2 < chain.size() && cum[seg + 1] < at) ++seg;
      const double len = cum[seg + 1] - cum[seg];
      const double t = len > 0.0 ? (at - cum[seg]) / len : 0.0;
      const std::size_t cur =
          s.add(geom::lerp(g.nodes()[chain[seg]].pos(), g.nodes()[chain[seg + 1]].pos(), std::clamp(t, 0.0, 1.0)));
      s.dirs[cur].push_back(seg_angle(seg));
      s.link(prev, cur);
      prev = cur;
    }
    if (prev != last) s.link(prev, last);
  };

  auto walk = [&](std::size_t start, std::size_t next) {
    std::vector<std::size_t> chain{start};
    used.insert(key(start, next));
    std::size_t prev = start, cur = next;
    while (sample_of[cur] < 0) {
      chain.push_back(cur);
      const auto& nb = g.neighbors(cur);
      const std::size_t nxt = nb[0] == prev ? nb[1] : nb[0];
      used.insert(key(cur, nxt));
      prev = cur;
      cur = nxt;
    }
    chain.push_back(cur);
    return chain;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!is_end(i)) continue;
    for (std::size_t j : g.neighbors(i)) {
      if (!used.count(key(i, j))) emit_chain(walk(i, j));
    }
  }
  // Cycles made only of degree-2 nodes: anchor at the first node.
  for (std::size_t i = 0; i < n; ++i) {
    if (sample_of[i] >= 0) continue;
    const auto& nb = g.neighbors(i);
    if (used.count(key(i, nb[0]))) continue;
    sample_of[i] = static_cast<std::ptrdiff_t>(s.add(g.nodes()[i].pos()));
    emit_chain(walk(i, nb[0]));
  }
  return s;
}

bool directions_agree(const std::vector<double>& a, const std::vector<double>& b, double threshold) {
  // Isolated nodes carry no direction; treat them as compatible with anything.
  if (a.empty() || b.empty()) return true;
  for (double x : a) {
    for (double y : b) {
      if (angle_gap(x, y) <= threshold + 1e-9) return true;
    }
  }
  return false;
}

std::vector<std::size_t> within(const SampleGraph& s, std::size_t src, double limit) {
  const auto d = dijkstra(s.adj, src, limit);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= limit) out.push_back(i);
  }
  return out;
}

std::size_t greedy_match(const SampleGraph& g, const std::vector<std::size_t>& gs, const SampleGraph& p,
                         const std::vector<std::size_t>& ps, const TopoParams& tp) {
  SpatialHash hash(tp.match_radius);
  for (std::size_t k = 0; k < ps.size(); ++k) hash.insert(p.pos[ps[k]], k);
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const Point q = g.pos[gs[i]];
    hash.for_each_within(q, tp.match_radius, true, [&](std::size_t k, Point at) {
      if (directions_agree(g.dirs[gs[i]], p.dirs[ps[k]], tp.angle_threshold)) {
        pairs.emplace_back(geom::dist(q, at), i, k);
      }
    });
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<char> used_g(gs.size(), 0), used_p(ps.size(), 0);
  std::size_t matched = 0;
  for (const auto& [d, i, k] : pairs) {
    if (used_g[i] || used_p[k]) continue;
    used_g[i] = used_p[k] = 1;
    ++matched;
  }
  return matched;
}

}  // namespace

void TopoParams::validate() const {
  if (!(seed_interval > 0 && propagation_dist > 0 && sample_interval > 0 && match_radius > 0 && angle_threshold > 0)) {
    throw ConfigError("topo: all parameters must be positive");
  }
  if (angle_threshold > 90.0) throw ConfigError("topo: angle threshold must be <= 90 degrees");
}

TopoResult topo(const RoadGraph& gt, const RoadGraph& prop, const TopoParams& p) {
  p.validate();
  TopoResult res;
  if (gt.empty() || prop.empty()) return res;

  const SampleGraph gs = sample_graph(gt, p.sample_interval);
  const SampleGraph ps = sample_graph(prop, p.sample_interval);

  std::vector<std::size_t> seeds;
  SpatialHash seed_hash(p.seed_interval);
  for (std::size_t i = 0; i < gs.pos.size(); ++i) {
    if (seed_hash.any_within(gs.pos[i], p.seed_interval, false)) continue;
    seed_hash.insert(gs.pos[i], seeds.size());
    seeds.push_back(i);
  }

  SpatialHash prop_hash(p.match_radius);
  for (std::size_t i = 0; i < ps.pos.size(); ++i) prop_hash.insert(ps.pos[i], i);

  res.seeds.resize(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    TopoSeed& out = res.seeds[k];
    const std::size_t g0 = seeds[k];
    out.at = gs.pos[g0];
    std::size_t best = 0;
    double best_d = kInf;
    prop_hash.for_each_within(out.at, p.match_radius, true, [&](std::size_t j, Point at) {
      const double d = geom::dist(out.at, at);
      if (d < best_d || (d == best_d && j < best)) {
        best_d = d;
        best = j;
      }
    });
    const auto gsub = within(gs, g0, p.propagation_dist);
    out.gt_samples = gsub.size();
    if (best_d == kInf) return;
    out.located = true;
    const auto psub = within(ps, best, p.propagation_dist);
    out.prop_samples = psub.size();
    out.matched = greedy_match(gs, gsub, ps, psub, p);
  });

  std::size_t matched = 0, n_gt = 0, n_prop = 0;
  for (const auto& s : res.seeds) {
    matched += s.matched;
    n_gt += s.gt_samples;
    n_prop += s.prop_samples;
  }
  res.precision = n_prop ? static_cast<double>(matched) / static_cast<double>(n_prop) : 0.0;
  res.recall = n_gt ? static_cast<double>(matched) / static_cast<double>(n_gt) : 0.0;
  const double s = res.precision + res.recall;
  res.f1 = s > 0.0 ? 2.0 * res.precision * res.recall / s : 0.0;
  return res;
}

// ---------------------------------------------------------------------------
// APLS

void AplsParams::validate() const {
  if (!(control_interval > 0.0) || !(snap_radius > 0.0)) throw ConfigError("apls: parameters must be positive");
}

RoadGraph inject_control_nodes(const RoadGraph& g, double interval) {
  std::vector<Node> nodes = g.nodes();
  std::vector<EdgeKey> edges;
  NodeId next = g.empty() ? 0 : g.max_id() + 1;
  for (const EdgeKey& e : g.edges()) {
    const Point a = g.position(e.a), b = g.position(e.b);
    const double len = geom::dist(a, b);
    NodeId prev = e.a;
    for (int k = 1; k * interval < len - 1e-9; ++k) {
      const Point at = geom::lerp(a, b, k * interval / len);
      nodes.push_back({next, at.x, at.y});
      edges.push_back(EdgeKey::make(prev, next));
      prev = next++;
    }
    edges.push_back(EdgeKey::make(prev, e.b));
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

namespace {

WeightedAdj weighted(const RoadGraph& g) {
  WeightedAdj adj(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    for (std::size_t j : g.neighbors(i)) adj[i].push_back({j, geom::dist(g.nodes()[i].pos(), g.nodes()[j].pos())});
  }
  return adj;
}

struct Snapped {
  RoadGraph target;                        // target with split nodes inserted
  std::vector<std::optional<std::size_t>> at;  // per source control node, index into target
};

// Snaps every node of `src` to the nearest point of `dst` (node or edge
// interior) within radius, splitting edges where needed.
Snapped snap_into(const RoadGraph& src, const RoadGraph& dst, double radius) {
  constexpr double kSame = 1e-9;
  struct Hit {
    double d = kInf;
    std::size_t node = 0;   // valid if edge < 0
    std::ptrdiff_t edge = -1;
    double t = 0.0;
  };
  std::vector<Hit> hits(src.node_count());
  SpatialHash node_hash(radius);
  for (std::size_t i = 0; i < dst.node_count(); ++i) node_hash.insert(dst.nodes()[i].pos(), i);

  parallel_for(src.node_count(), [&](std::size_t s) {
    const Point q = src.nodes()[s].pos();
    Hit h;
    node_hash.for_each_within(q, radius, true, [&](std::size_t i, Point at) {
      const double d = geom::dist(q, at);
      if (d < h.d || (d == h.d && h.edge < 0 && i < h.node)) h = {d, i, -1, 0.0};
    });
    for (std::size_t k = 0; k < dst.edge_count(); ++k) {
      const EdgeKey& e = dst.edges()[k];
      const Point a = dst.position(e.a), b = dst.position(e.b);
      if (q.x < std::min(a.x, b.x) - radius || q.x > std::max(a.x, b.x) + radius ||
          q.y < std::min(a.y, b.y) - radius || q.y > std::max(a.y, b.y) + radius) {
        continue;
      }
      const auto [pt, t] = geom::project_onto_segment(q, {a, b});
      const double d = geom::dist(q, pt);
      if (d <= radius && d < h.d - kSame) h = {d, 0, static_cast<std::ptrdiff_t>(k), t};
    }
    if (h.d <= radius) hits[s] = h;
  });

  std::vector<Node> nodes = dst.nodes();
  NodeId next = dst.empty() ? 0 : dst.max_id() + 1;
  std::map<std::size_t, std::vector<std::pair<double, std::size_t>>> splits;  // edge -> (t, src)
  Snapped out;
  out.at.resize(src.node_count());
  std::vector<std::optional<NodeId>> snapped_id(src.node_count());
  for (std::size_t s = 0; s < hits.size(); ++s) {
    const Hit& h = hits[s];
    if (h.d == kInf) continue;
    if (h.edge < 0) {
      snapped_id[s] = dst.nodes()[h.node].id;
      continue;
    }
    const EdgeKey& e = dst.edges()[static_cast<std::size_t>(h.edge)];
    const double len = geom::dist(dst.position(e.a), dst.position(e.b));
    if (h.t * len <= kSame) {
      snapped_id[s] = e.a;
    } else if ((1.0 - h.t) * len <= kSame) {
      snapped_id[s] = e.b;
    } else {
      splits[static_cast<std::size_t>(h.edge)].push_back({h.t, s});
    }
  }

  std::vector<EdgeKey> edges;
  for (std::size_t k = 0; k < dst.edge_count(); ++k) {
    const EdgeKey& e = dst.edges()[k];
    const auto it = splits.find(k);
    if (it == splits.end()) {
      edges.push_back(e);
      continue;
    }
    auto& cuts = it->second;
    std::sort(cuts.begin(), cuts.end());
    const Point a = dst.position(e.a), b = dst.position(e.b);
    NodeId prev = e.a;
    double prev_t = -1.0;
    for (const auto& [t, s] : cuts) {
      if (t != prev_t) {
        const Point at = geom::lerp(a, b, t);
        nodes.push_back({next, at.x, at.y});
        edges.push_back(EdgeKey::make(prev, next));
        prev = next++;
        prev_t = t;
      }
      snapped_id[s] = prev;
    }
    edges.push_back(EdgeKey::make(prev, e.b));
  }
  out.target = RoadGraph(std::move(nodes), std::move(edges));
  for (std::size_t s = 0; s < snapped_id.size(); ++s) {
    if (snapped_id[s]) out.at[s] = out.target.index_of(*snapped_id[s]);
  }
  return out;
}

struct Directional {
  double mean_cost = 0.0;
  std::size_t pairs = 0;
  std::size_t unsnapped = 0;
};

// Mean path-length discrepancy for control-node pairs of `src` that are
// connected in `src`.
Directional directional(const RoadGraph& src_raw, const RoadGraph& dst_raw, const AplsParams& p) {
  const RoadGraph src = inject_control_nodes(src_raw, p.control_interval);
  const RoadGraph dst = inject_control_nodes(dst_raw, p.control_interval);
  const Snapped snap = snap_into(src, dst, p.snap_radius);
  const WeightedAdj src_adj = weighted(src);
  const WeightedAdj dst_adj = weighted(snap.target);
  const std::size_t n = src.node_count();

  std::vector<double> row_cost(n, 0.0);
  std::vector<std::size_t> row_pairs(n, 0);
  parallel_for(n, [&](std::size_t a) {
    const auto ds = dijkstra(src_adj, a);
    std::vector<double> dt;
    if (snap.at[a]) dt = dijkstra(dst_adj, *snap.at[a]);
    for (std::size_t b = a + 1; b < n; ++b) {
      const double L = ds[b];
      if (!(L < kInf) || L <= 0.0) continue;
      ++row_pairs[a];
      if (!snap.at[a] || !snap.at[b]) {
        row_cost[a] += 1.0;
        continue;
      }
      const double Lt = dt[*snap.at[b]];
      row_cost[a] += Lt < kInf ? std::min(1.0, std::fabs(L - Lt) / L) : 1.0;
    }
  });

  Directional out;
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    total += row_cost[a];
    out.pairs += row_pairs[a];
    if (!snap.at[a]) ++out.unsnapped;
  }
  out.mean_cost = out.pairs ? total / static_cast<double>(out.pairs) : 0.0;
  return out;
}

}  // namespace

AplsResult apls(const RoadGraph& gt, const RoadGraph& prop, const AplsParams& p) {
  p.validate();
  AplsResult res;
  if (gt.empty() && prop.empty()) {
    res.score = 1.0;
    return res;
  }
  if (gt.empty() || prop.empty()) return res;
  const Directional fwd = directional(gt, prop, p);
  const Directional bwd = directional(prop, gt, p);
  res.gt_to_prop = fwd.mean_cost;
  res.prop_to_gt = bwd.mean_cost;
  res.gt_pairs = fwd.pairs;
  res.prop_pairs = bwd.pairs;
  res.gt_unsnapped = fwd.unsnapped;
  res.prop_unsnapped = bwd.unsnapped;
  res.score = std::clamp(1.0 - 0.5 * (fwd.mean_cost + bwd.mean_cost), 0.0, 1.0);
  return res;
}

}  // namespace roadgraph
