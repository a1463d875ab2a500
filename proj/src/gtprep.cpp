#include "roadgraph/gtprep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"
#include "roadgraph/graphs.hpp"

namespace roadgraph {

namespace {

constexpr double kAngleTolDeg = 1e-9;

bool is_keypoint(const RoadGraph& g, std::size_t i) {
  if (g.degree(i) != 2) return true;
  const Point c = g.nodes()[i].pos();
  const Point a = g.nodes()[g.neighbors(i)[0]].pos() - c;
  const Point b = g.nodes()[g.neighbors(i)[1]].pos() - c;
  const double na = geom::norm(a), nb = geom::norm(b);
  if (na == 0.0 || nb == 0.0) return false;
  const double cosang = std::clamp(geom::dot(a, b) / (na * nb), -1.0, 1.0);
  const double deg = std::acos(cosang) * 180.0 / std::numbers::pi;
  return deg >= kKeypointMinAngleDeg - kAngleTolDeg && deg <= kKeypointMaxAngleDeg + kAngleTolDeg;
}

struct PixelBox {
  int c0, c1, r0, r1;  // inclusive
};

std::optional<PixelBox> clip_box(double xmin, double xmax, double ymin, double ymax, int h, int w) {
  PixelBox b{static_cast<int>(std::max(0.0, std::floor(xmin - 0.5))),
             static_cast<int>(std::min<double>(w - 1, std::ceil(xmax - 0.5))),
             static_cast<int>(std::max(0.0, std::floor(ymin - 0.5))),
             static_cast<int>(std::min<double>(h - 1, std::ceil(ymax - 0.5)))};
  if (xmax < 0.0 || ymax < 0.0 || xmin > w || ymin > h || b.c0 > b.c1 || b.r0 > b.r1) return std::nullopt;
  return b;
}

}  // namespace

std::vector<NodeId> detect_keypoints(const RoadGraph& g) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (is_keypoint(g, i)) out.push_back(g.nodes()[i].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ProbGrid rasterize_centerlines(const RoadGraph& g, int h, int w, double thickness) {
  if (h <= 0 || w <= 0) throw ConfigError("canvas dimensions must be positive");
  if (thickness < 1.0) throw ConfigError("centerline thickness must be >= 1");
  ProbGrid grid(h, w, 0.0f);
  const double r = thickness / 2.0;
  for (const EdgeKey& e : g.edges()) {
    const geom::Segment seg{g.position(e.a), g.position(e.b)};
    const auto box = clip_box(std::min(seg.p.x, seg.q.x) - r, std::max(seg.p.x, seg.q.x) + r,
                              std::min(seg.p.y, seg.q.y) - r, std::max(seg.p.y, seg.q.y) + r, h, w);
    if (!box) continue;
    for (int row = box->r0; row <= box->r1; ++row) {
      for (int col = box->c0; col <= box->c1; ++col) {
        if (geom::point_segment_distance({col + 0.5, row + 0.5}, seg) <= r) grid.at(row, col) = 1.0f;
      }
    }
  }
  return grid;
}

ProbGrid rasterize_disks(std::span<const Point> points, double radius, int h, int w) {
  if (h <= 0 || w <= 0) throw ConfigError("canvas dimensions must be positive");
  if (radius < 0.0) throw ConfigError("disk radius must be nonnegative");
  ProbGrid grid(h, w, 0.0f);
  const double r2 = radius * radius;
  for (const Point& p : points) {
    const double fx = std::floor(p.x), fy = std::floor(p.y);
    if (fx >= 0 && fy >= 0 && fx < w && fy < h) grid.at(static_cast<int>(fy), static_cast<int>(fx)) = 1.0f;
    const auto box = clip_box(p.x - radius, p.x + radius, p.y - radius, p.y + radius, h, w);
    if (!box) continue;
    for (int row = box->r0; row <= box->r1; ++row) {
      for (int col = box->c0; col <= box->c1; ++col) {
        if (geom::dist2({col + 0.5, row + 0.5}, p) <= r2) grid.at(row, col) = 1.0f;
      }
    }
  }
  return grid;
}

std::vector<double> interpolate_distances(double line_length, int d_r, Rng& rng) {
  if (d_r < 2) throw ConfigError("d_r must be >= 2");
  std::vector<double> out;
  double p = 0.0;
  const double L = line_length;
  while (p + 2.0 * d_r - 1.0 < L) {
    const auto u = static_cast<double>(uniform_int(rng, d_r, 2 * d_r - 1));
    if (p + u + d_r - 1.0 < L) {
      p += u;
      out.push_back(p);
    }
  }
  return out;
}

namespace {

// Node indices along a walk from a kept node through non-kept degree-2
// nodes to the next kept node (inclusive at both ends).
std::vector<std::size_t> walk(const RoadGraph& g, const std::vector<char>& kept, std::size_t start,
                              std::size_t first, std::unordered_set<EdgeKey, EdgeKeyHash>& used) {
  std::vector<std::size_t> path{start};
  std::size_t prev = start, cur = first;
  used.insert(EdgeKey::make(g.nodes()[prev].id, g.nodes()[cur].id));
  while (!kept[cur]) {
    path.push_back(cur);
    const auto& nb = g.neighbors(cur);
    const std::size_t next = nb[0] == prev ? nb[1] : nb[0];
    prev = cur;
    cur = next;
    used.insert(EdgeKey::make(g.nodes()[prev].id, g.nodes()[cur].id));
  }
  path.push_back(cur);
  return path;
}

Point point_at(const RoadGraph& g, const std::vector<std::size_t>& path, const std::vector<double>& cum,
               double s) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t k = static_cast<std::size_t>(it - cum.begin());
  k = std::clamp<std::size_t>(k, 1, cum.size() - 1);
  const double seg = cum[k] - cum[k - 1];
  const double t = seg > 0.0 ? (s - cum[k - 1]) / seg : 0.0;
  return geom::lerp(g.nodes()[path[k - 1]].pos(), g.nodes()[path[k]].pos(), t);
}

}  // namespace

RoadGraph densify(const RoadGraph& g, const DensifyParams& params, std::vector<std::vector<double>>* distances) {
  if (params.d_r < 2) throw ConfigError("d_r must be >= 2");
  Rng rng(params.rng_seed);
  const std::size_t n = g.node_count();
  std::vector<char> kept(n, 0);
  for (NodeId id : detect_keypoints(g)) kept[g.index_of(id)] = 1;

  std::unordered_set<EdgeKey, EdgeKeyHash> used;
  std::vector<std::vector<std::size_t>> paths;

  auto order = std::vector<std::size_t>(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return g.nodes()[l].id < g.nodes()[r].id; });

  auto collect_from = [&](std::size_t s) {
    for (std::size_t nb : g.neighbors(s)) {
      if (used.count(EdgeKey::make(g.nodes()[s].id, g.nodes()[nb].id))) continue;
      paths.push_back(walk(g, kept, s, nb, used));
    }
  };
  for (std::size_t i : order) {
    if (kept[i]) collect_from(i);
  }
  // Whatever remains lies on cycles without keypoints.
  for (std::size_t i : order) {
    if (kept[i] || g.degree(i) == 0) continue;
    const NodeId id = g.nodes()[i].id;
    const bool untouched = std::all_of(g.neighbors(i).begin(), g.neighbors(i).end(), [&](std::size_t nb) {
      return used.count(EdgeKey::make(id, g.nodes()[nb].id)) == 0;
    });
    if (!untouched) continue;
    kept[i] = 1;
    collect_from(i);
  }

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    if (kept[i]) nodes.push_back(g.nodes()[i]);
  }
  std::vector<EdgeKey> edges;
  std::unordered_set<EdgeKey, EdgeKeyHash> have;
  auto add_edge = [&](NodeId a, NodeId b) {
    if (a == b) return;
    const EdgeKey e = EdgeKey::make(a, b);
    if (have.insert(e).second) edges.push_back(e);
  };

  NodeId next_id = g.max_id() + 1;
  for (const auto& path : paths) {
    std::vector<double> cum{0.0};
    for (std::size_t k = 1; k < path.size(); ++k) {
      cum.push_back(cum.back() + geom::dist(g.nodes()[path[k - 1]].pos(), g.nodes()[path[k]].pos()));
    }
    const std::vector<double> ds = interpolate_distances(cum.back(), params.d_r, rng);
    if (distances) distances->push_back(ds);
    NodeId prev = g.nodes()[path.front()].id;
    for (double s : ds) {
      const Point p = point_at(g, path, cum, s);
      nodes.push_back(Node{next_id, p.x, p.y});
      add_edge(prev, next_id);
      prev = next_id++;
    }
    add_edge(prev, g.nodes()[path.back()].id);
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

LabeledCandidates label_candidates(const RoadGraph& dense_gt, double d_nei) {
  LabeledCandidates out;
  const RoadGraph cand = build_euclidean_graph(std::span<const Node>(dense_gt.nodes()), d_nei);
  out.candidates.vertices = dense_gt.nodes();
  out.candidates.pairs = cand.edges();
  std::vector<int> labels;
  labels.reserve(cand.edge_count());
  for (const EdgeKey& e : cand.edges()) labels.push_back(dense_gt.has_edge(e.a, e.b) ? 1 : 0);
  out.candidates.labels = std::move(labels);
  for (const EdgeKey& e : dense_gt.edges()) {
    if (geom::dist(dense_gt.position(e.a), dense_gt.position(e.b)) > d_nei) out.unlabelable.push_back(e);
  }
  return out;
}

}  // namespace roadgraph
