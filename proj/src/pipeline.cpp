#include "roadgraph/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"
#include "roadgraph/graphs.hpp"
#include "roadgraph/parallel.hpp"
#include "roadgraph/spatial_hash.hpp"

namespace roadgraph {

// ---------------------------------------------------------------------------
// Tiling

std::vector<std::pair<int, int>> WindowLayout::offsets() const {
  std::vector<std::pair<int, int>> out;
  for (int y : ys) {
    for (int x : xs) out.emplace_back(x, y);
  }
  return out;
}

int WindowLayout::min_overlap() const {
  int best = window;
  for (const auto* axis : {&xs, &ys}) {
    for (std::size_t k = 1; k < axis->size(); ++k) best = std::min(best, (*axis)[k - 1] + window - (*axis)[k]);
  }
  return best;
}

namespace {

// Empty when the axis cannot be tiled with n windows.
std::vector<int> axis_offsets(int dim, int window, int n, double d_nei) {
  if (dim == window) return {0};
  if (n < 2) return {};
  std::vector<int> out;
  for (int k = 0; k < n; ++k) {
    const int o = static_cast<int>(std::lround(static_cast<double>(k) * (dim - window) / (n - 1)));
    if (out.empty() || out.back() != o) out.push_back(o);
  }
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (!(out[k - 1] + window - out[k] > d_nei)) return {};
  }
  return out;
}

}  // namespace

WindowLayout plan_windows(int h, int w, int window, int grid_n, double d_nei) {
  if (window <= 0) throw LayoutError("window size must be positive");
  if (grid_n < 1) throw LayoutError("grid count must be >= 1");
  if (window > std::min(h, w)) {
    throw LayoutError("window " + std::to_string(window) + " exceeds canvas " + std::to_string(h) + "x" +
                      std::to_string(w));
  }
  WindowLayout out;
  out.window = window;
  out.grid_n = grid_n;
  out.xs = axis_offsets(w, window, grid_n, d_nei);
  out.ys = axis_offsets(h, window, grid_n, d_nei);
  if (!out.xs.empty() && !out.ys.empty()) {
    if (out.xs.size() == 1 && out.ys.size() == 1) out.grid_n = 1;
    return out;
  }
  const int limit = std::max(h, w);
  for (int n = 1; n <= limit; ++n) {
    if (!axis_offsets(w, window, n, d_nei).empty() && !axis_offsets(h, window, n, d_nei).empty()) {
      throw LayoutError("grid " + std::to_string(grid_n) + " of " + std::to_string(window) +
                        " px windows leaves overlap <= d_nei on a " + std::to_string(h) + "x" + std::to_string(w) +
                        " canvas; smallest feasible grid is " + std::to_string(n));
    }
  }
  throw LayoutError("no grid of " + std::to_string(window) + " px windows overlaps by more than d_nei");
}

std::map<EdgeKey, double> fuse_predictions(const std::vector<std::pair<EdgeKey, double>>& per_window) {
  std::map<EdgeKey, std::pair<double, int>> acc;
  for (const auto& [k, p] : per_window) {
    auto& slot = acc[k];
    slot.first += p;
    ++slot.second;
  }
  std::map<EdgeKey, double> out;
  for (const auto& [k, s] : acc) out.emplace_hint(out.end(), k, s.first / s.second);
  return out;
}

// ---------------------------------------------------------------------------
// Scorers

GtAlignment align_gt(const RoadGraph& gt, const std::vector<Node>& vertices, double match_tol) {
  GtAlignment out;
  out.owner.resize(vertices.size());
  SpatialHash node_hash(match_tol > 0.0 ? match_tol : 1.0);
  for (std::size_t i = 0; i < gt.node_count(); ++i) node_hash.insert(gt.nodes()[i].pos(), i);

  struct Split {
    double t;
    std::size_t vertex;
  };
  std::vector<std::vector<Split>> splits(gt.edge_count());
  std::vector<char> owned(gt.node_count(), 0);

  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const Point q = vertices[v].pos();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_node = 0;
    node_hash.for_each_within(q, match_tol, true, [&](std::size_t i, Point at) {
      const double d = geom::dist(q, at);
      if (d < best || (d == best && i < best_node)) {
        best = d;
        best_node = i;
      }
    });
    if (best <= match_tol) {
      out.owner[v] = gt.nodes()[best_node].id;
      owned[best_node] = 1;
      continue;
    }
    std::ptrdiff_t best_edge = -1;
    double best_t = 0.0;
    for (std::size_t k = 0; k < gt.edge_count(); ++k) {
      const Point a = gt.position(gt.edges()[k].a), b = gt.position(gt.edges()[k].b);
      if (q.x < std::min(a.x, b.x) - match_tol || q.x > std::max(a.x, b.x) + match_tol ||
          q.y < std::min(a.y, b.y) - match_tol || q.y > std::max(a.y, b.y) + match_tol) {
        continue;
      }
      const auto [pt, t] = geom::project_onto_segment(q, {a, b});
      const double d = geom::dist(q, pt);
      if (d <= match_tol && d < best) {
        best = d;
        best_edge = static_cast<std::ptrdiff_t>(k);
        best_t = t;
      }
    }
    if (best_edge >= 0) splits[static_cast<std::size_t>(best_edge)].push_back({best_t, v});
  }

  std::vector<Node> nodes = gt.nodes();
  std::vector<EdgeKey> edges;
  std::unordered_set<NodeId> split_ids;
  NodeId next = gt.empty() ? 0 : gt.max_id() + 1;
  for (std::size_t k = 0; k < gt.edge_count(); ++k) {
    const EdgeKey& e = gt.edges()[k];
    auto& cuts = splits[k];
    std::sort(cuts.begin(), cuts.end(), [](const Split& x, const Split& y) {
      return std::tie(x.t, x.vertex) < std::tie(y.t, y.vertex);
    });
    const Point a = gt.position(e.a), b = gt.position(e.b);
    NodeId prev = e.a;
    for (const Split& s : cuts) {
      const Point at = geom::lerp(a, b, s.t);
      nodes.push_back({next, at.x, at.y});
      split_ids.insert(next);
      out.owner[s.vertex] = next;
      edges.push_back(EdgeKey::make(prev, next));
      prev = next++;
    }
    edges.push_back(EdgeKey::make(prev, e.b));
  }
  out.graph = RoadGraph(std::move(nodes), std::move(edges));

  // Owned nodes are those claimed by a vertex; chains through unclaimed GT
  // nodes still count as a direct connection.
  const RoadGraph& ag = out.graph;
  std::vector<char> is_owned(ag.node_count(), 0);
  for (std::size_t i = 0; i < gt.node_count(); ++i) is_owned[ag.index_of(gt.nodes()[i].id)] = owned[i];
  for (NodeId id : split_ids) is_owned[ag.index_of(id)] = 1;

  std::set<EdgeKey> links;
  for (std::size_t s = 0; s < ag.node_count(); ++s) {
    if (!is_owned[s]) continue;
    std::vector<char> seen(ag.node_count(), 0);
    std::queue<std::size_t> q;
    seen[s] = 1;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : ag.neighbors(u)) {
        if (seen[v]) continue;
        seen[v] = 1;
        if (is_owned[v]) {
          links.insert(EdgeKey::make(ag.nodes()[s].id, ag.nodes()[v].id));
        } else {
          q.push(v);
        }
      }
    }
  }
  out.links.assign(links.begin(), links.end());
  return out;
}

namespace {

struct OracleIndex {
  std::vector<std::optional<NodeId>> owner;  // by vertex index
  std::unordered_set<EdgeKey, EdgeKeyHash> links;

  double score(std::size_t a, std::size_t b) const {
    if (!owner[a] || !owner[b] || *owner[a] == *owner[b]) return 0.0;
    return links.count(EdgeKey::make(*owner[a], *owner[b])) ? 1.0 : 0.0;
  }
};

OracleIndex make_oracle(const RoadGraph& gt, const std::vector<Node>& vertices, double tol) {
  GtAlignment al = align_gt(gt, vertices, tol);
  OracleIndex idx;
  idx.owner = std::move(al.owner);
  idx.links.insert(al.links.begin(), al.links.end());
  return idx;
}

std::unordered_map<NodeId, std::size_t> index_by_id(const std::vector<Node>& vs) {
  std::unordered_map<NodeId, std::size_t> m;
  for (std::size_t i = 0; i < vs.size(); ++i) m.emplace(vs[i].id, i);
  return m;
}

double mask_mean(const ProbGrid& road, Point a, Point b, int n) {
  if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const Point s = geom::lerp(a, b, static_cast<double>(k) / (n - 1));
    acc += sample_grid(road, s.x, s.y);
  }
  return acc / n;
}

}  // namespace

std::vector<double> oracle_scorer(const CandidateSet& candidates, const RoadGraph& gt, double match_tol) {
  const OracleIndex idx = make_oracle(gt, candidates.vertices, match_tol);
  const auto by_id = index_by_id(candidates.vertices);
  std::vector<double> out;
  out.reserve(candidates.pairs.size());
  for (const EdgeKey& e : candidates.pairs) out.push_back(idx.score(by_id.at(e.a), by_id.at(e.b)));
  return out;
}

double sample_grid(const ProbGrid& g, double x, double y) {
  if (g.width() == 0 || g.height() == 0) return 0.0;
  const double u = std::clamp(x - 0.5, 0.0, static_cast<double>(g.width() - 1));
  const double v = std::clamp(y - 0.5, 0.0, static_cast<double>(g.height() - 1));
  const int c0 = static_cast<int>(std::floor(u)), r0 = static_cast<int>(std::floor(v));
  const int c1 = std::min(c0 + 1, g.width() - 1), r1 = std::min(r0 + 1, g.height() - 1);
  const double fu = u - c0, fv = v - r0;
  const double top = (1.0 - fu) * g.at(r0, c0) + fu * g.at(r0, c1);
  const double bottom = (1.0 - fu) * g.at(r1, c0) + fu * g.at(r1, c1);
  return (1.0 - fv) * top + fv * bottom;
}

std::vector<double> mask_scorer(const CandidateSet& candidates, const ProbGrid& road, int n_samples) {
  if (n_samples < 2) throw ConfigError("mask scorer needs at least 2 samples per edge");
  const auto by_id = index_by_id(candidates.vertices);
  std::vector<double> out;
  out.reserve(candidates.pairs.size());
  for (const EdgeKey& e : candidates.pairs) {
    out.push_back(mask_mean(road, candidates.vertices[by_id.at(e.a)].pos(),
                            candidates.vertices[by_id.at(e.b)].pos(), n_samples));
  }
  return out;
}

std::string to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::kOracle: return "oracle";
    case ScorerKind::kMask: return "mask";
    case ScorerKind::kTransformer: return "transformer";
  }
  return "?";
}

ScorerKind scorer_kind_from_string(const std::string& s) {
  if (s == "oracle") return ScorerKind::kOracle;
  if (s == "mask") return ScorerKind::kMask;
  if (s == "transformer") return ScorerKind::kTransformer;
  throw ConfigError("unknown scorer '" + s + "'");
}

// ---------------------------------------------------------------------------
// Inference

namespace {

// Scorer state shared by every window.
class WindowScorer {
 public:
  WindowScorer(const EdgeScorer& s, const std::vector<Node>& vertices, const MaskBundle& bundle,
               const FeatureGrid* features)
      : scorer_(s), vertices_(vertices), bundle_(bundle), features_(features) {
    if (const auto* o = std::get_if<OracleScorerConfig>(&s.payload)) {
      oracle_ = make_oracle(o->gt, vertices, o->match_tol);
    } else if (const auto* m = std::get_if<MaskScorerConfig>(&s.payload)) {
      if (m->n_samples < 2) throw ConfigError("mask scorer needs at least 2 samples per edge");
    } else {
      const auto& t = std::get<TransformerScorerConfig>(s.payload);
      if (!features) throw ConfigError("transformer scorer requires a feature grid");
      t.model.validate();
      const std::size_t in = static_cast<std::size_t>(t.spec.n_sampled) * static_cast<std::size_t>(features->depth());
      if (t.model.mlp.input_dim() != in) {
        throw ConfigError("transformer scorer: mlp expects " + std::to_string(t.model.mlp.input_dim()) +
                          " inputs, features give " + std::to_string(in));
      }
    }
  }

  // pairs carry vertex indices as ids.
  std::vector<double> score(const std::vector<EdgeKey>& pairs) const {
    std::vector<double> out(pairs.size());
    switch (scorer_.kind()) {
      case ScorerKind::kOracle:
        for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = oracle_.score(idx(pairs[i].a), idx(pairs[i].b));
        break;
      case ScorerKind::kMask: {
        const int n = std::get<MaskScorerConfig>(scorer_.payload).n_samples;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          out[i] = mask_mean(bundle_.road, vertices_[idx(pairs[i].a)].pos(), vertices_[idx(pairs[i].b)].pos(), n);
        }
        break;
      }
      case ScorerKind::kTransformer: {
        const auto& t = std::get<TransformerScorerConfig>(scorer_.payload);
        const LineGraphView lg = line_graph(std::span<const EdgeKey>(pairs));
        Matrix X(lg.size(), t.model.mlp.output_dim());
        for (std::size_t r = 0; r < lg.size(); ++r) {
          const auto f = edge_feature(*features_, vertices_[idx(lg.line_nodes[r].a)].pos(),
                                      vertices_[idx(lg.line_nodes[r].b)].pos(), t.spec, t.model.mlp);
          std::copy(f.begin(), f.end(), X.data.begin() + static_cast<std::ptrdiff_t>(r * X.cols));
        }
        const auto probs = predict_links(t.model, lg, X, t.attention);
        std::map<EdgeKey, double> by_key;
        for (std::size_t r = 0; r < lg.size(); ++r) by_key.emplace(lg.line_nodes[r], probs[r]);
        for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = by_key.at(pairs[i]);
        break;
      }
    }
    return out;
  }

 private:
  static std::size_t idx(NodeId id) { return static_cast<std::size_t>(id); }

  const EdgeScorer& scorer_;
  const std::vector<Node>& vertices_;
  const MaskBundle& bundle_;
  const FeatureGrid* features_;
  OracleIndex oracle_;
};

bool inside(Point p, int x0, int y0, int window) {
  return p.x >= x0 && p.x < x0 + window && p.y >= y0 && p.y < y0 + window;
}

}  // namespace

ExtractResult extract_network(const MaskBundle& bundle, const FeatureGrid* features, const EdgeScorer& scorer,
                              const ExtractParams& params, StageTimer* timer) {
  bundle.validate();
  params.nms.validate();
  if (!(params.d_nei > 0.0)) throw ConfigError("d_nei must be positive");
  if (!(params.decision_threshold >= 0.0 && params.decision_threshold <= 1.0)) {
    throw ConfigError("decision threshold must lie in [0,1]");
  }
  ExtractResult res;
  const int h = bundle.road.height(), w = bundle.road.width();
  if (h == 0 || w == 0) return res;

  {
    auto t = StageTimer::stage(timer, "nms");
    res.vertices = coupled_nms(bundle, params.nms);
  }
  std::vector<Node> nodes;
  nodes.reserve(res.vertices.size());
  for (std::size_t i = 0; i < res.vertices.size(); ++i) {
    nodes.push_back({static_cast<NodeId>(i), res.vertices[i].x, res.vertices[i].y});
  }

  std::vector<EdgeKey> candidates;
  WindowLayout layout;
  {
    auto t = StageTimer::stage(timer, "candidates");
    candidates = build_euclidean_graph(std::span<const Node>(nodes), params.d_nei).edges();
    layout = plan_windows(h, w, std::min({params.window, h, w}), params.grid_n, params.d_nei);
  }
  res.candidate_count = candidates.size();

  const auto windows = layout.offsets();
  res.window_count = windows.size();
  std::vector<std::vector<std::pair<EdgeKey, double>>> scored(windows.size());
  {
    auto t = StageTimer::stage(timer, "score");
    const WindowScorer ws(scorer, nodes, bundle, features);
    std::vector<char> covered(candidates.size(), 0);
    std::vector<std::vector<std::size_t>> members(windows.size());
    for (std::size_t k = 0; k < windows.size(); ++k) {
      const auto [x0, y0] = windows[k];
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (inside(nodes[static_cast<std::size_t>(candidates[c].a)].pos(), x0, y0, layout.window) &&
            inside(nodes[static_cast<std::size_t>(candidates[c].b)].pos(), x0, y0, layout.window)) {
          members[k].push_back(c);
          covered[c] = 1;
        }
      }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
      throw LayoutError("a candidate edge lies inside no window");
    }
    parallel_for(windows.size(), [&](std::size_t k) {
      std::vector<EdgeKey> pairs;
      pairs.reserve(members[k].size());
      for (std::size_t c : members[k]) pairs.push_back(candidates[c]);
      if (pairs.empty()) return;
      const auto probs = ws.score(pairs);
      scored[k].reserve(pairs.size());
      for (std::size_t i = 0; i < pairs.size(); ++i) scored[k].emplace_back(pairs[i], probs[i]);
    });
  }

  {
    auto t = StageTimer::stage(timer, "fuse");
    std::vector<std::pair<EdgeKey, double>> flat;
    for (const auto& s : scored) flat.insert(flat.end(), s.begin(), s.end());
    res.fused = fuse_predictions(flat);
  }

  {
    auto t = StageTimer::stage(timer, "assemble");
    std::vector<char> keep_node(nodes.size(), 0);
    std::vector<EdgeKey> edges;
    std::vector<double> probs;
    for (const auto& [k, p] : res.fused) {
      if (p < params.decision_threshold) continue;
      edges.push_back(k);
      probs.push_back(p);
      keep_node[static_cast<std::size_t>(k.a)] = keep_node[static_cast<std::size_t>(k.b)] = 1;
    }
    std::vector<Node> out_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (keep_node[i] || res.vertices[i].source != VertexSource::kRoad) out_nodes.push_back(nodes[i]);
    }
    res.graph = RoadGraph(std::move(out_nodes), std::move(edges), std::move(probs));
  }
  return res;
}

}  // namespace roadgraph
