#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "roadgraph/error.hpp"
#include "roadgraph/pipeline.hpp"

namespace roadgraph {

std::string to_string(SceneStyle s) {
  switch (s) {
    case SceneStyle::kGrid: return "grid";
    case SceneStyle::kRadial: return "radial";
    case SceneStyle::kOverpass: return "overpass";
  }
  return "?";
}

SceneStyle scene_style_from_string(const std::string& s) {
  if (s == "grid") return SceneStyle::kGrid;
  if (s == "radial") return SceneStyle::kRadial;
  if (s == "overpass") return SceneStyle::kOverpass;
  throw ConfigError("unknown scene style '" + s + "'");
}

namespace {

double center(int px) { return px + 0.5; }

std::vector<int> grid_axis(Rng& rng, int size) {
  std::vector<int> out;
  int x = kGridMargin + static_cast<int>(uniform_int(rng, 0, kGridJitter));
  while (x <= size - kGridMargin - 1) {
    out.push_back(x);
    x += static_cast<int>(uniform_int(rng, kGridMinSpacing, kGridMaxSpacing));
  }
  return out;
}

RoadGraph drop_isolated(std::vector<Node> nodes, std::vector<EdgeKey> edges) {
  std::vector<char> used;
  NodeId hi = 0;
  for (const Node& n : nodes) hi = std::max(hi, n.id);
  used.assign(static_cast<std::size_t>(hi) + 1, 0);
  for (const EdgeKey& e : edges) used[static_cast<std::size_t>(e.a)] = used[static_cast<std::size_t>(e.b)] = 1;
  std::erase_if(nodes, [&](const Node& n) { return !used[static_cast<std::size_t>(n.id)]; });
  return RoadGraph(std::move(nodes), std::move(edges));
}

// Intersections of jittered rows and columns; each segment between
// neighbouring intersections survives unless a percent roll lands under
// kGridDropPercent. Horizontal segments roll first (row-major), then
// vertical ones (row-major by upper end).
void grid_parts(Rng& rng, int size, std::vector<Node>& nodes, std::vector<EdgeKey>& edges) {
  const auto xs = grid_axis(rng, size);
  const auto ys = grid_axis(rng, size);
  const auto nx = static_cast<NodeId>(xs.size());
  auto id = [nx](std::size_t row, std::size_t col) { return static_cast<NodeId>(row) * nx + static_cast<NodeId>(col); };
  for (std::size_t r = 0; r < ys.size(); ++r) {
    for (std::size_t c = 0; c < xs.size(); ++c) nodes.push_back({id(r, c), center(xs[c]), center(ys[r])});
  }
  auto keep = [&rng] { return static_cast<int>(rng() % 100) >= kGridDropPercent; };
  for (std::size_t r = 0; r < ys.size(); ++r) {
    for (std::size_t c = 0; c + 1 < xs.size(); ++c) {
      if (keep()) edges.push_back(EdgeKey::make(id(r, c), id(r, c + 1)));
    }
  }
  for (std::size_t r = 0; r + 1 < ys.size(); ++r) {
    for (std::size_t c = 0; c < xs.size(); ++c) {
      if (keep()) edges.push_back(EdgeKey::make(id(r, c), id(r + 1, c)));
    }
  }
}

RoadGraph radial(Rng& rng, int size) {
  const int spokes = static_cast<int>(uniform_int(rng, 6, 10));
  const double base = static_cast<double>(uniform_int(rng, 0, 359)) * std::numbers::pi / 180.0;
  const double c = size / 2.0;
  const double outer = c - kGridMargin;
  std::vector<Node> nodes{{0, center(size / 2), center(size / 2)}};
  std::vector<EdgeKey> edges;
  for (int k = 0; k < spokes; ++k) {
    const double jitter = static_cast<double>(uniform_int(rng, -8, 8)) * std::numbers::pi / 180.0;
    const double a = base + 2.0 * std::numbers::pi * k / spokes + jitter;
    for (int ring = 1; ring <= 2; ++ring) {
      const double r = outer * ring / 2.0;
      nodes.push_back({static_cast<NodeId>(ring == 1 ? 1 + k : 1 + spokes + k),
                       center(static_cast<int>(std::floor(c + r * std::cos(a)))),
                       center(static_cast<int>(std::floor(c + r * std::sin(a))))});
    }
    edges.push_back(EdgeKey::make(0, 1 + k));
    edges.push_back(EdgeKey::make(1 + k, 1 + spokes + k));
  }
  for (int k = 0; k < spokes; ++k) {
    const int next = (k + 1) % spokes;
    edges.push_back(EdgeKey::make(1 + k, 1 + next));
    edges.push_back(EdgeKey::make(1 + spokes + k, 1 + spokes + next));
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

}  // namespace

RoadGraph synth_graph(std::uint64_t seed, int size, SceneStyle style) {
  if (size < 256) throw ConfigError("synthetic scenes need size >= 256");
  Rng rng(seed);
  if (style == SceneStyle::kRadial) return radial(rng, size);
  std::vector<Node> nodes;
  std::vector<EdgeKey> edges;
  grid_parts(rng, size, nodes, edges);
  if (style == SceneStyle::kOverpass) {
    // A shallow diagonal highway laid over the grid with no junctions.
    NodeId next = 0;
    for (const Node& n : nodes) next = std::max(next, n.id + 1);
    const int y0 = static_cast<int>(uniform_int(rng, size / 4, size / 3));
    const int y1 = static_cast<int>(uniform_int(rng, 2 * size / 3, 3 * size / 4));
    nodes.push_back({next, center(kGridMargin / 2), center(y0)});
    nodes.push_back({next + 1, center(size / 2), center((y0 + y1) / 2 + 3)});
    nodes.push_back({next + 2, center(size - kGridMargin / 2 - 1), center(y1)});
    edges.push_back({next, next + 1});
    edges.push_back({next + 1, next + 2});
  }
  return drop_isolated(std::move(nodes), std::move(edges));
}

ProbGrid gaussian_blur(const ProbGrid& g, double sigma) {
  if (!(sigma > 0.0)) return g;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[static_cast<std::size_t>(i + r)] = std::exp(-i * i / (2.0 * sigma * sigma));
  for (double& v : k) v /= sum;

  const int h = g.height(), w = g.width();
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * g.at(y, std::clamp(x + i, 0, w - 1));
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  std::vector<float> out(tmp.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(std::clamp(acc, 0.0, 1.0));
    }
  }
  return ProbGrid(h, w, std::move(out));
}

ProbGrid add_salt(const ProbGrid& g, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("salt fraction must lie in [0,1]");
  // Integer rolls rather than std::bernoulli_distribution so the pattern is
  // the same under every standard library.
  std::mt19937_64 rng(seed);
  const auto cut = static_cast<std::uint64_t>(std::llround(fraction * 1e6));
  ProbGrid out = g;
  for (float& v : out.values()) {
    if (rng() % 1000000 < cut) v = 1.0f;
  }
  return out;
}

FeatureGrid stack_features(const MaskBundle& b, int stride, int depth) {
  if (stride < 1 || depth < 3) throw ConfigError("feature stride must be >= 1 and depth >= 3");
  const int h = b.road.height(), w = b.road.width();
  const int gh = (h + stride - 1) / stride, gw = (w + stride - 1) / stride;
  std::vector<float> vals(static_cast<std::size_t>(gh) * gw * depth, 0.0f);
  const ProbGrid* chans[] = {&b.road, &b.keypoint, &b.overpass};
  for (int gy = 0; gy < gh; ++gy) {
    for (int gx = 0; gx < gw; ++gx) {
      const int y1 = std::min(h, (gy + 1) * stride), x1 = std::min(w, (gx + 1) * stride);
      const double n = static_cast<double>(y1 - gy * stride) * (x1 - gx * stride);
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int y = gy * stride; y < y1; ++y) {
          for (int x = gx * stride; x < x1; ++x) acc += chans[c]->at(y, x);
        }
        vals[(static_cast<std::size_t>(gy) * gw + gx) * depth + c] = static_cast<float>(acc / n);
      }
    }
  }
  return FeatureGrid(gh, gw, depth, std::move(vals));
}

SynthScene synth_scene(std::uint64_t seed, int size, SceneStyle style) {
  SynthScene s;
  s.gt = synth_graph(seed, size, style);
  PreprocessParams pp;
  pp.seed = seed;
  const PreprocessResult pre = preprocess(s.gt, size, size, pp);
  s.bundle.road = gaussian_blur(pre.masks.road, kSynthBlurSigma);
  s.bundle.keypoint = gaussian_blur(pre.masks.keypoint, kSynthBlurSigma);
  s.bundle.overpass = gaussian_blur(pre.masks.overpass, kSynthBlurSigma);
  s.features = stack_features(s.bundle);
  return s;
}

PreprocessResult preprocess(const RoadGraph& g, int h, int w, const PreprocessParams& p, StageTimer* timer) {
  if (h <= 0 || w <= 0) throw ConfigError("canvas size must be positive");
  PreprocessResult out;
  std::vector<Point> kp;
  {
    auto t = StageTimer::stage(timer, "keypoints");
    for (NodeId id : detect_keypoints(g)) kp.push_back(g.position(id));
  }
  {
    auto t = StageTimer::stage(timer, "rasterize");
    out.masks.road = rasterize_centerlines(g, h, w);
    out.masks.keypoint = rasterize_disks(kp, kKeypointDiskRadius, h, w);
  }
  RoadGraph dense;
  {
    auto t = StageTimer::stage(timer, "densify");
    dense = densify(g, {p.d_r, p.seed}, &out.interpolation);
  }
  {
    auto t = StageTimer::stage(timer, "refine");
    RefineResult r = refine_graph(dense, p.refine);
    std::vector<Point> pts;
    for (NodeId id : r.witnesses) {
      if (std::find(out.overpass_witnesses.begin(), out.overpass_witnesses.end(), id) != out.overpass_witnesses.end()) {
        continue;
      }
      out.overpass_witnesses.push_back(id);
      pts.push_back(r.graph.position(id));
    }
    out.masks.overpass = rasterize_disks(pts, kKeypointDiskRadius, h, w);
    out.dense = std::move(r.graph);
  }
  {
    auto t = StageTimer::stage(timer, "label");
    out.candidates = label_candidates(out.dense, p.d_nei);
  }
  return out;
}

}  // namespace roadgraph
