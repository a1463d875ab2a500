#include "roadgraph/nms.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "roadgraph/error.hpp"
#include "roadgraph/spatial_hash.hpp"

namespace roadgraph {

void NmsParams::validate() const {
  if (!(t_k > 0.0 && t_k < 1.0) || !(t_r > 0.0 && t_r < 1.0)) throw ConfigError("nms: thresholds must lie in (0,1)");
  if (!(d_k > 0.0) || !(d_r > 0.0)) throw ConfigError("nms: suppression radii must be positive");
}

namespace {

struct Pixel {
  int col;
  int row;
  float value;
};

std::vector<Pixel> above(const ProbGrid& grid, double threshold) {
  std::vector<Pixel> out;
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const float v = grid.at(r, c);
      if (v > threshold) out.push_back({c, r, v});
    }
  }
  return out;
}

void sort_desc(std::vector<Pixel>& px) {
  std::sort(px.begin(), px.end(), [](const Pixel& a, const Pixel& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
}

Point center(const Pixel& p) { return {p.col + 0.5, p.row + 0.5}; }

// Greedy suppression over an already sorted candidate list.
std::vector<Pixel> suppress(const std::vector<Pixel>& sorted, double radius) {
  SpatialHash kept_hash(radius);
  std::vector<Pixel> kept;
  for (const Pixel& p : sorted) {
    const Point c = center(p);
    if (kept_hash.any_within(c, radius, false)) continue;
    kept_hash.insert(c, kept.size());
    kept.push_back(p);
  }
  return kept;
}

}  // namespace

std::vector<ScoredPoint> extract_peaks(const ProbGrid& grid, double threshold, double radius) {
  if (!(radius > 0.0)) throw ConfigError("extract_peaks: radius must be positive");
  auto px = above(grid, threshold);
  sort_desc(px);
  std::vector<ScoredPoint> out;
  for (const Pixel& p : suppress(px, radius)) out.push_back({p.col + 0.5, p.row + 0.5, p.value});
  return out;
}

std::vector<NmsVertex> coupled_nms(const MaskBundle& bundle, const NmsParams& p) {
  bundle.validate();
  p.validate();

  auto kp = above(bundle.keypoint, p.t_k);
  sort_desc(kp);
  const auto kept_kp = suppress(kp, p.d_k);

  auto ov = above(bundle.overpass, p.t_k);
  sort_desc(ov);
  const auto kept_ov = suppress(ov, p.d_k);

  std::vector<NmsVertex> out;
  std::set<std::pair<int, int>> taken;
  for (const Pixel& q : kept_kp) {
    taken.insert({q.row, q.col});
    out.push_back({q.col + 0.5, q.row + 0.5, q.value, VertexSource::kKeypoint});
  }
  for (const Pixel& q : kept_ov) {
    if (!taken.insert({q.row, q.col}).second) continue;
    out.push_back({q.col + 0.5, q.row + 0.5, q.value, VertexSource::kOverpass});
  }

  SpatialHash priority(p.d_r);
  for (std::size_t i = 0; i < out.size(); ++i) priority.insert(out[i].pos(), i);

  std::vector<Pixel> road;
  for (const Pixel& q : above(bundle.road, p.t_r)) {
    if (!priority.any_within(center(q), p.d_r, false)) road.push_back(q);
  }
  sort_desc(road);
  for (const Pixel& q : suppress(road, p.d_r)) {
    out.push_back({q.col + 0.5, q.row + 0.5, q.value, VertexSource::kRoad});
  }
  return out;
}

std::vector<Point> positions(const std::vector<NmsVertex>& vs) {
  std::vector<Point> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v.pos());
  return out;
}

double gap_bound(const GapConfig& c) {
  const double base = c.d_k + c.delta1;
  const double a = 2.0 * c.d_r - c.delta2;
  const double b = 2.0 * c.d_r - c.delta3;
  const double ra = a * a - base * base;
  const double rb = b * b - base * base;
  if (ra < 0.0 || rb < 0.0) throw DomainError("gap_bound: negative radicand");
  return std::sqrt(ra) + std::sqrt(rb) + (c.d_r + c.delta4);
}

}  // namespace roadgraph
