#include "roadgraph/geometry.hpp"

#include <algorithm>
#include <array>

namespace roadgraph::geom {

int orientation(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  if (v > kOrientEps) return 1;
  if (v < -kOrientEps) return -1;
  return 0;
}

std::pair<Point, double> project_onto_segment(Point pt, const Segment& s) {
  const Point d = s.q - s.p;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return {s.p, 0.0};
  const double t = std::clamp(dot(pt - s.p, d) / len2, 0.0, 1.0);
  return {lerp(s.p, s.q, t), t};
}

double point_segment_distance(Point pt, const Segment& s) {
  return dist(pt, project_onto_segment(pt, s).first);
}

namespace {

// pt is known to be collinear with s; checks it lies within the bounding box.
bool within_box(Point pt, const Segment& s) {
  return pt.x <= std::max(s.p.x, s.q.x) + kOrientEps && pt.x >= std::min(s.p.x, s.q.x) - kOrientEps &&
         pt.y <= std::max(s.p.y, s.q.y) + kOrientEps && pt.y >= std::min(s.p.y, s.q.y) - kOrientEps;
}

bool same_point(Point a, Point b) { return dist2(a, b) <= kOrientEps * kOrientEps; }

bool is_endpoint(Point pt, const Segment& s) { return same_point(pt, s.p) || same_point(pt, s.q); }

struct Overlap {
  bool any = false;
  double lo = 0.0;
  double hi = 0.0;
  Point origin;
  Point axis;
};

// Collinear segments: overlap expressed as a parameter interval along the
// longer segment's direction.
Overlap collinear_overlap(const Segment& s1, const Segment& s2) {
  const Segment& base = dist2(s1.p, s1.q) >= dist2(s2.p, s2.q) ? s1 : s2;
  Overlap o;
  o.origin = base.p;
  const double len = dist(base.p, base.q);
  if (len == 0.0) {
    o.any = same_point(s1.p, s2.p);
    o.axis = {1.0, 0.0};
    return o;
  }
  o.axis = (1.0 / len) * (base.q - base.p);
  auto param = [&](Point pt) { return dot(pt - o.origin, o.axis); };
  const double a0 = param(s1.p), a1 = param(s1.q);
  const double b0 = param(s2.p), b1 = param(s2.q);
  o.lo = std::max(std::min(a0, a1), std::min(b0, b1));
  o.hi = std::min(std::max(a0, a1), std::max(b0, b1));
  o.any = o.lo <= o.hi + kOrientEps;
  return o;
}

}  // namespace

bool segments_intersect(const Segment& s1, const Segment& s2) {
  const int o1 = orientation(s1.p, s1.q, s2.p);
  const int o2 = orientation(s1.p, s1.q, s2.q);
  const int o3 = orientation(s2.p, s2.q, s1.p);
  const int o4 = orientation(s2.p, s2.q, s1.q);

  if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
    const Overlap ov = collinear_overlap(s1, s2);
    if (!ov.any) return false;
    if (ov.hi - ov.lo > kOrientEps) return true;
    const Point touch = ov.origin + ov.lo * ov.axis;
    return !(is_endpoint(touch, s1) && is_endpoint(touch, s2));
  }

  if (o1 * o2 < 0 && o3 * o4 < 0) return true;

  // Touching configurations: at most one shared point.
  const std::array<std::pair<Point, bool>, 4> touches = {{
      {s2.p, o1 == 0 && within_box(s2.p, s1)},
      {s2.q, o2 == 0 && within_box(s2.q, s1)},
      {s1.p, o3 == 0 && within_box(s1.p, s2)},
      {s1.q, o4 == 0 && within_box(s1.q, s2)},
  }};
  for (const auto& [pt, hit] : touches) {
    if (hit && !(is_endpoint(pt, s1) && is_endpoint(pt, s2))) return true;
  }
  return false;
}

std::optional<Point> intersection_point(const Segment& s1, const Segment& s2) {
  if (!segments_intersect(s1, s2)) return std::nullopt;
  const Point d1 = s1.q - s1.p;
  const Point d2 = s2.q - s2.p;
  const double denom = cross(d1, d2);
  if (std::abs(denom) > kOrientEps) {
    const double t = cross(s2.p - s1.p, d2) / denom;
    return lerp(s1.p, s1.q, std::clamp(t, 0.0, 1.0));
  }
  const Overlap ov = collinear_overlap(s1, s2);
  return ov.origin + (0.5 * (ov.lo + ov.hi)) * ov.axis;
}

}  // namespace roadgraph::geom
