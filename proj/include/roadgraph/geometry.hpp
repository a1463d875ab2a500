#pragma once

#include <cmath>
#include <optional>

#include "roadgraph/types.hpp"

namespace roadgraph {

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

}  // namespace roadgraph

namespace roadgraph::geom {

inline constexpr double kOrientEps = 1e-9;

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double dist(Point a, Point b) { return norm(a - b); }
inline double dist2(Point a, Point b) {
  const Point d = a - b;
  return d.x * d.x + d.y * d.y;
}
inline Point lerp(Point a, Point b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

// Sign of cross(b - a, c - a) with |cross| <= kOrientEps treated as zero.
int orientation(Point a, Point b, Point c);

struct Segment {
  Point p;
  Point q;
};

double point_segment_distance(Point pt, const Segment& s);

// Closest point on s to pt and its parameter in [0,1].
std::pair<Point, double> project_onto_segment(Point pt, const Segment& s);

// True when the closed segments share at least one point, except when the
// only shared point is an endpoint common to both segments.
bool segments_intersect(const Segment& s1, const Segment& s2);

// A representative intersection point for segments that intersect: the
// line-line intersection, or the midpoint of the overlap when collinear.
std::optional<Point> intersection_point(const Segment& s1, const Segment& s2);

}  // namespace roadgraph::geom
