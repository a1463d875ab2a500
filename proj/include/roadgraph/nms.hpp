#pragma once

#include <vector>

#include "roadgraph/types.hpp"

namespace roadgraph {

struct NmsParams {
  double t_k = 0.5;  // keypoint/overpass threshold
  double t_r = 0.5;  // road threshold
  double d_k = 8.0;  // keypoint suppression radius
  double d_r = 16.0; // road suppression radius

  void validate() const;
};

enum class VertexSource { kKeypoint, kOverpass, kRoad };

struct NmsVertex {
  double x = 0.0;  // pixel center
  double y = 0.0;
  double score = 0.0;
  VertexSource source = VertexSource::kRoad;

  Point pos() const { return {x, y}; }
};

// Pixels with value > threshold, greedily kept in descending score order
// (ties by row, then column) unless a kept point lies at distance < radius.
// Coordinates are pixel centers.
std::vector<ScoredPoint> extract_peaks(const ProbGrid& grid, double threshold, double radius);

// Coupled suppression: keypoint and overpass peaks at d_k first, road
// candidates within d_r of any of them dropped, then road peaks at d_r.
// Output order: keypoint peaks, overpass peaks not already present at the
// same pixel, then road peaks; each group in suppression order.
std::vector<NmsVertex> coupled_nms(const MaskBundle& bundle, const NmsParams& p);

std::vector<Point> positions(const std::vector<NmsVertex>& vs);

struct GapConfig {
  double d_k = 8.0;
  double d_r = 16.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double delta4 = 0.0;
};

// Worst-case distance between two road vertices that should be linked when
// suppression is done per mask:
//   sqrt((2 d_r - D2)^2 - (d_k + D1)^2) + sqrt((2 d_r - D3)^2 - (d_k + D1)^2) + d_r + D4
// Throws DomainError when a radicand is negative.
double gap_bound(const GapConfig& c);

}  // namespace roadgraph
