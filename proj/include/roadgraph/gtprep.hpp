#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "roadgraph/types.hpp"

namespace roadgraph {

// All randomized preprocessing draws from std::mt19937_64 seeded with an
// explicit 64-bit seed. Integers in [lo, hi] are drawn as lo + next() % (hi-lo+1)
// so the sequence is identical across standard libraries.
using Rng = std::mt19937_64;

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(rng() % span);
}

struct DensifyParams {
  int d_r = 16;
  std::uint64_t rng_seed = 0;
};

inline constexpr double kKeypointMinAngleDeg = 60.0;
inline constexpr double kKeypointMaxAngleDeg = 120.0;
inline constexpr double kKeypointDiskRadius = 3.0;
inline constexpr double kCenterlineThickness = 3.0;

// Nodes with degree != 2, plus degree-2 nodes whose two outgoing edge
// directions meet at an angle in [60, 120] degrees. Sorted ids.
std::vector<NodeId> detect_keypoints(const RoadGraph& g);

// Binary mask: pixel is 1 iff its center is within thickness/2 of an edge.
ProbGrid rasterize_centerlines(const RoadGraph& g, int h, int w, double thickness = kCenterlineThickness);

// Binary mask: pixel is 1 iff its center is within `radius` of a point, or
// the point falls inside the pixel.
ProbGrid rasterize_disks(std::span<const Point> points, double radius, int h, int w);

// Random node spacing along a polyline of length line_length: gaps drawn
// uniformly from the integers [d_r, 2*d_r - 1], accepted only while the
// remainder keeps at least d_r - 1 of slack.
std::vector<double> interpolate_distances(double line_length, int d_r, Rng& rng);

// Keeps keypoints and replaces the interior of every keypoint-to-keypoint
// path with nodes at interpolate_distances positions. New nodes get ids
// above g.max_id(). Keypoint-free cycles are anchored at their lowest id.
// If `distances` is given, it receives each path's interpolation offsets.
RoadGraph densify(const RoadGraph& g, const DensifyParams& params,
                  std::vector<std::vector<double>>* distances = nullptr);

struct LabeledCandidates {
  CandidateSet candidates;
  // Edges of the input longer than d_nei; these can never become candidates.
  std::vector<EdgeKey> unlabelable;
};

// Candidate pairs within d_nei labeled 1 iff they are direct edges.
LabeledCandidates label_candidates(const RoadGraph& dense_gt, double d_nei);

}  // namespace roadgraph
