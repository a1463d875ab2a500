#pragma once

#include <vector>

#include "roadgraph/types.hpp"

namespace roadgraph {

// Parameters of the iterative crossing refinement. Defaults are engineering
// choices: a conflict tau deep resolves within tau / step_scale moves.
struct RefineParams {
  double tau = 10.0;         // intersection proximity threshold
  double gamma = 4.0;        // merge gap for stacked degree-2 nodes
  double step_scale = 2.0;   // displacement per move
  int max_iters = 100;       // T
  int merge_period = 10;     // P
  double tolerance = 1e-3;   // minimum accumulated push that triggers a move
  double overlap_radius = 1.0;

  void validate() const;
};

struct Crossing {
  EdgeKey first;
  EdgeKey second;
  Point at;
};

// Edge pairs that intersect and share no endpoint id; each pair once, the
// lower edge (by index in g.edges()) first.
std::vector<Crossing> find_crossings(const RoadGraph& g);

struct RefineResult {
  RoadGraph graph;
  // Endpoint ids of every edge pair still crossing at termination, four per
  // crossing, in crossing order (may repeat ids).
  std::vector<NodeId> witnesses;
  bool converged = false;
  int iterations = 0;
};

RefineResult refine_graph(const RoadGraph& g, const RefineParams& p);

// Deduplicated positions of the witness endpoints of refine_graph.
std::vector<Point> overpass_points(const RoadGraph& g, const RefineParams& p);

}  // namespace roadgraph
