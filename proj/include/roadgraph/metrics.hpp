#pragma once

#include <vector>

#include "roadgraph/types.hpp"

namespace roadgraph {

struct TopoParams {
  double seed_interval = 50.0;
  double propagation_dist = 300.0;
  double sample_interval = 5.0;
  double match_radius = 8.0;
  double angle_threshold = 30.0;  // degrees, directions compared mod 180

  void validate() const;
};

struct TopoSeed {
  Point at;
  bool located = false;  // a proposal sample lay within match_radius
  std::size_t gt_samples = 0;
  std::size_t prop_samples = 0;
  std::size_t matched = 0;
};

struct TopoResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<TopoSeed> seeds;
};

TopoResult topo(const RoadGraph& gt, const RoadGraph& prop, const TopoParams& p = {});

struct AplsParams {
  double control_interval = 50.0;
  double snap_radius = 25.0;

  void validate() const;
};

struct AplsResult {
  double score = 0.0;
  double gt_to_prop = 0.0;  // mean path cost, 0 = perfect
  double prop_to_gt = 0.0;
  std::size_t gt_pairs = 0;
  std::size_t prop_pairs = 0;
  std::size_t gt_unsnapped = 0;
  std::size_t prop_unsnapped = 0;
};

AplsResult apls(const RoadGraph& gt, const RoadGraph& prop, const AplsParams& p = {});

// Original nodes plus points every `interval` along each edge. Returned graph
// keeps the original ids and appends new ones above max_id.
RoadGraph inject_control_nodes(const RoadGraph& g, double interval);

}  // namespace roadgraph
