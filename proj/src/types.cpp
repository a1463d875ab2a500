#include "roadgraph/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"

namespace roadgraph {

RoadGraph::RoadGraph(std::vector<Node> nodes, std::vector<EdgeKey> edges,
                     std::optional<std::vector<double>> edge_probs)
    : nodes_(std::move(nodes)), edge_probs_(std::move(edge_probs)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
      throw ValidationError("node " + std::to_string(n.id) + " has a non-finite position");
    }
    if (!index_.emplace(n.id, i).second) {
      throw ValidationError("duplicate node id " + std::to_string(n.id));
    }
  }

  adjacency_.resize(nodes_.size());
  edges_.reserve(edges.size());
  std::unordered_set<EdgeKey, EdgeKeyHash> seen;
  seen.reserve(edges.size());
  for (const EdgeKey& raw : edges) {
    if (raw.a == raw.b) {
      throw ValidationError("self-loop on node " + std::to_string(raw.a));
    }
    const EdgeKey e = EdgeKey::make(raw.a, raw.b);
    const auto ia = index_.find(e.a);
    const auto ib = index_.find(e.b);
    if (ia == index_.end() || ib == index_.end()) {
      throw ValidationError("edge [" + std::to_string(raw.a) + "," + std::to_string(raw.b) +
                            "] references a missing node");
    }
    if (!seen.insert(e).second) {
      throw ValidationError("duplicate edge [" + std::to_string(e.a) + "," + std::to_string(e.b) + "]");
    }
    edges_.push_back(e);
    adjacency_[ia->second].push_back(ib->second);
    adjacency_[ib->second].push_back(ia->second);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [this](std::size_t l, std::size_t r) { return nodes_[l].id < nodes_[r].id; });
  }

  if (edge_probs_) {
    if (edge_probs_->size() != edges_.size()) {
      throw ValidationError("edge_probs has " + std::to_string(edge_probs_->size()) + " entries for " +
                            std::to_string(edges_.size()) + " edges");
    }
    for (double p : *edge_probs_) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("edge probability outside [0,1]");
    }
  }
}

std::size_t RoadGraph::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown node id " + std::to_string(id));
  return it->second;
}

bool RoadGraph::has_edge(NodeId u, NodeId v) const {
  const auto iu = index_.find(u);
  const auto iv = index_.find(v);
  if (iu == index_.end() || iv == index_.end()) return false;
  const auto& adj = adjacency_[iu->second];
  return std::find(adj.begin(), adj.end(), iv->second) != adj.end();
}

NodeId RoadGraph::max_id() const {
  NodeId m = -1;
  for (const Node& n : nodes_) m = std::max(m, n.id);
  return m;
}

bool RoadGraph::same_structure(const RoadGraph& other, double tol) const {
  if (node_count() != other.node_count() || edge_count() != other.edge_count()) return false;
  auto by_id = [](const Node& l, const Node& r) { return l.id < r.id; };
  std::vector<Node> a = nodes_, b = other.nodes_;
  std::sort(a.begin(), a.end(), by_id);
  std::sort(b.begin(), b.end(), by_id);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || std::abs(a[i].x - b[i].x) > tol || std::abs(a[i].y - b[i].y) > tol) {
      return false;
    }
  }
  std::vector<EdgeKey> ea = edges_, eb = other.edges_;
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  return ea == eb;
}

ProbGrid::ProbGrid(int height, int width, float fill)
    : ProbGrid(height, width, std::vector<float>(static_cast<std::size_t>(std::max(height, 0)) *
                                                     static_cast<std::size_t>(std::max(width, 0)),
                                                 fill)) {}

ProbGrid::ProbGrid(int height, int width, std::vector<float> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height < 0 || width < 0) throw ValidationError("grid dimensions must be nonnegative");
  if (values_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ValidationError("grid payload length does not match height*width");
  }
  for (float v : values_) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("grid value outside [0,1]");
  }
}

FeatureGrid::FeatureGrid(int gh, int gw, int depth, std::vector<float> values)
    : gh_(gh), gw_(gw), depth_(depth), values_(std::move(values)) {
  if (gh < 0 || gw < 0 || depth < 0) throw ValidationError("feature grid dimensions must be nonnegative");
  if (values_.size() != static_cast<std::size_t>(gh) * gw * depth) {
    throw ValidationError("feature payload length does not match gh*gw*depth");
  }
  for (float v : values_) {
    if (!std::isfinite(v)) throw ValidationError("feature grid contains a non-finite value");
  }
}

void MaskBundle::validate() const {
  if (!road.same_shape(keypoint) || !road.same_shape(overpass)) {
    throw ValidationError("mask bundle grids differ in shape");
  }
}

void CandidateSet::validate(double d_nei) const {
  std::unordered_map<NodeId, Point> pos;
  pos.reserve(vertices.size());
  struct PointHash {
    std::size_t operator()(const Point& p) const noexcept {
      return std::hash<double>{}(p.x) * 31 ^ std::hash<double>{}(p.y);
    }
  };
  std::unordered_set<Point, PointHash> positions;
  for (const Node& v : vertices) {
    if (!pos.emplace(v.id, v.pos()).second) {
      throw ValidationError("duplicate candidate vertex id " + std::to_string(v.id));
    }
    if (!positions.insert(v.pos()).second) {
      throw ValidationError("duplicate candidate vertex position at id " + std::to_string(v.id));
    }
  }
  for (const EdgeKey& e : pairs) {
    const auto a = pos.find(e.a), b = pos.find(e.b);
    if (a == pos.end() || b == pos.end()) throw ValidationError("candidate pair references a missing vertex");
    if (geom::dist(a->second, b->second) > d_nei + 1e-9) {
      throw ValidationError("candidate pair longer than d_nei");
    }
  }
  if (labels && labels->size() != pairs.size()) throw ValidationError("labels misaligned with pairs");
  if (probs) {
    if (probs->size() != pairs.size()) throw ValidationError("probs misaligned with pairs");
    for (double p : *probs) {
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("candidate probability outside [0,1]");
    }
  }
}

}  // namespace roadgraph
