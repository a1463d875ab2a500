#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace roadgraph {

// Image-space coordinates: origin top-left, x right, y down, 1 unit = 1 px.
// Pixel (col, row) has its center at (col + 0.5, row + 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using NodeId = std::int64_t;

struct Node {
  NodeId id = 0;
  double x = 0.0;
  double y = 0.0;

  Point pos() const { return {x, y}; }
  friend bool operator==(const Node&, const Node&) = default;
};

// Undirected edge stored with first < second.
struct EdgeKey {
  NodeId a = 0;
  NodeId b = 0;

  static EdgeKey make(NodeId u, NodeId v) { return u < v ? EdgeKey{u, v} : EdgeKey{v, u}; }
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& e) const noexcept {
    auto h = static_cast<std::uint64_t>(e.a) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(e.b) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Undirected geometric graph. Validated on construction and immutable after.
//
// Invariants: unique node ids, edge endpoints exist and differ, no duplicate
// edges, finite positions, edge_probs (when present) aligned with edges and
// in [0,1]. Edges are canonicalized to (min id, max id) but keep input order.
class RoadGraph {
 public:
  RoadGraph() = default;
  RoadGraph(std::vector<Node> nodes, std::vector<EdgeKey> edges,
            std::optional<std::vector<double>> edge_probs = std::nullopt);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<EdgeKey>& edges() const { return edges_; }
  const std::optional<std::vector<double>>& edge_probs() const { return edge_probs_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  // Index of a node id in nodes(); throws ValidationError for unknown ids.
  std::size_t index_of(NodeId id) const;
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  const Node& node(NodeId id) const { return nodes_[index_of(id)]; }
  Point position(NodeId id) const { return node(id).pos(); }

  // Neighbor node indices of the node at index i, ascending by neighbor id.
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  bool has_edge(NodeId u, NodeId v) const;

  NodeId max_id() const;

  // Node ids and edges sorted; used for structural equality.
  bool same_structure(const RoadGraph& other, double tol = 0.0) const;

 private:
  std::vector<Node> nodes_;
  std::vector<EdgeKey> edges_;
  std::optional<std::vector<double>> edge_probs_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

// H x W scalar field in [0,1], row-major.
class ProbGrid {
 public:
  ProbGrid() = default;
  ProbGrid(int height, int width, float fill = 0.0f);
  ProbGrid(int height, int width, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }

  float at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  float& at(int row, int col) { return values_[static_cast<std::size_t>(row) * width_ + col]; }
  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  bool same_shape(const ProbGrid& o) const { return height_ == o.height_ && width_ == o.width_; }
  friend bool operator==(const ProbGrid&, const ProbGrid&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> values_;
};

// Dense feature map: gh x gw cells, depth channels, channel-fastest.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(int gh, int gw, int depth, std::vector<float> values);

  int gh() const { return gh_; }
  int gw() const { return gw_; }
  int depth() const { return depth_; }
  std::span<const float> values() const { return values_; }
  std::span<const float> cell(int row, int col) const {
    return std::span<const float>(values_).subspan(
        (static_cast<std::size_t>(row) * gw_ + col) * depth_, depth_);
  }

 private:
  int gh_ = 0;
  int gw_ = 0;
  int depth_ = 0;
  std::vector<float> values_;
};

struct ScoredPoint {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

struct MaskBundle {
  ProbGrid road;
  ProbGrid keypoint;
  ProbGrid overpass;

  // Throws ValidationError if the three grids disagree on shape.
  void validate() const;
};

// Vertices plus candidate pairs (by vertex id) with optional labels and
// predicted probabilities aligned 1:1 with pairs.
struct CandidateSet {
  std::vector<Node> vertices;
  std::vector<EdgeKey> pairs;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<double>> probs;

  // Checks pair distances against d_nei, label/prob alignment and unique
  // vertex positions.
  void validate(double d_nei) const;
};

}  // namespace roadgraph
