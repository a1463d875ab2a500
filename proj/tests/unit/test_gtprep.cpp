#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"
#include "roadgraph/gtprep.hpp"

using namespace roadgraph;

namespace {

int count_set(const ProbGrid& g) {
  int n = 0;
  for (float v : g.values()) n += v > 0.5f;
  return n;
}

// Shortest path lengths in hops between keypoints, by BFS.
std::set<std::pair<NodeId, NodeId>> keypoint_reachability(const RoadGraph& g) {
  const auto kp = detect_keypoints(g);
  const std::set<NodeId> kps(kp.begin(), kp.end());
  std::set<std::pair<NodeId, NodeId>> out;
  for (NodeId s : kp) {
    std::vector<char> seen(g.node_count(), 0);
    std::vector<std::size_t> stack{g.index_of(s)};
    seen[stack.back()] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      if (kps.count(g.nodes()[i].id)) out.insert({s, g.nodes()[i].id});
      for (std::size_t j : g.neighbors(i)) {
        if (!seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("keypoints by degree and turning angle") {
  // 0-1-2 straight, 2-3 right angle, 3-4 and 3-5 make 3 a junction.
  const RoadGraph g({{0, 0, 0}, {1, 10, 0}, {2, 20, 0}, {3, 20, 10}, {4, 30, 10}, {5, 20, 30}, {6, 25, 40}},
                    {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {3, 5}, {5, 6}});
  const auto kp = detect_keypoints(g);
  // 0 and 4 and 6 are ends, 2 is a right angle, 3 is a junction, 1 is
  // straight, 5 turns by about 153 degrees.
  CHECK(kp == std::vector<NodeId>{0, 2, 3, 4, 6});
}

TEST_CASE("keypoint angle bounds are inclusive") {
  auto corner = [](double deg) {
    const double r = deg * std::numbers::pi / 180.0;
    return RoadGraph({{0, 10, 0}, {1, 0, 0}, {2, 10 * std::cos(r), 10 * std::sin(r)}}, {{0, 1}, {1, 2}});
  };
  CHECK(detect_keypoints(corner(60)).size() == 3);
  CHECK(detect_keypoints(corner(120)).size() == 3);
  CHECK(detect_keypoints(corner(59)).size() == 2);
  CHECK(detect_keypoints(corner(121)).size() == 2);
  CHECK(detect_keypoints(RoadGraph()).empty());
}

TEST_CASE("centerline raster matches per-pixel distance oracle") {
  const RoadGraph g({{0, 10, 10}, {1, 20, 10}}, {{0, 1}});
  const ProbGrid m = rasterize_centerlines(g, 32, 32, 3.0);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 32; ++c) {
      const double px = c + 0.5, py = r + 0.5;
      const double dx = px < 10 ? 10 - px : (px > 20 ? px - 20 : 0.0);
      const double d = std::hypot(dx, py - 10);
      CHECK((m.at(r, c) == 1.0f) == (d <= 1.5));
    }
  }
  CHECK(count_set(rasterize_centerlines(RoadGraph(), 8, 8)) == 0);
}

TEST_CASE("diagonal centerline is symmetric under half turn") {
  const int n = 64;
  const RoadGraph g({{0, 0, 0}, {1, n, n}}, {{0, 1}});
  const ProbGrid m = rasterize_centerlines(g, n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) CHECK(m.at(r, c) == m.at(n - 1 - r, n - 1 - c));
  }
}

TEST_CASE("disk of radius 3 covers 29 pixels") {
  const Point p{20.5, 20.5};
  const ProbGrid m = rasterize_disks(std::span<const Point>(&p, 1), 3.0, 40, 40);
  int brute = 0;
  for (int dy = -5; dy <= 5; ++dy) {
    for (int dx = -5; dx <= 5; ++dx) brute += dx * dx + dy * dy <= 9;
  }
  CHECK(brute == 29);
  CHECK(count_set(m) == 29);
}

TEST_CASE("disks clip and zero radius marks containing pixel") {
  const std::vector<Point> pts{{3.2, 7.9}, {-50, -50}, {39.99, 0.01}};
  const ProbGrid m = rasterize_disks(pts, 0.0, 40, 40);
  CHECK(count_set(m) == 2);
  CHECK(m.at(7, 3) == 1.0f);
  CHECK(m.at(0, 39) == 1.0f);
  CHECK(count_set(rasterize_disks(std::vector<Point>{}, 3.0, 10, 10)) == 0);
  const std::vector<Point> far{{-100, 5}};
  CHECK(count_set(rasterize_disks(far, 3.0, 10, 10)) == 0);
}

TEST_CASE("interpolation replays the sampling loop") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    for (double L : {0.0, 20.0, 30.0, 31.0, 47.0, 100.0, 333.3}) {
      Rng a(seed);
      std::mt19937_64 b(seed);
      const auto got = interpolate_distances(L, 16, a);
      const auto want = oracle::interpolate(L, 16, b);
      REQUIRE(got == want);
      double prev = 0.0;
      for (double d : got) {
        CHECK(d - prev >= 16.0);
        CHECK(d - prev <= 31.0);
        prev = d;
      }
      if (L >= 31.0) CHECK(prev + 31.0 >= L);
    }
  }
  Rng r(1);
  CHECK(interpolate_distances(30.0, 16, r).empty());
}

TEST_CASE("densify straight path replays interpolation") {
  const RoadGraph g({{0, 10, 10}, {1, 110, 10}, {2, 210, 10}}, {{0, 1}, {1, 2}});
  const std::uint64_t seed = 99;
  std::vector<std::vector<double>> trace;
  const RoadGraph d = densify(g, {16, seed}, &trace);
  std::mt19937_64 rng(seed);
  const auto want = oracle::interpolate(200.0, 16, rng);
  REQUIRE(trace.size() == 1);
  CHECK(trace[0] == want);
  CHECK(d.node_count() == want.size() + 2);
  CHECK_FALSE(d.contains(1));
  // Walk from 0 to 2 and compare positions.
  std::vector<double> xs;
  std::size_t prev = d.index_of(0), cur = d.neighbors(prev)[0];
  while (d.nodes()[cur].id != 2) {
    xs.push_back(d.nodes()[cur].x - 10.0);
    const auto& nb = d.neighbors(cur);
    const std::size_t next = nb[0] == prev ? nb[1] : nb[0];
    prev = cur;
    cur = next;
  }
  REQUIRE(xs.size() == want.size());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(xs[i] == doctest::Approx(want[i]));
}

TEST_CASE("densify keeps short keypoint graphs and keypoint reachability") {
  const RoadGraph small({{0, 0, 0}, {1, 10, 0}, {2, 10, 10}}, {{0, 1}, {1, 2}});
  CHECK(densify(small, {16, 3}).same_structure(small));

  // A junction with three long arms and a bent arm.
  const RoadGraph g({{0, 100, 100}, {1, 300, 100}, {2, 100, 300}, {3, 0, 100}, {4, -50, 150}, {5, 200, 100}},
                    {{0, 5}, {5, 1}, {0, 2}, {0, 3}, {3, 4}});
  const auto kp = detect_keypoints(g);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const RoadGraph d = densify(g, {16, seed});
    const auto kp2 = detect_keypoints(d);
    for (NodeId k : kp) CHECK(std::binary_search(kp2.begin(), kp2.end(), k));
    CHECK(keypoint_reachability(d) == keypoint_reachability(g));
    // Re-densifying with another seed keeps the keypoint set.
    const RoadGraph again = densify(d, {16, seed + 100});
    CHECK(detect_keypoints(again) == kp2);
  }
}

TEST_CASE("densify anchors keypoint-free cycles") {
  // Octagon: every turn is 135 degrees, so no keypoints.
  std::vector<Node> nodes;
  std::vector<EdgeKey> edges;
  for (int i = 0; i < 8; ++i) {
    const double a = i * std::numbers::pi / 4;
    nodes.push_back({i + 10, 200 + 100 * std::cos(a), 200 + 100 * std::sin(a)});
    edges.push_back(EdgeKey::make(i + 10, (i + 1) % 8 + 10));
  }
  const RoadGraph g(nodes, edges);
  REQUIRE(detect_keypoints(g).empty());
  const RoadGraph d = densify(g, {16, 4});
  CHECK(d.contains(10));
  CHECK(d.node_count() > 8);
  for (std::size_t i = 0; i < d.node_count(); ++i) CHECK(d.degree(i) == 2);
}

TEST_CASE("candidate labels") {
  const RoadGraph chain({{0, 0, 0}, {1, 20, 0}, {2, 40, 0}}, {{0, 1}, {1, 2}});
  const auto lc = label_candidates(chain, 64);
  std::map<EdgeKey, int> lab;
  for (std::size_t i = 0; i < lc.candidates.pairs.size(); ++i) lab[lc.candidates.pairs[i]] = (*lc.candidates.labels)[i];
  CHECK(lab.size() == 3);
  CHECK(lab[{0, 1}] == 1);
  CHECK(lab[{1, 2}] == 1);
  CHECK(lab[{0, 2}] == 0);

  CHECK(label_candidates(RoadGraph({{0, 0, 0}}, {}), 64).candidates.pairs.empty());
  const RoadGraph far({{0, 0, 0}, {1, 65, 0}}, {{0, 1}});
  const auto lf = label_candidates(far, 64);
  CHECK(lf.candidates.pairs.empty());
  CHECK(lf.unlabelable == std::vector<EdgeKey>{{0, 1}});
}

TEST_CASE("labels are positive exactly on short graph edges") {
  std::mt19937_64 rng(8);
  std::vector<Node> nodes;
  for (int i = 0; i < 120; ++i) nodes.push_back({i, double(rng() % 400), double(rng() % 400) + 0.25 * i});
  std::vector<EdgeKey> edges;
  for (int i = 0; i + 1 < 120; i += 2) edges.push_back({i, i + 1});
  const RoadGraph g(nodes, edges);
  const auto lc = label_candidates(g, 64);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < lc.candidates.pairs.size(); ++i) {
    const EdgeKey e = lc.candidates.pairs[i];
    CHECK(((*lc.candidates.labels)[i] == 1) == g.has_edge(e.a, e.b));
    positives += (*lc.candidates.labels)[i];
  }
  std::size_t short_edges = 0;
  for (const EdgeKey& e : edges) short_edges += geom::dist(g.position(e.a), g.position(e.b)) <= 64;
  CHECK(positives == short_edges);
  CHECK(positives + lc.unlabelable.size() == edges.size());
}
