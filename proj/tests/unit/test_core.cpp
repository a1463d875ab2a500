#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <set>

#include "oracles.hpp"
#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"
#include "roadgraph/io.hpp"
#include "roadgraph/parallel.hpp"
#include "roadgraph/report.hpp"

using namespace roadgraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "roadgraph_test_core";
  fs::create_directories(dir);
  return dir / name;
}

RoadGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> coord(0.0, 1000.0);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({static_cast<NodeId>(3 * i + 1), coord(rng), coord(rng)});
  std::set<EdgeKey> seen;
  std::vector<EdgeKey> edges;
  while (edges.size() < m) {
    const auto a = nodes[rng() % n].id, b = nodes[rng() % n].id;
    if (a == b || !seen.insert(EdgeKey::make(a, b)).second) continue;
    edges.push_back(EdgeKey::make(a, b));
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

}  // namespace

TEST_CASE("graph construction rejects broken input") {
  CHECK_THROWS_AS(RoadGraph({{0, 0, 0}, {0, 1, 1}}, {}), ValidationError);
  CHECK_THROWS_AS(RoadGraph({{0, 0, 0}}, {{0, 1}}), ValidationError);
  CHECK_THROWS_AS(RoadGraph({{0, 0, 0}, {1, 1, 1}}, {{0, 1}, {1, 0}}), ValidationError);
  CHECK_THROWS_AS(RoadGraph({{0, 0, 0}}, {{0, 0}}), ValidationError);
  CHECK_THROWS_AS(RoadGraph({{0, std::nan(""), 0}}, {}), ValidationError);
  CHECK_THROWS_AS(RoadGraph({{0, 0, 0}, {1, 1, 1}}, {{0, 1}}, std::vector<double>{1.5}), ValidationError);
  CHECK_THROWS_AS(RoadGraph({{0, 0, 0}, {1, 1, 1}}, {{0, 1}}, std::vector<double>{}), ValidationError);
}

TEST_CASE("edges are canonicalized and keep input order") {
  const RoadGraph g({{5, 0, 0}, {2, 1, 0}, {9, 2, 0}}, {{9, 2}, {5, 2}});
  REQUIRE(g.edge_count() == 2);
  CHECK(g.edges()[0] == EdgeKey{2, 9});
  CHECK(g.edges()[1] == EdgeKey{2, 5});
  CHECK(g.has_edge(9, 2));
  CHECK_FALSE(g.has_edge(5, 9));
  CHECK(g.degree(g.index_of(2)) == 2);
  CHECK(g.max_id() == 9);
  CHECK_THROWS_AS(g.index_of(4), ValidationError);
}

TEST_CASE("graph json round trip of 1000 nodes") {
  std::mt19937_64 rng(11);
  const RoadGraph g = random_graph(rng, 1000, 1500);
  const fs::path p = scratch("g.json");
  io::write_graph(g, p);
  const RoadGraph back = io::read_graph(p);
  CHECK(back.same_structure(g));

  // Independent comparison of sorted node and edge lists.
  auto nodes_of = [](const RoadGraph& x) {
    std::vector<std::tuple<NodeId, double, double>> v;
    for (const Node& n : x.nodes()) v.emplace_back(n.id, n.x, n.y);
    std::sort(v.begin(), v.end());
    return v;
  };
  auto edges_of = [](const RoadGraph& x) {
    auto v = x.edges();
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(nodes_of(back) == nodes_of(g));
  CHECK(edges_of(back) == edges_of(g));
}

TEST_CASE("graph json errors carry context") {
  const fs::path p = scratch("bad.json");
  io::write_file(p, "{\"nodes\": [{\"id\": 0, \"x\": 1}], \"edges\": []}");
  try {
    io::read_graph(p);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
  io::write_file(p, "{\"nodes\": [");
  CHECK_THROWS_AS(io::read_graph(p), ParseError);
  io::write_file(p, "{\"nodes\": [{\"id\": 0, \"x\": 1, \"y\": 2}], \"edges\": [[0, 3]]}");
  CHECK_THROWS_AS(io::read_graph(p), ValidationError);
  CHECK_THROWS_AS(io::read_graph(scratch("missing.json")), ParseError);
}

TEST_CASE("pgm round trip is byte identical") {
  std::mt19937_64 rng(5);
  std::vector<float> v(64 * 64);
  for (float& x : v) x = static_cast<float>(rng() % 256) / 255.0f;
  const ProbGrid g(64, 64, v);
  const std::string bytes = io::encode_pgm(g);
  const ProbGrid back = io::decode_pgm(bytes);
  CHECK(io::encode_pgm(back) == bytes);
  const fs::path p = scratch("g.pgm");
  io::write_grid(back, p);
  CHECK(io::read_file(p) == bytes);
}

TEST_CASE("pgm rejects malformed files") {
  CHECK_THROWS_AS(io::decode_pgm("P2\n1 1\n255\n0"), FormatError);
  CHECK_THROWS_AS(io::decode_pgm("P5\n2 2\n255\n\x01"), FormatError);
  CHECK_THROWS_AS(io::decode_pgm("P5\n1 1\n65535\n\x01\x01"), FormatError);
}

TEST_CASE("feature map round trip and errors") {
  std::vector<float> v(3 * 4 * 5);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i) * 0.25f - 3.0f;
  const FeatureGrid f(3, 4, 5, v);
  const FeatureGrid back = io::decode_features(io::encode_features(f));
  CHECK(back.gh() == 3);
  CHECK(back.gw() == 4);
  CHECK(back.depth() == 5);
  CHECK(std::equal(back.values().begin(), back.values().end(), v.begin()));
  std::string bytes = io::encode_features(f);
  bytes.pop_back();
  CHECK_THROWS_AS(io::decode_features(bytes), FormatError);
  CHECK_THROWS_AS(io::decode_features("XMAP"), FormatError);
}

TEST_CASE("grids validate values and shapes") {
  CHECK_THROWS_AS(ProbGrid(2, 2, std::vector<float>{0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(ProbGrid(1, 1, std::vector<float>{1.5f}), ValidationError);
  MaskBundle b{ProbGrid(2, 2), ProbGrid(2, 2), ProbGrid(2, 3)};
  CHECK_THROWS_AS(b.validate(), ValidationError);
}

TEST_CASE("candidate set validation") {
  CandidateSet c;
  c.vertices = {{0, 0, 0}, {1, 10, 0}, {2, 100, 0}};
  c.pairs = {{0, 1}};
  CHECK_NOTHROW(c.validate(64));
  c.pairs.push_back({0, 2});
  CHECK_THROWS_AS(c.validate(64), ValidationError);
  c.pairs.pop_back();
  c.labels = std::vector<int>{1, 0};
  CHECK_THROWS_AS(c.validate(64), ValidationError);
}

TEST_CASE("segment intersection agrees with exact integer oracle") {
  std::mt19937_64 rng(3);
  int agree = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    auto r = [&] { return static_cast<std::int64_t>(rng() % 13); };
    oracle::IPoint a{r(), r()}, b{r(), r()}, c{r(), r()}, d{r(), r()};
    if ((a.x == b.x && a.y == b.y) || (c.x == d.x && c.y == d.y)) continue;
    // Share a point, but not only a common endpoint.
    bool expect = oracle::segments_touch(a, b, c, d);
    auto same = [](oracle::IPoint p, oracle::IPoint q) { return p.x == q.x && p.y == q.y; };
    const bool shared = same(a, c) || same(a, d) || same(b, c) || same(b, d);
    if (expect && shared) {
      const bool collinear = oracle::orient(a, b, c) == 0 && oracle::orient(a, b, d) == 0;
      // Collinear segments sharing an endpoint overlap beyond it iff the
      // other endpoints lie on the same side of the shared one.
      bool overlap = false;
      if (collinear) {
        const oracle::IPoint s = same(a, c) || same(a, d) ? a : b;
        const oracle::IPoint u = same(s, a) ? b : a;
        const oracle::IPoint v = same(s, c) ? d : c;
        overlap = (u.x - s.x) * (v.x - s.x) + (u.y - s.y) * (v.y - s.y) > 0;
      }
      expect = overlap;
    }
    const geom::Segment s1{{double(a.x), double(a.y)}, {double(b.x), double(b.y)}};
    const geom::Segment s2{{double(c.x), double(c.y)}, {double(d.x), double(d.y)}};
    CHECK(geom::segments_intersect(s1, s2) == expect);
    agree += geom::segments_intersect(s1, s2) == expect;
    if (expect) CHECK(geom::intersection_point(s1, s2).has_value());
  }
  CHECK(agree > 15000);
}

TEST_CASE("point to segment distance and projection") {
  const geom::Segment s{{0, 0}, {10, 0}};
  CHECK(geom::point_segment_distance({5, 3}, s) == doctest::Approx(3.0));
  CHECK(geom::point_segment_distance({-4, 3}, s) == doctest::Approx(5.0));
  const auto [p, t] = geom::project_onto_segment({7, -2}, s);
  CHECK(p.x == doctest::Approx(7.0));
  CHECK(t == doctest::Approx(0.7));
  CHECK(geom::orientation({0, 0}, {1, 0}, {2, 1e-12}) == 0);
  CHECK(geom::orientation({0, 0}, {1, 0}, {2, 1}) == 1);
}

TEST_CASE("plus sign intersection point") {
  const auto p = geom::intersection_point({{0, 0}, {10, 0}}, {{5, -5}, {5, 5}});
  REQUIRE(p.has_value());
  CHECK(p->x == doctest::Approx(5.0));
  CHECK(p->y == doctest::Approx(0.0));
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  set_thread_limit(4);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(100, [](std::size_t i) {
                    if (i == 37) throw ConfigError("boom");
                  }),
                  ConfigError);
  set_thread_limit(0);
  CHECK(thread_limit() >= 1);
}

TEST_CASE("timing report sums repeated stages in order") {
  StageTimer t;
  { auto s = StageTimer::stage(&t, "a"); }
  t.record("b", 2.0);
  t.record("a", 1.0);
  t.record("c", -1.0);
  const auto j = timing_report(t.timings());
  REQUIRE(j.size() == 3);
  CHECK(j.begin().key() == "a");
  CHECK(j["a"].get<double>() >= 1.0);
  CHECK(j["b"].get<double>() == 2.0);
  CHECK(j["c"].get<double>() == 0.0);
  { auto s = StageTimer::stage(nullptr, "ignored"); }

  RunReport r;
  r.command = "x";
  r.timings = t.timings();
  CHECK_FALSE(r.to_json().contains("scores"));
  r.scores = {{"apls", 1.0}};
  CHECK(r.to_json()["scores"]["apls"].get<double>() == 1.0);
}
