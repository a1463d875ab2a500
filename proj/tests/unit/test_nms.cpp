#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "roadgraph/error.hpp"
#include "roadgraph/geometry.hpp"
#include "roadgraph/nms.hpp"

using namespace roadgraph;

namespace {

ProbGrid random_mask(std::mt19937_64& rng, int h, int w, int density_pct) {
  ProbGrid g(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (static_cast<int>(rng() % 100) < density_pct) g.at(r, c) = static_cast<float>(rng() % 256) / 255.0f;
    }
  }
  return g;
}

std::set<std::pair<int, int>> pixels(const std::vector<NmsVertex>& vs) {
  std::set<std::pair<int, int>> out;
  for (const auto& v : vs) out.insert({static_cast<int>(v.x), static_cast<int>(v.y)});
  return out;
}

}  // namespace

TEST_CASE("extract_peaks examples") {
  CHECK(extract_peaks(ProbGrid(16, 16), 0.5, 8).empty());

  ProbGrid one(16, 16);
  one.at(3, 4) = 0.9f;
  const auto p1 = extract_peaks(one, 0.5, 8);
  REQUIRE(p1.size() == 1);
  CHECK(p1[0].x == 4.5);
  CHECK(p1[0].y == 3.5);

  ProbGrid two(32, 32);
  two.at(10, 10) = 0.9f;
  two.at(10, 14) = 0.8f;
  const auto p2 = extract_peaks(two, 0.5, 8);
  REQUIRE(p2.size() == 1);
  CHECK(p2[0].x == 10.5);
  CHECK_THROWS_AS(extract_peaks(two, 0.5, 0), ConfigError);
}

TEST_CASE("extract_peaks postconditions on random grids") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const ProbGrid g = random_mask(rng, 40, 50, 30);
    const double radius = 3.0 + static_cast<double>(rng() % 8);
    const auto peaks = extract_peaks(g, 0.5, radius);
    for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i - 1].score >= peaks[i].score);
    for (std::size_t i = 0; i < peaks.size(); ++i) {
      for (std::size_t j = i + 1; j < peaks.size(); ++j) {
        CHECK(std::hypot(peaks[i].x - peaks[j].x, peaks[i].y - peaks[j].y) >= radius);
      }
    }
    // Every suppressed above-threshold pixel has a kept neighbour at least as
    // strong within the radius.
    for (int r = 0; r < g.height(); ++r) {
      for (int c = 0; c < g.width(); ++c) {
        if (!(g.at(r, c) > 0.5)) continue;
        bool covered = false;
        for (const auto& p : peaks) {
          covered |= std::hypot(p.x - (c + 0.5), p.y - (r + 0.5)) < radius && p.score >= g.at(r, c);
        }
        CHECK(covered);
      }
    }
    // Brute-force greedy suppression gives the same points.
    auto px = oracle::above(g, 0.5);
    oracle::sort_desc(px);
    const auto want = oracle::greedy(px, radius);
    REQUIRE(want.size() == peaks.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(peaks[i].x == want[i].x + 0.5);
      CHECK(peaks[i].y == want[i].y + 0.5);
    }
  }
}

TEST_CASE("coupled nms examples") {
  MaskBundle b{ProbGrid(40, 40), ProbGrid(40, 40), ProbGrid(40, 40)};
  CHECK(coupled_nms(b, {}).empty());

  b.keypoint.at(20, 20) = 0.9f;
  b.road.at(20, 25) = 0.95f;
  const auto v = coupled_nms(b, {});
  REQUIRE(v.size() == 1);
  CHECK(v[0].x == 20.5);
  CHECK(v[0].source == VertexSource::kKeypoint);
}

TEST_CASE("straight road ridge is spaced by d_r") {
  MaskBundle b{ProbGrid(20, 240), ProbGrid(20, 240), ProbGrid(20, 240)};
  for (int c = 20; c < 220; ++c) b.road.at(10, c) = 0.8f;
  const auto v = coupled_nms(b, {});
  std::vector<double> xs;
  for (const auto& p : v) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(xs[i] - xs[i - 1] >= 16.0);
  CHECK(pixels(v) == oracle::coupled_nms(b, 0.5, 0.5, 8, 16));
  CHECK(v.size() == 13);  // ceil(200 / 16)
}

TEST_CASE("coupled nms equals the line-by-line replay") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    MaskBundle b{random_mask(rng, 48, 48, 25), random_mask(rng, 48, 48, 2), random_mask(rng, 48, 48, 2)};
    NmsParams p;
    p.t_r = 0.3 + 0.4 * static_cast<double>(rng() % 100) / 100.0;
    const auto got = coupled_nms(b, p);
    const auto want = oracle::coupled_nms(b, p.t_k, p.t_r, p.d_k, p.d_r);
    CHECK(pixels(got) == want);
    CHECK(got.size() == want.size());
  }
}

TEST_CASE("coupled nms postconditions") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    MaskBundle b{random_mask(rng, 64, 64, 20), random_mask(rng, 64, 64, 3), random_mask(rng, 64, 64, 3)};
    NmsParams p;
    const auto v = coupled_nms(b, p);
    std::vector<NmsVertex> pri, road;
    for (const auto& x : v) (x.source == VertexSource::kRoad ? road : pri).push_back(x);
    for (const auto& a : road) {
      for (const auto& k : pri) CHECK(geom::dist(a.pos(), k.pos()) >= p.d_r);
      for (const auto& c : road) {
        if (&a != &c) CHECK(geom::dist(a.pos(), c.pos()) >= p.d_r);
      }
    }
    // Keypoint peaks and overpass peaks each survive on their own.
    const auto kp = extract_peaks(b.keypoint, p.t_k, p.d_k);
    const auto ov = extract_peaks(b.overpass, p.t_k, p.d_k);
    const auto have = pixels(v);
    for (const auto& k : kp) CHECK(have.count({static_cast<int>(k.x), static_cast<int>(k.y)}));
    for (const auto& k : ov) CHECK(have.count({static_cast<int>(k.x), static_cast<int>(k.y)}));

    // Raising t_r never adds road vertices: the survivors are a subset.
    NmsParams hi = p;
    hi.t_r = 0.8;
    std::set<std::pair<int, int>> lo_px;
    for (const auto& x : road) lo_px.insert({int(x.x), int(x.y)});
    for (const auto& x : coupled_nms(b, hi)) {
      if (x.source == VertexSource::kRoad) CHECK(lo_px.count({int(x.x), int(x.y)}));
    }
  }
}

TEST_CASE("nms parameter validation") {
  MaskBundle b{ProbGrid(4, 4), ProbGrid(4, 4), ProbGrid(4, 4)};
  NmsParams p;
  p.t_k = 1.0;
  CHECK_THROWS_AS(coupled_nms(b, p), ConfigError);
  p = {};
  p.d_r = -1;
  CHECK_THROWS_AS(coupled_nms(b, p), ConfigError);
  b.road = ProbGrid(4, 5);
  CHECK_THROWS_AS(coupled_nms(b, {}), ValidationError);
}

TEST_CASE("gap bound") {
  const double dr = 16.0;
  const double m = 20.0 / 3.0;
  GapConfig c{dr / 2, dr, dr / m, dr / m, dr / m, dr / m};
  CHECK(gap_bound(c) == doctest::Approx((2 * std::sqrt(3.0) + 1.15) * dr).epsilon(1e-12));
  CHECK(gap_bound(c) / dr == doctest::Approx(4.6141).epsilon(1e-4));
  CHECK(gap_bound(c) > 4 * dr);
  GapConfig z{dr / 2, dr};
  CHECK(gap_bound(z) == doctest::Approx((std::sqrt(15.0) + 1) * dr).epsilon(1e-12));
  GapConfig bad{dr / 2, dr, 30.0, 0, 0, 0};
  CHECK_THROWS_AS(gap_bound(bad), DomainError);
}
