#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "roadgraph/error.hpp"
#include "roadgraph/gtlayer.hpp"

using namespace roadgraph;
using nlohmann::json;

namespace {

json load_golden() {
  std::ifstream f(std::string(ROADGRAPH_TEST_DATA) + "/golden_transformer.json");
  REQUIRE(f.good());
  return json::parse(f);
}

oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> n01;
  Matrix m(r, c);
  for (double& x : m.data) x = n01(rng);
  return m;
}

std::vector<std::vector<std::size_t>> adjacency(const LineGraphView& lg) { return lg.line_adj; }

LineGraphView random_line_graph(std::mt19937_64& rng, int n_vertices, int pct) {
  std::vector<EdgeKey> edges;
  for (int u = 0; u < n_vertices; ++u) {
    for (int v = u + 1; v < n_vertices; ++v) {
      if (static_cast<int>(rng() % 100) < pct) edges.push_back({u, v});
    }
  }
  return line_graph(std::span<const EdgeKey>(edges));
}

}  // namespace

TEST_CASE("golden transformer forward pass") {
  const json j = load_golden();
  const ModelWeights model = model_from_json(j["model"]);
  const auto& g = j["grid"];
  const FeatureGrid grid(g["gh"].get<int>(), g["gw"].get<int>(), g["depth"].get<int>(),
                         g["values"].get<std::vector<float>>());
  const auto pos = j["positions"].get<std::vector<std::vector<double>>>();
  std::vector<EdgeKey> edges;
  for (const auto& e : j["edges"]) edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>()});
  const LineGraphView lg = line_graph(std::span<const EdgeKey>(edges));
  REQUIRE(lg.line_nodes == edges);

  const SampleSpec spec{j["n_sampled"].get<int>(), 16.0};
  const auto want_in = j["mlp_input"].get<std::vector<double>>();
  const Point p0{pos[edges[0].a][0], pos[edges[0].a][1]}, p1{pos[edges[0].b][0], pos[edges[0].b][1]};
  const auto got_in = edge_samples(grid, p0, p1, spec);
  REQUIRE(got_in.size() == want_in.size());
  for (std::size_t k = 0; k < got_in.size(); ++k) CHECK(got_in[k] == doctest::Approx(want_in[k]).epsilon(1e-6));
  const auto want_out = j["mlp_output"].get<std::vector<double>>();
  const auto got_out = mlp_forward(model.mlp, got_in);
  for (std::size_t k = 0; k < got_out.size(); ++k) CHECK(got_out[k] == doctest::Approx(want_out[k]).epsilon(1e-5));

  const auto x0 = j["x0"].get<oracle::Mat>();
  Matrix X0(edges.size(), model.layers.front().d_model());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Point a{pos[edges[i].a][0], pos[edges[i].a][1]}, b{pos[edges[i].b][0], pos[edges[i].b][1]};
    const auto row = edge_feature(grid, a, b, spec, model.mlp);
    for (std::size_t t = 0; t < row.size(); ++t) {
      CHECK(row[t] == doctest::Approx(x0[i][t]).epsilon(1e-5));
      X0(i, t) = row[t];
    }
  }

  const auto alpha = j["alpha_layer0"].get<std::vector<oracle::Mat>>();
  for (std::size_t h = 0; h < alpha.size(); ++h) {
    const AttentionRows rows = attention_coeffs(model.layers.front(), lg, X0, h);
    for (std::size_t i = 0; i < rows.neighbors.size(); ++i) {
      double sum = 0;
      for (std::size_t k = 0; k < rows.neighbors[i].size(); ++k) {
        CHECK(rows.alpha[i][k] == doctest::Approx(alpha[h][i][rows.neighbors[i][k]]).epsilon(1e-5));
        sum += rows.alpha[i][k];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  const auto x1 = j["x1"].get<oracle::Mat>();
  const Matrix X1 = transformer_layer(model.layers.front(), lg, X0);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    for (std::size_t t = 0; t < x1[i].size(); ++t) CHECK(X1(i, t) == doctest::Approx(x1[i][t]).epsilon(1e-5));
  }

  const auto probs = j["probs"].get<std::vector<double>>();
  const auto got = predict_links(model, lg, X0);
  REQUIRE(got.size() == probs.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(probs[i]).epsilon(1e-5));
}

TEST_CASE("layer matches the scalar oracle on random line graphs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const LayerWeights w = random_layer(8, 2, 12, 500 + trial);
    const LineGraphView lg = random_line_graph(rng, 7, 35);
    const Matrix X = random_matrix(rng, lg.size(), 8);
    const bool self = trial % 2 == 0;
    const auto hood = oracle::hoods(adjacency(lg), self);
    if (!self && std::any_of(hood.begin(), hood.end(), [](const auto& h) { return h.empty(); })) continue;
    const Matrix got = transformer_layer(w, lg, X, {self});
    const auto want = oracle::layer(w, to_rows(X), hood);
    for (std::size_t i = 0; i < want.size(); ++i) {
      for (std::size_t t = 0; t < 8; ++t) CHECK(got(i, t) == doctest::Approx(want[i][t]).epsilon(1e-9));
    }
  }
}

TEST_CASE("attention rows are a distribution over the neighborhood") {
  std::mt19937_64 rng(3);
  const LayerWeights w = random_layer(8, 4, 8, 9);
  const LineGraphView lg = random_line_graph(rng, 9, 40);
  const Matrix X = random_matrix(rng, lg.size(), 8);
  for (std::size_t h = 0; h < 4; ++h) {
    const AttentionRows a = attention_coeffs(w, lg, X, h);
    for (std::size_t i = 0; i < lg.size(); ++i) {
      CHECK(std::is_sorted(a.neighbors[i].begin(), a.neighbors[i].end()));
      CHECK(std::binary_search(a.neighbors[i].begin(), a.neighbors[i].end(), i));
      CHECK(a.neighbors[i].size() == lg.line_adj[i].size() + 1);
      const double s = std::accumulate(a.alpha[i].begin(), a.alpha[i].end(), 0.0);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      for (double x : a.alpha[i]) CHECK(x >= 0.0);
    }
  }
}

TEST_CASE("attention special cases") {
  // Two disjoint edges: no line-graph neighbors.
  const std::vector<EdgeKey> apart{{0, 1}, {2, 3}};
  const LineGraphView lg = line_graph(std::span<const EdgeKey>(apart));
  const LayerWeights w = random_layer(4, 1, 4, 1);
  std::mt19937_64 rng(5);
  const Matrix X = random_matrix(rng, 2, 4);
  const AttentionRows a = attention_coeffs(w, lg, X, 0);
  CHECK(a.alpha[0] == std::vector<double>{1.0});
  CHECK(a.alpha[1] == std::vector<double>{1.0});

  // Identical keys: uniform weights.
  const std::vector<EdgeKey> star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  const LineGraphView ls = line_graph(std::span<const EdgeKey>(star));
  LayerWeights z = random_layer(4, 1, 4, 2);
  z.heads[0].wk = Matrix(4, 4);
  const AttentionRows u = attention_coeffs(z, ls, random_matrix(rng, 4, 4), 0);
  for (const auto& row : u.alpha) {
    for (double x : row) CHECK(x == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("zero value weights reduce the layer to norms and feed-forward") {
  std::mt19937_64 rng(12);
  LayerWeights w = random_layer(6, 2, 7, 4);
  for (auto& h : w.heads) h.wv = Matrix(h.wv.rows, h.wv.cols);
  const LineGraphView lg = random_line_graph(rng, 6, 50);
  const Matrix X = random_matrix(rng, lg.size(), 6);
  const Matrix got = transformer_layer(w, lg, X);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    const oracle::Vec h1 = oracle::layer_norm(oracle::Vec(X.row(i).begin(), X.row(i).end()), w.ln1);
    oracle::Vec hid = oracle::mul(w.ff.w1, h1);
    for (std::size_t t = 0; t < hid.size(); ++t) hid[t] = std::max(0.0, hid[t] + w.ff.b1[t]);
    const oracle::Vec f = oracle::mul(w.ff.w2, hid);
    oracle::Vec r(6);
    for (std::size_t t = 0; t < 6; ++t) r[t] = h1[t] + f[t] + w.ff.b2[t];
    const oracle::Vec want = oracle::layer_norm(r, w.ln2);
    for (std::size_t t = 0; t < 6; ++t) CHECK(got(i, t) == doctest::Approx(want[t]).epsilon(1e-12));
  }
}

TEST_CASE("layer is equivariant under relabeling candidates") {
  std::mt19937_64 rng(21);
  const LayerWeights w = random_layer(8, 2, 8, 33);
  std::vector<EdgeKey> edges;
  for (int u = 0; u < 8; ++u) {
    for (int v = u + 1; v < 8; ++v) {
      if (rng() % 3 == 0) edges.push_back({u, v});
    }
  }
  const LineGraphView lg = line_graph(std::span<const EdgeKey>(edges));
  const Matrix X = random_matrix(rng, lg.size(), 8);
  const Matrix Y = transformer_layer(w, lg, X);

  // Relabel the vertices; line nodes get reordered by the new keys.
  std::vector<NodeId> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<EdgeKey> relabeled;
  for (const EdgeKey& e : lg.line_nodes) relabeled.push_back(EdgeKey::make(perm[e.a], perm[e.b]));
  const LineGraphView lp = line_graph(std::span<const EdgeKey>(relabeled));
  Matrix Xp(lp.size(), 8);
  std::vector<std::size_t> where(lg.size());
  for (std::size_t i = 0; i < lg.size(); ++i) {
    where[i] = static_cast<std::size_t>(std::lower_bound(lp.line_nodes.begin(), lp.line_nodes.end(), relabeled[i]) -
                                        lp.line_nodes.begin());
    for (std::size_t t = 0; t < 8; ++t) Xp(where[i], t) = X(i, t);
  }
  const Matrix Yp = transformer_layer(w, lp, Xp);
  for (std::size_t i = 0; i < lg.size(); ++i) {
    for (std::size_t t = 0; t < 8; ++t) CHECK(Yp(where[i], t) == doctest::Approx(Y(i, t)).epsilon(1e-9));
  }
}

TEST_CASE("prediction head") {
  ModelDims d;
  d.feature_depth = 2;
  d.mlp_hidden = 4;
  d.d_model = 4;
  d.heads = 2;
  d.d_ff = 4;
  ModelWeights m = random_model(d, 6);
  std::fill(m.head_w.begin(), m.head_w.end(), 0.0);
  m.head_b = 0.3;
  std::mt19937_64 rng(1);
  const std::vector<EdgeKey> edges{{0, 1}, {1, 2}, {5, 6}};
  const LineGraphView lg = line_graph(std::span<const EdgeKey>(edges));
  for (double p : predict_links(m, lg, random_matrix(rng, 3, 4))) CHECK(p == doctest::Approx(sigmoid(0.3)));
  CHECK(predict_links(m, LineGraphView{}, Matrix(0, 4)).empty());

  const ModelWeights r = random_model(d, 7);
  const Matrix X = random_matrix(rng, 3, 4);
  const auto logits = predict_logits(r, lg, X);
  const auto probs = predict_links(r, lg, X);
  for (std::size_t i = 0; i < 3; ++i) CHECK(probs[i] == doctest::Approx(sigmoid(logits[i])).epsilon(1e-14));
  const auto want = oracle::predict(r, to_rows(X), oracle::hoods(lg.line_adj, true));
  for (std::size_t i = 0; i < 3; ++i) CHECK(probs[i] == doctest::Approx(want[i]).epsilon(1e-9));
}

TEST_CASE("layer norm") {
  const LayerNormParams p{{1, 1, 1, 1}, {0, 0, 0, 0}};
  const auto y = layer_norm(std::vector<double>{1, 2, 3, 4}, p);
  CHECK(std::accumulate(y.begin(), y.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y[3] == doctest::Approx(1.5 / std::sqrt(1.25 + 1e-5)));
  const auto c = layer_norm(std::vector<double>{7, 7, 7, 7}, {{2, 2, 2, 2}, {0.5, 0.5, 0.5, 0.5}});
  for (double v : c) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("loss") {
  auto bundle = [](float v) { return MaskBundle{ProbGrid(4, 5, v), ProbGrid(4, 5, v), ProbGrid(4, 5, v)}; };
  const MaskBundle gt = bundle(1.0f);
  const std::vector<double> pb{1.0, 0.0, 1.0};
  const std::vector<int> yb{1, 0, 1};
  CHECK(total_loss(gt, gt, pb, yb, {}) <= 1e-6);

  const MaskBundle half = bundle(0.5f);
  const std::vector<double> hb{0.5, 0.5, 0.5};
  CHECK(total_loss(half, gt, hb, yb, {0.1, 1e-7}) == doctest::Approx(std::log(2.0) * 1.1).epsilon(1e-9));
  CHECK(total_loss(half, gt, {}, {}, {0.1, 1e-7}) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(total_loss(half, gt, hb, yb, {0.0, 1e-7}) == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 20; ++trial) {
    MaskBundle p = bundle(0.0f), y = bundle(0.0f);
    for (ProbGrid* g : {&p.road, &p.keypoint, &p.overpass}) {
      for (float& v : g->values()) v = u(rng);
    }
    for (ProbGrid* g : {&y.road, &y.keypoint, &y.overpass}) {
      for (float& v : g->values()) v = static_cast<float>(rng() % 2);
    }
    std::vector<double> q(1 + rng() % 10);
    std::vector<int> l(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = u(rng);
      l[i] = static_cast<int>(rng() % 2);
    }
    CHECK(total_loss(p, y, q, l, {0.3, 1e-7}) == doctest::Approx(oracle::loss(p, y, q, l, 0.3, 1e-7)).epsilon(1e-9));
  }

  CHECK(std::isfinite(bce(0.0, 1.0, 1e-7)));
  CHECK_THROWS_AS(total_loss(gt, bundle(0.0f), pb, std::vector<int>{1}, {}), ConfigError);
}

TEST_CASE("model json round trip and validation") {
  ModelDims d;
  d.feature_depth = 3;
  d.mlp_hidden = 5;
  d.d_model = 6;
  d.heads = 3;
  d.d_ff = 7;
  const ModelWeights m = random_model(d, 11);
  const ModelWeights back = model_from_json(model_to_json(m));
  CHECK(model_to_json(back) == model_to_json(m));
  CHECK(back.layers.size() == kTransformerLayers);

  CHECK_THROWS_AS(random_layer(6, 4, 6, 1), ConfigError);  // 6 is not divisible by 4
  LayerWeights bad = random_layer(6, 2, 6, 1);
  bad.heads[1].wq = Matrix(2, 6);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  LayerWeights ln = random_layer(8, 2, 6, 1);
  ln.ln1.scale.pop_back();
  CHECK_THROWS_AS(ln.validate(), ConfigError);

  ModelWeights mh = m;
  mh.head_w.push_back(0.0);
  CHECK_THROWS_AS(mh.validate(), ConfigError);
  CHECK_THROWS_AS(model_from_json(json::parse(R"({"mlp":[]})")), ConfigError);

  const std::vector<EdgeKey> edges{{0, 1}, {1, 2}};
  const LineGraphView lg = line_graph(std::span<const EdgeKey>(edges));
  CHECK_THROWS_AS(transformer_layer(random_layer(6, 3, 7, 2), lg, Matrix(2, 5)), ConfigError);
  CHECK_THROWS_AS(transformer_layer(random_layer(6, 3, 7, 2), lg, Matrix(3, 6)), ConfigError);
}
