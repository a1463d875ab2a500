#include "roadgraph/gtlayer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "roadgraph/error.hpp"

namespace roadgraph {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) require(std::isfinite(x), std::string(what) + ": non-finite value");
}

}  // namespace

void LayerWeights::validate() const {
  require(!heads.empty(), "layer: needs at least one head");
  const std::size_t dm = d_model(), d = head_dim();
  require(d * heads.size() == dm, "layer: d_model must equal heads * head_dim");
  for (const auto& h : heads) {
    for (const Matrix* m : {&h.wq, &h.wk, &h.wv}) {
      require(m->rows == d && m->cols == dm, "layer: head matrices must be head_dim x d_model");
      check_finite(m->data, "layer head");
    }
  }
  require(ff.w1.cols == dm && ff.b1.size() == ff.w1.rows, "layer: ff.w1/b1 shape");
  require(ff.w2.rows == dm && ff.w2.cols == ff.w1.rows && ff.b2.size() == dm, "layer: ff.w2/b2 shape");
  check_finite(ff.w1.data, "ff.w1");
  check_finite(ff.w2.data, "ff.w2");
  for (const auto* ln : {&ln1, &ln2}) {
    require(ln->scale.size() == dm && ln->shift.size() == dm, "layer: layer-norm parameter size");
  }
}

void ModelWeights::validate() const {
  mlp.validate();
  require(layers.size() == kTransformerLayers, "model: expected " + std::to_string(kTransformerLayers) + " layers");
  for (const auto& l : layers) l.validate();
  const std::size_t dm = layers.front().d_model();
  for (const auto& l : layers) require(l.d_model() == dm, "model: layers disagree on d_model");
  require(mlp.layers.empty() || mlp.output_dim() == dm, "model: mlp output must equal d_model");
  require(head_w.size() == dm, "model: head weight size must equal d_model");
  require(std::isfinite(head_b), "model: non-finite head bias");
}

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  Matrix m(rows, cols);
  for (double& v : m.data) v = nd(rng);
  return m;
}

std::vector<double> small_vec(std::size_t n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

}  // namespace

LayerWeights random_layer(std::size_t d_model, std::size_t heads, std::size_t d_ff, std::uint64_t seed) {
  require(heads > 0 && d_model % heads == 0, "random_layer: d_model must be divisible by heads");
  std::mt19937_64 rng(seed);
  LayerWeights w;
  const std::size_t d = d_model / heads;
  for (std::size_t c = 0; c < heads; ++c) {
    HeadWeights h;
    h.wq = gaussian(d, d_model, rng);
    h.wk = gaussian(d, d_model, rng);
    h.wv = gaussian(d, d_model, rng);
    w.heads.push_back(std::move(h));
  }
  w.ff.w1 = gaussian(d_ff, d_model, rng);
  w.ff.b1 = small_vec(d_ff, rng, 0.1);
  w.ff.w2 = gaussian(d_model, d_ff, rng);
  w.ff.b2 = small_vec(d_model, rng, 0.1);
  for (auto* ln : {&w.ln1, &w.ln2}) {
    ln->scale = small_vec(d_model, rng, 0.1);
    for (double& s : ln->scale) s += 1.0;
    ln->shift = small_vec(d_model, rng, 0.1);
  }
  return w;
}

ModelWeights random_model(const ModelDims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelWeights m;
  const std::size_t in = dims.n_sampled * dims.feature_depth;
  m.mlp.layers.push_back({gaussian(dims.mlp_hidden, in, rng), small_vec(dims.mlp_hidden, rng, 0.1), Activation::kRelu});
  m.mlp.layers.push_back(
      {gaussian(dims.d_model, dims.mlp_hidden, rng), small_vec(dims.d_model, rng, 0.1), Activation::kIdentity});
  for (std::size_t l = 0; l < kTransformerLayers; ++l) {
    m.layers.push_back(random_layer(dims.d_model, dims.heads, dims.d_ff, rng()));
  }
  m.head_w = small_vec(dims.d_model, rng, 1.0 / std::sqrt(static_cast<double>(dims.d_model)));
  m.head_b = small_vec(1, rng, 0.1).front();
  return m;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> layer_norm(std::span<const double> x, const LayerNormParams& p) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv * p.scale[i] + p.shift[i];
  return out;
}

namespace {

std::vector<std::size_t> attention_neighbors(const LineGraphView& lg, std::size_t i, bool self_loops) {
  std::vector<std::size_t> nb = lg.line_adj[i];
  if (self_loops) nb.insert(std::lower_bound(nb.begin(), nb.end(), i), i);
  return nb;
}

// Per-node projections for one head.
struct Projections {
  std::vector<std::vector<double>> q, k, v;
};

Projections project(const HeadWeights& h, const Matrix& X, bool need_values) {
  Projections p;
  p.q.reserve(X.rows);
  p.k.reserve(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) {
    p.q.push_back(matvec(h.wq, X.row(i)));
    p.k.push_back(matvec(h.wk, X.row(i)));
    if (need_values) p.v.push_back(matvec(h.wv, X.row(i)));
  }
  return p;
}

AttentionRows rows_from(const Projections& proj, const LineGraphView& lg, std::size_t d, bool self_loops) {
  AttentionRows out;
  const std::size_t n = lg.size();
  out.neighbors.resize(n);
  out.alpha.resize(n);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    auto nb = attention_neighbors(lg, i, self_loops);
    std::vector<double> logits(nb.size());
    for (std::size_t k = 0; k < nb.size(); ++k) {
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) acc += proj.q[i][t] * proj.k[nb[k]][t];
      logits[k] = acc * inv_sqrt_d;
    }
    if (!logits.empty()) {
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double& l : logits) {
        l = std::exp(l - mx);
        z += l;
      }
      for (double& l : logits) l /= z;
    }
    out.neighbors[i] = std::move(nb);
    out.alpha[i] = std::move(logits);
  }
  return out;
}

void check_inputs(const LayerWeights& w, const LineGraphView& lg, const Matrix& X) {
  require(X.rows == lg.size(), "features: row count must equal line-graph size");
  require(X.cols == w.d_model(), "features: width must equal d_model");
}

}  // namespace

AttentionRows attention_coeffs(const LayerWeights& w, const LineGraphView& lg, const Matrix& X, std::size_t head,
                               const AttentionOptions& opts) {
  check_inputs(w, lg, X);
  require(head < w.heads.size(), "attention: head index out of range");
  return rows_from(project(w.heads[head], X, false), lg, w.head_dim(), opts.self_loops);
}

Matrix transformer_layer(const LayerWeights& w, const LineGraphView& lg, const Matrix& X,
                         const AttentionOptions& opts) {
  w.validate();
  check_inputs(w, lg, X);
  const std::size_t n = lg.size(), dm = w.d_model(), d = w.head_dim();

  Matrix H(n, dm);
  for (std::size_t c = 0; c < w.heads.size(); ++c) {
    const Projections proj = project(w.heads[c], X, true);
    const AttentionRows att = rows_from(proj, lg, d, opts.self_loops);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < att.neighbors[i].size(); ++k) {
        const auto& v = proj.v[att.neighbors[i][k]];
        const double a = att.alpha[i][k];
        for (std::size_t t = 0; t < d; ++t) H(i, c * d + t) += a * v[t];
      }
    }
  }

  Matrix out(n, dm);
  std::vector<double> tmp(dm);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < dm; ++t) tmp[t] = X(i, t) + H(i, t);
    const std::vector<double> h1 = layer_norm(tmp, w.ln1);
    std::vector<double> hidden = matvec(w.ff.w1, h1);
    for (std::size_t t = 0; t < hidden.size(); ++t) hidden[t] = std::max(0.0, hidden[t] + w.ff.b1[t]);
    const std::vector<double> ffo = matvec(w.ff.w2, hidden);
    for (std::size_t t = 0; t < dm; ++t) tmp[t] = h1[t] + ffo[t] + w.ff.b2[t];
    const std::vector<double> x2 = layer_norm(tmp, w.ln2);
    std::copy(x2.begin(), x2.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * dm));
  }
  return out;
}

std::vector<double> predict_logits(const ModelWeights& m, const LineGraphView& lg, const Matrix& X0,
                                   const AttentionOptions& opts) {
  m.validate();
  if (lg.size() == 0) return {};
  Matrix X = X0;
  for (const auto& layer : m.layers) X = transformer_layer(layer, lg, X, opts);
  std::vector<double> logits(lg.size());
  for (std::size_t i = 0; i < lg.size(); ++i) {
    double acc = m.head_b;
    for (std::size_t t = 0; t < X.cols; ++t) acc += m.head_w[t] * X(i, t);
    logits[i] = acc;
  }
  return logits;
}

std::vector<double> predict_links(const ModelWeights& m, const LineGraphView& lg, const Matrix& X0,
                                  const AttentionOptions& opts) {
  std::vector<double> p = predict_logits(m, lg, X0, opts);
  for (double& v : p) v = sigmoid(v);
  return p;
}

double bce(double p, double y, double eps) {
  const double q = std::clamp(p, eps, 1.0 - eps);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double total_loss(const MaskBundle& pred, const MaskBundle& gt, std::span<const double> pred_b,
                  std::span<const int> gt_b, const LossConfig& cfg) {
  require(cfg.lambda >= 0.0, "loss: lambda must be nonnegative");
  require(cfg.eps > 0.0 && cfg.eps < 0.5, "loss: eps must lie in (0, 0.5)");
  pred.validate();
  gt.validate();
  require(pred.road.same_shape(gt.road), "loss: predicted and target masks differ in shape");
  require(pred_b.size() == gt_b.size(), "loss: edge predictions and labels differ in length");

  double mask_sum = 0.0;
  std::size_t mask_n = 0;
  for (const auto& [p, y] : {std::pair{&pred.keypoint, &gt.keypoint}, std::pair{&pred.road, &gt.road},
                             std::pair{&pred.overpass, &gt.overpass}}) {
    const auto pv = p->values();
    const auto yv = y->values();
    for (std::size_t i = 0; i < pv.size(); ++i) mask_sum += bce(pv[i], yv[i], cfg.eps);
    mask_n += pv.size();
  }
  const double mask_term = mask_n ? mask_sum / static_cast<double>(mask_n) : 0.0;

  double edge_sum = 0.0;
  for (std::size_t i = 0; i < pred_b.size(); ++i) edge_sum += bce(pred_b[i], gt_b[i], cfg.eps);
  const double edge_term = pred_b.empty() ? 0.0 : edge_sum / static_cast<double>(pred_b.size());
  return mask_term + cfg.lambda * edge_term;
}

// ---------------------------------------------------------------------------
// JSON

LayerWeights layer_from_json(const nlohmann::json& j) {
  LayerWeights w;
  for (const auto& jh : j.at("heads")) {
    w.heads.push_back({matrix_from_json(jh.at("wq"), "wq"), matrix_from_json(jh.at("wk"), "wk"),
                       matrix_from_json(jh.at("wv"), "wv")});
  }
  const auto& ff = j.at("ff");
  w.ff.w1 = matrix_from_json(ff.at("w1"), "ff.w1");
  w.ff.b1 = ff.at("b1").get<std::vector<double>>();
  w.ff.w2 = matrix_from_json(ff.at("w2"), "ff.w2");
  w.ff.b2 = ff.at("b2").get<std::vector<double>>();
  for (const auto& [key, ln] : {std::pair{"ln1", &w.ln1}, std::pair{"ln2", &w.ln2}}) {
    ln->scale = j.at(key).at("scale").get<std::vector<double>>();
    ln->shift = j.at(key).at("shift").get<std::vector<double>>();
  }
  w.dropout = j.value("dropout", 0.1);
  w.validate();
  return w;
}

nlohmann::json layer_to_json(const LayerWeights& w) {
  nlohmann::json heads = nlohmann::json::array();
  for (const auto& h : w.heads) {
    heads.push_back({{"wq", matrix_to_json(h.wq)}, {"wk", matrix_to_json(h.wk)}, {"wv", matrix_to_json(h.wv)}});
  }
  return {{"heads", std::move(heads)},
          {"ff", {{"w1", matrix_to_json(w.ff.w1)}, {"b1", w.ff.b1}, {"w2", matrix_to_json(w.ff.w2)}, {"b2", w.ff.b2}}},
          {"ln1", {{"scale", w.ln1.scale}, {"shift", w.ln1.shift}}},
          {"ln2", {{"scale", w.ln2.scale}, {"shift", w.ln2.shift}}},
          {"dropout", w.dropout}};
}

ModelWeights model_from_json(const nlohmann::json& j) {
  try {
    ModelWeights m;
    m.mlp = mlp_from_json(j.at("mlp"));
    for (const auto& jl : j.at("layers")) m.layers.push_back(layer_from_json(jl));
    m.head_w = j.at("head").at("w").get<std::vector<double>>();
    m.head_b = j.at("head").at("b").get<double>();
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model weights: ") + e.what());
  }
}

nlohmann::json model_to_json(const ModelWeights& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) layers.push_back(layer_to_json(l));
  return {{"mlp", mlp_to_json(m.mlp)}, {"layers", std::move(layers)}, {"head", {{"w", m.head_w}, {"b", m.head_b}}}};
}

}  // namespace roadgraph
