#include "roadgraph/featex.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "roadgraph/error.hpp"

namespace roadgraph {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols) {
    throw ConfigError("matrix has " + std::to_string(m.cols) + " columns, vector has " + std::to_string(x.size()));
  }
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * m.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

void MlpWeights::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.w.data.size() != l.w.rows * l.w.cols) throw ConfigError("mlp layer " + std::to_string(i) + ": ragged matrix");
    if (l.b.size() != l.w.rows) throw ConfigError("mlp layer " + std::to_string(i) + ": bias size mismatch");
    if (i > 0 && layers[i - 1].w.rows != l.w.cols) {
      throw ConfigError("mlp layer " + std::to_string(i) + ": input dim does not match previous output");
    }
    for (double v : l.w.data) {
      if (!std::isfinite(v)) throw ConfigError("mlp: non-finite weight");
    }
    for (double v : l.b) {
      if (!std::isfinite(v)) throw ConfigError("mlp: non-finite bias");
    }
  }
}

std::vector<double> mlp_forward(const MlpWeights& w, std::span<const double> x) {
  std::vector<double> cur(x.begin(), x.end());
  for (const DenseLayer& l : w.layers) {
    if (cur.size() != l.w.cols) {
      throw ConfigError("mlp: expected input of size " + std::to_string(l.w.cols) + ", got " +
                        std::to_string(cur.size()));
    }
    std::vector<double> next = matvec(l.w, cur);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] += l.b[i];
      if (l.act == Activation::kRelu) next[i] = std::max(0.0, next[i]);
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> sample_bilinear(const FeatureGrid& f, double x, double y, double downsample) {
  std::vector<double> out(static_cast<std::size_t>(f.depth()), 0.0);
  if (f.gh() == 0 || f.gw() == 0) return out;
  const double u = std::clamp(x / downsample - 0.5, 0.0, static_cast<double>(f.gw() - 1));
  const double v = std::clamp(y / downsample - 0.5, 0.0, static_cast<double>(f.gh() - 1));
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const int u1 = std::min(u0 + 1, f.gw() - 1);
  const int v1 = std::min(v0 + 1, f.gh() - 1);
  const double fu = u - u0, fv = v - v0;
  const auto c00 = f.cell(v0, u0), c01 = f.cell(v0, u1), c10 = f.cell(v1, u0), c11 = f.cell(v1, u1);
  for (std::size_t ch = 0; ch < out.size(); ++ch) {
    const double top = (1.0 - fu) * c00[ch] + fu * c01[ch];
    const double bottom = (1.0 - fu) * c10[ch] + fu * c11[ch];
    out[ch] = (1.0 - fv) * top + fv * bottom;
  }
  return out;
}

std::vector<double> edge_samples(const FeatureGrid& f, Point p1, Point p2, const SampleSpec& spec) {
  if (spec.n_sampled < 2) throw ConfigError("n_sampled must be >= 2");
  if (std::tie(p2.x, p2.y) < std::tie(p1.x, p1.y)) std::swap(p1, p2);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.n_sampled) * static_cast<std::size_t>(f.depth()));
  for (int k = 0; k < spec.n_sampled; ++k) {
    const double t = static_cast<double>(k) / (spec.n_sampled - 1);
    const auto s = sample_bilinear(f, p1.x + t * (p2.x - p1.x), p1.y + t * (p2.y - p1.y), spec.downsample);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::vector<double> edge_feature(const FeatureGrid& f, Point p1, Point p2, const SampleSpec& spec,
                                 const MlpWeights& mlp) {
  const std::size_t expected = static_cast<std::size_t>(spec.n_sampled) * static_cast<std::size_t>(f.depth());
  if (mlp.input_dim() != expected) {
    throw ConfigError("edge_feature: mlp expects " + std::to_string(mlp.input_dim()) + " inputs, samples give " +
                      std::to_string(expected));
  }
  return mlp_forward(mlp, edge_samples(f, p1, p2, spec));
}

Matrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected a matrix (array of rows)");
  Matrix m;
  m.rows = j.size();
  m.cols = m.rows ? j[0].size() : 0;
  m.data.reserve(m.rows * m.cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != m.cols) throw ConfigError(std::string(what) + ": ragged matrix");
    for (const auto& v : row) m.data.push_back(v.get<double>());
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

MlpWeights mlp_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("mlp: expected an array of layers");
  MlpWeights w;
  for (const auto& jl : j) {
    DenseLayer l;
    l.w = matrix_from_json(jl.at("w"), "mlp.w");
    l.b = jl.at("b").get<std::vector<double>>();
    const std::string act = jl.value("act", "identity");
    if (act == "relu") {
      l.act = Activation::kRelu;
    } else if (act == "identity") {
      l.act = Activation::kIdentity;
    } else {
      throw ConfigError("mlp: unknown activation '" + act + "'");
    }
    w.layers.push_back(std::move(l));
  }
  w.validate();
  return w;
}

nlohmann::json mlp_to_json(const MlpWeights& w) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : w.layers) {
    out.push_back({{"w", matrix_to_json(l.w)},
                   {"b", l.b},
                   {"act", l.act == Activation::kRelu ? "relu" : "identity"}});
  }
  return out;
}

}  // namespace roadgraph
