#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "roadgraph/types.hpp"

namespace roadgraph {

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data).subspan(r * cols, cols); }

  static Matrix identity(std::size_t n);
};

// y = M x, accumulated left to right in double.
std::vector<double> matvec(const Matrix& m, std::span<const double> x);

enum class Activation { kIdentity, kRelu };

struct DenseLayer {
  Matrix w;               // out x in
  std::vector<double> b;  // out
  Activation act = Activation::kIdentity;
};

struct MlpWeights {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().w.cols; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().w.rows; }
  // Throws ConfigError unless layer dims chain and all values are finite.
  void validate() const;
};

struct SampleSpec {
  int n_sampled = 4;
  double downsample = 16.0;
};

std::vector<double> mlp_forward(const MlpWeights& w, std::span<const double> x);

// Bilinear read of every channel at image point (x, y). Cell (u, v) is
// centered at image point (downsample*u + downsample/2, ...); out-of-range
// queries clamp to the border cells.
std::vector<double> sample_bilinear(const FeatureGrid& f, double x, double y, double downsample = 16.0);

// Endpoints ordered by (x, then y); n_sampled evenly spaced samples from the
// first to the second, concatenated.
std::vector<double> edge_samples(const FeatureGrid& f, Point p1, Point p2, const SampleSpec& spec);

// mlp(edge_samples(...)); throws ConfigError if mlp input != n_sampled*depth.
std::vector<double> edge_feature(const FeatureGrid& f, Point p1, Point p2, const SampleSpec& spec,
                                 const MlpWeights& mlp);

// JSON: [{"w":[[...]],"b":[...],"act":"relu"|"identity"}, ...]
MlpWeights mlp_from_json(const nlohmann::json& j);
nlohmann::json mlp_to_json(const MlpWeights& w);
Matrix matrix_from_json(const nlohmann::json& j, const char* what);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace roadgraph
