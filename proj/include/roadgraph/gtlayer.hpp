#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "roadgraph/featex.hpp"
#include "roadgraph/graphs.hpp"
#include "roadgraph/types.hpp"

namespace roadgraph {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr std::size_t kTransformerLayers = 3;

struct HeadWeights {
  Matrix wq;  // d x d_model
  Matrix wk;
  Matrix wv;
};

struct FeedForward {
  Matrix w1;  // d_ff x d_model
  std::vector<double> b1;
  Matrix w2;  // d_model x d_ff
  std::vector<double> b2;
};

struct LayerNormParams {
  std::vector<double> scale;
  std::vector<double> shift;
};

struct LayerWeights {
  std::vector<HeadWeights> heads;
  FeedForward ff;
  LayerNormParams ln1;
  LayerNormParams ln2;
  // Carried for weight-file compatibility; the forward pass is inference
  // only, so dropout is the identity.
  double dropout = 0.1;

  std::size_t d_model() const { return heads.empty() ? 0 : heads.front().wq.cols; }
  std::size_t head_dim() const { return heads.empty() ? 0 : heads.front().wq.rows; }
  void validate() const;
};

struct ModelWeights {
  MlpWeights mlp;
  std::vector<LayerWeights> layers;
  std::vector<double> head_w;
  double head_b = 0.0;

  void validate() const;
};

struct ModelDims {
  std::size_t n_sampled = 4;
  std::size_t feature_depth = 128;
  std::size_t mlp_hidden = 128;
  std::size_t d_model = 128;
  std::size_t heads = 4;
  std::size_t d_ff = 128;
};

// Gaussian-initialized weights (scale 1/sqrt(fan_in)) from mt19937_64(seed).
ModelWeights random_model(const ModelDims& dims, std::uint64_t seed);
LayerWeights random_layer(std::size_t d_model, std::size_t heads, std::size_t d_ff, std::uint64_t seed);

struct AttentionOptions {
  // Attend to self in addition to line-graph neighbors, so isolated
  // candidates still aggregate a message.
  bool self_loops = true;
};

// Row-normalized attention of one head: alpha[i][k] is the weight of
// neighbors[i][k] (ascending ids, self included when enabled).
struct AttentionRows {
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<double>> alpha;
};

// X is n x d_model with rows aligned to lg.line_nodes.
AttentionRows attention_coeffs(const LayerWeights& w, const LineGraphView& lg, const Matrix& X, std::size_t head,
                               const AttentionOptions& opts = {});

Matrix transformer_layer(const LayerWeights& w, const LineGraphView& lg, const Matrix& X,
                         const AttentionOptions& opts = {});

std::vector<double> layer_norm(std::span<const double> x, const LayerNormParams& p);

double sigmoid(double z);

// Runs every layer and the sigmoid head. Empty line graph gives empty output.
std::vector<double> predict_links(const ModelWeights& m, const LineGraphView& lg, const Matrix& X0,
                                  const AttentionOptions& opts = {});

// Pre-sigmoid logits of predict_links.
std::vector<double> predict_logits(const ModelWeights& m, const LineGraphView& lg, const Matrix& X0,
                                   const AttentionOptions& opts = {});

struct LossConfig {
  double lambda = 0.1;
  double eps = 1e-7;
};

double bce(double p, double y, double eps);

// Mean BCE over every pixel of the three masks, plus lambda times the mean
// BCE over candidate edges (zero when there are none).
double total_loss(const MaskBundle& pred, const MaskBundle& gt, std::span<const double> pred_b,
                  std::span<const int> gt_b, const LossConfig& cfg);

ModelWeights model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelWeights& m);
LayerWeights layer_from_json(const nlohmann::json& j);
nlohmann::json layer_to_json(const LayerWeights& w);

}  // namespace roadgraph
