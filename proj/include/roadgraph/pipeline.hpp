#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "roadgraph/featex.hpp"
#include "roadgraph/gtlayer.hpp"
#include "roadgraph/gtprep.hpp"
#include "roadgraph/nms.hpp"
#include "roadgraph/refine.hpp"
#include "roadgraph/report.hpp"
#include "roadgraph/types.hpp"

namespace roadgraph {

// ---------------------------------------------------------------------------
// Tiling

struct WindowLayout {
  int window = 0;
  int grid_n = 1;
  std::vector<int> xs;  // column offsets
  std::vector<int> ys;  // row offsets

  std::vector<std::pair<int, int>> offsets() const;  // (x0, y0), row-major
  // Smallest overlap between neighbouring windows along either axis; the
  // window size itself when there is a single window per axis.
  int min_overlap() const;
};

// Offsets round(k * (dim - window) / (grid_n - 1)). Throws LayoutError when
// the window does not fit, or neighbours overlap by d_nei or less; the
// message names the smallest grid_n that would work.
WindowLayout plan_windows(int h, int w, int window, int grid_n, double d_nei);

// Arithmetic mean per key.
std::map<EdgeKey, double> fuse_predictions(const std::vector<std::pair<EdgeKey, double>>& per_window);

// ---------------------------------------------------------------------------
// Scorers

// GT with a node at every candidate vertex that lies within tol of it: the
// vertex either takes over the nearest GT node or splits the nearest GT edge
// at its projection. `owner[i]` is the aligned node id for candidate vertex i.
struct GtAlignment {
  RoadGraph graph;
  std::vector<std::optional<NodeId>> owner;
  // Pairs of owned aligned nodes joined by an edge, or by a chain through
  // GT nodes no vertex claimed.
  std::vector<EdgeKey> links;
};

GtAlignment align_gt(const RoadGraph& gt, const std::vector<Node>& vertices, double match_tol);

// 1 when both endpoints sit within match_tol of GT nodes that are connected
// in the aligned GT, else 0.
std::vector<double> oracle_scorer(const CandidateSet& candidates, const RoadGraph& gt, double match_tol);

// Mean of n_samples bilinear road-mask reads spaced evenly along each pair.
std::vector<double> mask_scorer(const CandidateSet& candidates, const ProbGrid& road, int n_samples);

// Bilinear read with pixel (c, r) centered at (c + 0.5, r + 0.5), clamped.
double sample_grid(const ProbGrid& g, double x, double y);

enum class ScorerKind { kOracle, kMask, kTransformer };

struct OracleScorerConfig {
  RoadGraph gt;
  double match_tol = 8.0;
};

struct MaskScorerConfig {
  int n_samples = 16;
};

struct TransformerScorerConfig {
  ModelWeights model;
  SampleSpec spec;
  AttentionOptions attention;
};

struct EdgeScorer {
  std::variant<OracleScorerConfig, MaskScorerConfig, TransformerScorerConfig> payload;

  ScorerKind kind() const { return static_cast<ScorerKind>(payload.index()); }
};

std::string to_string(ScorerKind k);
ScorerKind scorer_kind_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Inference

struct ExtractParams {
  NmsParams nms;
  double d_nei = 64.0;
  double decision_threshold = 0.5;
  int window = 512;
  int grid_n = 5;
};

struct ExtractResult {
  RoadGraph graph;
  std::vector<NmsVertex> vertices;
  std::size_t candidate_count = 0;
  std::size_t window_count = 0;
  std::map<EdgeKey, double> fused;  // every scored candidate
};

ExtractResult extract_network(const MaskBundle& bundle, const FeatureGrid* features, const EdgeScorer& scorer,
                              const ExtractParams& params, StageTimer* timer = nullptr);

// ---------------------------------------------------------------------------
// Synthetic scenes

enum class SceneStyle { kGrid, kRadial, kOverpass };

std::string to_string(SceneStyle s);
SceneStyle scene_style_from_string(const std::string& s);

inline constexpr double kSynthBlurSigma = 1.5;
inline constexpr int kSynthFeatureDepth = 8;
inline constexpr int kSynthFeatureStride = 16;

struct SynthScene {
  RoadGraph gt;
  MaskBundle bundle;
  FeatureGrid features;
};

// Grid layout parameters shared with tests that replay the generator.
inline constexpr int kGridMargin = 32;
inline constexpr int kGridJitter = 20;
inline constexpr int kGridMinSpacing = 80;
inline constexpr int kGridMaxSpacing = 140;
inline constexpr int kGridDropPercent = 15;

SynthScene synth_scene(std::uint64_t seed, int size, SceneStyle style);

RoadGraph synth_graph(std::uint64_t seed, int size, SceneStyle style);

// Separable Gaussian, radius ceil(3 sigma), clamped borders.
ProbGrid gaussian_blur(const ProbGrid& g, double sigma);

// Sets a `fraction` of pixels to 1, chosen by mt19937_64(seed).
ProbGrid add_salt(const ProbGrid& g, double fraction, std::uint64_t seed);

// Stride-averaged road/keypoint/overpass channels, zero-padded to `depth`.
FeatureGrid stack_features(const MaskBundle& b, int stride = kSynthFeatureStride, int depth = kSynthFeatureDepth);

// ---------------------------------------------------------------------------
// Ground-truth preprocessing

struct PreprocessParams {
  int d_r = 16;
  double d_nei = 64.0;
  std::uint64_t seed = 0;
  RefineParams refine;
};

struct PreprocessResult {
  MaskBundle masks;
  RoadGraph dense;
  LabeledCandidates candidates;
  std::vector<std::vector<double>> interpolation;  // per densified path
  std::vector<NodeId> overpass_witnesses;
};

// Keypoints, centerline and disk masks, densification, overlap refinement of
// the dense graph and candidate labeling.
PreprocessResult preprocess(const RoadGraph& g, int h, int w, const PreprocessParams& p, StageTimer* timer = nullptr);

// ---------------------------------------------------------------------------
// Rendering

struct RenderOptions {
  bool color_by_prob = true;
  double node_radius = 2.0;
  double stroke_width = 1.0;
};

// SVG sized to the graph's bounding box (or width x height when positive).
std::string render_svg(const RoadGraph& g, int width = 0, int height = 0, const RenderOptions& opts = {});

}  // namespace roadgraph
