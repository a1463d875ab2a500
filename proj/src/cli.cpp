#include "roadgraph/cli.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include "roadgraph/error.hpp"
#include "roadgraph/graphs.hpp"
#include "roadgraph/io.hpp"
#include "roadgraph/metrics.hpp"
#include "roadgraph/parallel.hpp"
#include "roadgraph/pipeline.hpp"
#include "roadgraph/small_graph.hpp"

namespace roadgraph::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Globals {
  bool json = false;
  unsigned threads = 0;
};

// Shared plumbing for one subcommand run.
struct Run {
  RunReport report;
  StageTimer timer;

  template <typename Fn>
  auto stage(const std::string& name, Fn&& fn) {
    auto s = StageTimer::stage(&timer, name);
    return fn();
  }

  void output(const fs::path& p) { report.outputs.push_back(p.string()); }
};

std::string source_name(VertexSource s) {
  switch (s) {
    case VertexSource::kKeypoint: return "keypoint";
    case VertexSource::kOverpass: return "overpass";
    case VertexSource::kRoad: return "road";
  }
  return "?";
}

std::pair<int, int> parse_size(const std::string& s) {
  static const std::regex re(R"((\d+)(?:[xX](\d+))?)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ParseError("size must look like HxW or N, got '" + s + "'");
  const int h = std::stoi(m[1].str());
  const int w = m[2].matched ? std::stoi(m[2].str()) : h;
  if (h <= 0 || w <= 0) throw ValidationError("size must be positive");
  return {h, w};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<Node> read_vertices(const fs::path& path) {
  const auto j = io::read_json(path);
  std::vector<Node> out;
  const char* key = j.contains("vertices") ? "vertices" : "nodes";
  if (!j.contains(key) || !j[key].is_array()) throw ParseError(path.string() + ": expected a 'vertices' array");
  for (std::size_t i = 0; i < j[key].size(); ++i) {
    const auto& v = j[key][i];
    try {
      out.push_back({v.value("id", static_cast<NodeId>(i)), v.at("x").get<double>(), v.at("y").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": " + key + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

nlohmann::json vertices_json(const std::vector<NmsVertex>& vs) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    arr.push_back({{"id", i}, {"x", vs[i].x}, {"y", vs[i].y}, {"score", vs[i].score}, {"source", source_name(vs[i].source)}});
  }
  return {{"vertices", std::move(arr)}};
}

nlohmann::json points_json(const std::vector<Point>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Point& p : pts) arr.push_back({{"x", p.x}, {"y", p.y}});
  return {{"points", std::move(arr)}};
}

MaskBundle read_bundle(const std::string& road, const std::string& keypoint, const std::string& overpass) {
  MaskBundle b{io::read_grid(road), io::read_grid(keypoint), io::read_grid(overpass)};
  b.validate();
  return b;
}

void write_bundle(const MaskBundle& b, const fs::path& dir, Run& run) {
  for (const auto& [name, grid] : {std::pair{"road.pgm", &b.road}, std::pair{"keypoint.pgm", &b.keypoint},
                                   std::pair{"overpass.pgm", &b.overpass}}) {
    io::write_grid(*grid, dir / name);
    run.output(dir / name);
  }
}

void print_summary(std::ostream& out, const RunReport& r) {
  out << r.command << ": ok";
  if (!r.scores.is_null()) out << " " << r.scores.dump();
  out << "\n";
  for (const auto& o : r.outputs) out << "  wrote " << o << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Road-network graph extraction from probability masks", "roadgraph"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--json", g.json, "Print a JSON run report on stdout");
  app.add_option("--threads", g.threads, "Worker thread cap (0 = all cores)");

  struct {
    std::string graph, size = "512", out_dir;
    PreprocessParams pp;
  } preprocess_opt;
  struct {
    std::string graph, out_path, points_path;
    RefineParams rp;
  } refine_opt;
  struct {
    std::string road, keypoint, overpass, out_path;
    NmsParams np;
  } nms_opt;
  struct {
    std::string vertices, out_path;
    double d_nei = 64.0;
  } build_graph_opt;
  struct {
    std::string graph, out_path;
  } linegraph_opt;
  struct {
    std::string graph;
  } count_special_opt;
  struct {
    std::size_t max_nodes = 6;
  } whitney_check_opt;
  struct {
    std::string road, keypoint, overpass, features, weights, scorer = "mask", gt, out_path;
    ExtractParams ep;
    int n_samples = 16;
    double match_tol = 8.0;
  } extract_opt;
  struct {
    std::uint64_t seed = 7;
    int size = 512;
    std::string style = "grid", out_dir;
    double salt = 0.0;
  } synth_opt;
  struct {
    std::string gt, pred, metric = "both", report_path;
    TopoParams tp;
    AplsParams ap;
  } eval_opt;
  struct {
    std::string graph, out_path;
    int width = 0, height = 0;
    bool plain = false;
  } render_opt;

  Run run;
  std::function<void()> action;
  auto bind = [&](CLI::App* sub, std::function<void()> fn) {
    sub->callback([&, sub, fn] {
      run.report.command = sub->get_name();
      action = fn;
    });
  };

  // preprocess ---------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("preprocess", "Ground-truth graph to masks, dense graph and labeled candidates");
    sub->add_option("--graph", preprocess_opt.graph, "Ground-truth graph JSON")->required();
    sub->add_option("--size", preprocess_opt.size, "Canvas HxW (or N for square)");
    sub->add_option("--d-r", preprocess_opt.pp.d_r, "Interpolation spacing base")->capture_default_str();
    sub->add_option("--d-nei", preprocess_opt.pp.d_nei, "Candidate neighborhood radius")->capture_default_str();
    sub->add_option("--seed", preprocess_opt.pp.seed, "Interpolation seed")->capture_default_str();
    sub->add_option("--out-dir", preprocess_opt.out_dir, "Output directory")->required();
    bind(sub, [&] {
      const auto [h, w] = parse_size(preprocess_opt.size);
      run.report.params = {{"graph", preprocess_opt.graph}, {"size", {h, w}}, {"d_r", preprocess_opt.pp.d_r}, {"d_nei", preprocess_opt.pp.d_nei}, {"seed", preprocess_opt.pp.seed}};
      const RoadGraph gt = run.stage("read", [&] { return io::read_graph(preprocess_opt.graph); });
      const PreprocessResult res = preprocess(gt, h, w, preprocess_opt.pp, &run.timer);
      const fs::path dir(preprocess_opt.out_dir);
      run.stage("write", [&] {
        ensure_dir(dir);
        write_bundle(res.masks, dir, run);
        io::write_graph(res.dense, dir / "dense_graph.json");
        run.output(dir / "dense_graph.json");
        io::write_json(io::candidates_to_json(res.candidates.candidates), dir / "candidates.json");
        run.output(dir / "candidates.json");
        return 0;
      });
      run.report.scores = {{"dense_nodes", res.dense.node_count()},
                           {"dense_edges", res.dense.edge_count()},
                           {"candidates", res.candidates.candidates.pairs.size()},
                           {"overpass_witnesses", res.overpass_witnesses.size()},
                           {"unlabelable_edges", res.candidates.unlabelable.size()}};
      for (const EdgeKey& e : res.candidates.unlabelable) {
        err << "warning: dense edge [" << e.a << "," << e.b << "] is longer than d_nei and has no candidate\n";
      }
    });
  }

  // refine ---------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("refine", "Separate overlapping edges at overpass crossings");
    sub->add_option("--graph", refine_opt.graph)->required();
    sub->add_option("--tau", refine_opt.rp.tau)->capture_default_str();
    sub->add_option("--gamma", refine_opt.rp.gamma)->capture_default_str();
    sub->add_option("--alpha", refine_opt.rp.step_scale)->capture_default_str();
    sub->add_option("--max-iters", refine_opt.rp.max_iters)->capture_default_str();
    sub->add_option("--period", refine_opt.rp.merge_period)->capture_default_str();
    sub->add_option("--eps", refine_opt.rp.tolerance)->capture_default_str();
    sub->add_option("--out", refine_opt.out_path)->required();
    sub->add_option("--overpass-points", refine_opt.points_path);
    bind(sub, [&] {
      run.report.params = {{"graph", refine_opt.graph}, {"tau", refine_opt.rp.tau}, {"gamma", refine_opt.rp.gamma}, {"alpha", refine_opt.rp.step_scale},
                           {"max_iters", refine_opt.rp.max_iters}, {"period", refine_opt.rp.merge_period}, {"eps", refine_opt.rp.tolerance}};
      const RoadGraph in = run.stage("read", [&] { return io::read_graph(refine_opt.graph); });
      const RefineResult r = run.stage("refine", [&] { return refine_graph(in, refine_opt.rp); });
      io::write_graph(r.graph, refine_opt.out_path);
      run.output(refine_opt.out_path);
      if (!refine_opt.points_path.empty()) {
        std::vector<Point> pts;
        std::vector<NodeId> seen;
        for (NodeId id : r.witnesses) {
          if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
          seen.push_back(id);
          pts.push_back(r.graph.position(id));
        }
        io::write_json(points_json(pts), refine_opt.points_path);
        run.output(refine_opt.points_path);
      }
      run.report.scores = {{"converged", r.converged}, {"iterations", r.iterations},
                           {"witnesses", r.witnesses.size()}, {"nodes", r.graph.node_count()}};
    });
  }

  // nms ----------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("nms", "Coupled non-maximum suppression over the three masks");
    sub->add_option("--road", nms_opt.road)->required();
    sub->add_option("--keypoint", nms_opt.keypoint)->required();
    sub->add_option("--overpass", nms_opt.overpass)->required();
    sub->add_option("--t-k", nms_opt.np.t_k)->capture_default_str();
    sub->add_option("--t-r", nms_opt.np.t_r)->capture_default_str();
    sub->add_option("--d-k", nms_opt.np.d_k)->capture_default_str();
    sub->add_option("--d-r", nms_opt.np.d_r)->capture_default_str();
    sub->add_option("--out", nms_opt.out_path)->required();
    bind(sub, [&] {
      run.report.params = {{"t_k", nms_opt.np.t_k}, {"t_r", nms_opt.np.t_r}, {"d_k", nms_opt.np.d_k}, {"d_r", nms_opt.np.d_r}};
      const MaskBundle b = run.stage("read", [&] { return read_bundle(nms_opt.road, nms_opt.keypoint, nms_opt.overpass); });
      const auto vs = run.stage("nms", [&] { return coupled_nms(b, nms_opt.np); });
      io::write_json(vertices_json(vs), nms_opt.out_path);
      run.output(nms_opt.out_path);
      run.report.scores = {{"vertices", vs.size()}};
    });
  }

  // build-graph ----------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("build-graph", "Euclidean candidate graph over a vertex list");
    sub->add_option("--vertices", build_graph_opt.vertices, "Vertex JSON (nms output or graph JSON)")->required();
    sub->add_option("--d-nei", build_graph_opt.d_nei)->capture_default_str();
    sub->add_option("--out", build_graph_opt.out_path)->required();
    bind(sub, [&] {
      if (!(build_graph_opt.d_nei > 0.0)) throw ConfigError("d_nei must be positive");
      run.report.params = {{"vertices", build_graph_opt.vertices}, {"d_nei", build_graph_opt.d_nei}};
      const auto vs = run.stage("read", [&] { return read_vertices(build_graph_opt.vertices); });
      const RoadGraph gr = run.stage("build", [&] { return build_euclidean_graph(std::span<const Node>(vs), build_graph_opt.d_nei); });
      io::write_graph(gr, build_graph_opt.out_path);
      run.output(build_graph_opt.out_path);
      run.report.scores = {{"nodes", gr.node_count()}, {"edges", gr.edge_count()}};
    });
  }

  // linegraph ------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("linegraph", "Line graph of a road graph");
    sub->add_option("--graph", linegraph_opt.graph)->required();
    sub->add_option("--out", linegraph_opt.out_path)->required();
    bind(sub, [&] {
      run.report.params = {{"graph", linegraph_opt.graph}};
      const RoadGraph gr = run.stage("read", [&] { return io::read_graph(linegraph_opt.graph); });
      const LineGraphView lg = run.stage("linegraph", [&] { return line_graph(gr); });
      nlohmann::json nodes = nlohmann::json::array(), edges = nlohmann::json::array();
      for (const EdgeKey& e : lg.line_nodes) nodes.push_back({e.a, e.b});
      for (std::size_t i = 0; i < lg.size(); ++i) {
        for (std::size_t j : lg.line_adj[i]) {
          if (i < j) edges.push_back({i, j});
        }
      }
      io::write_json({{"line_nodes", std::move(nodes)}, {"line_edges", std::move(edges)}}, linegraph_opt.out_path);
      run.output(linegraph_opt.out_path);
      run.report.scores = {{"line_nodes", lg.size()}, {"line_edges", lg.edge_count()}};
    });
  }

  // count-special ----------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("count-special", "Count isolated triangle and 3-star components");
    sub->add_option("--graph", count_special_opt.graph)->required();
    bind(sub, [&] {
      run.report.params = {{"graph", count_special_opt.graph}};
      const RoadGraph gr = run.stage("read", [&] { return io::read_graph(count_special_opt.graph); });
      const auto c = run.stage("count", [&] { return count_special_components(gr); });
      run.report.scores = {{"k3", c.k3}, {"k13", c.k13}};
    });
  }

  // whitney-check ------------------------------------------------------------------
  bool whitney_failed = false;
  {
    auto* sub = app.add_subcommand("whitney-check", "Exhaustive line-graph isomorphism check on small graphs");
    sub->add_option("--max-nodes", whitney_check_opt.max_nodes)->capture_default_str()->check(CLI::Range(1, 7));
    bind(sub, [&] {
      run.report.params = {{"max_nodes", whitney_check_opt.max_nodes}};
      const auto rep = run.stage("whitney", [&] { return small::whitney_check(whitney_check_opt.max_nodes); });
      ojson pairs = ojson::array();
      for (const auto& [a, b] : rep.violations) pairs.push_back({small::describe(a), small::describe(b)});
      // The triangle / 3-star pair is the known exception, anything else fails.
      const bool ok = rep.violations.empty() || rep.only_k3_k13;
      whitney_failed = !ok;
      run.report.scores = {{"graphs_checked", rep.graphs_checked},
                           {"pairs_checked", rep.pairs_checked},
                           {"violations", std::move(pairs)},
                           {"only_exception_pair", rep.only_k3_k13},
                           {"passed", ok}};
    });
  }

  // extract --------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("extract", "Masks to road graph through NMS, candidates, scoring and fusion");
    sub->add_option("--road", extract_opt.road)->required();
    sub->add_option("--keypoint", extract_opt.keypoint)->required();
    sub->add_option("--overpass", extract_opt.overpass)->required();
    sub->add_option("--features", extract_opt.features, "Feature grid (FMAP) for the transformer scorer");
    sub->add_option("--weights", extract_opt.weights, "Model weights JSON for the transformer scorer");
    sub->add_option("--scorer", extract_opt.scorer)->check(CLI::IsMember({"mask", "transformer", "oracle"}))->capture_default_str();
    sub->add_option("--gt", extract_opt.gt, "Ground-truth graph for the oracle scorer");
    sub->add_option("--grid", extract_opt.ep.grid_n)->capture_default_str();
    sub->add_option("--window", extract_opt.ep.window)->capture_default_str();
    sub->add_option("--d-nei", extract_opt.ep.d_nei)->capture_default_str();
    sub->add_option("--threshold", extract_opt.ep.decision_threshold)->capture_default_str();
    sub->add_option("--t-k", extract_opt.ep.nms.t_k)->capture_default_str();
    sub->add_option("--t-r", extract_opt.ep.nms.t_r)->capture_default_str();
    sub->add_option("--d-k", extract_opt.ep.nms.d_k)->capture_default_str();
    sub->add_option("--d-r", extract_opt.ep.nms.d_r)->capture_default_str();
    sub->add_option("--n-samples", extract_opt.n_samples, "Samples per edge for the mask scorer")->capture_default_str();
    sub->add_option("--match-tol", extract_opt.match_tol, "Oracle scorer match tolerance")->capture_default_str();
    sub->add_option("--out", extract_opt.out_path)->required();
    bind(sub, [&] {
      run.report.params = {{"scorer", extract_opt.scorer}, {"grid", extract_opt.ep.grid_n}, {"window", extract_opt.ep.window}, {"d_nei", extract_opt.ep.d_nei},
                           {"threshold", extract_opt.ep.decision_threshold}, {"t_k", extract_opt.ep.nms.t_k}, {"t_r", extract_opt.ep.nms.t_r},
                           {"d_k", extract_opt.ep.nms.d_k}, {"d_r", extract_opt.ep.nms.d_r}};
      const MaskBundle b = run.stage("read", [&] { return read_bundle(extract_opt.road, extract_opt.keypoint, extract_opt.overpass); });
      EdgeScorer es{MaskScorerConfig{extract_opt.n_samples}};
      std::optional<FeatureGrid> fg;
      switch (scorer_kind_from_string(extract_opt.scorer)) {
        case ScorerKind::kOracle:
          if (extract_opt.gt.empty()) throw ConfigError("--scorer oracle requires --gt");
          es.payload = OracleScorerConfig{io::read_graph(extract_opt.gt), extract_opt.match_tol};
          run.report.params["match_tol"] = extract_opt.match_tol;
          break;
        case ScorerKind::kMask:
          run.report.params["n_samples"] = extract_opt.n_samples;
          break;
        case ScorerKind::kTransformer:
          if (extract_opt.features.empty() || extract_opt.weights.empty()) throw ConfigError("--scorer transformer requires --features and --weights");
          fg = io::read_features(extract_opt.features);
          es.payload = TransformerScorerConfig{model_from_json(io::read_json(extract_opt.weights)), {}, {}};
          break;
      }
      const ExtractResult r = extract_network(b, fg ? &*fg : nullptr, es, extract_opt.ep, &run.timer);
      run.stage("write", [&] {
        io::write_graph(r.graph, extract_opt.out_path);
        return 0;
      });
      run.output(extract_opt.out_path);
      run.report.scores = {{"vertices", r.vertices.size()}, {"candidates", r.candidate_count},
                           {"windows", r.window_count},  {"nodes", r.graph.node_count()},
                           {"edges", r.graph.edge_count()}};
    });
  }

  // synth ----------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("synth", "Synthetic scene: graph, blurred masks and stand-in features");
    sub->add_option("--seed", synth_opt.seed)->capture_default_str();
    sub->add_option("--size", synth_opt.size)->capture_default_str();
    sub->add_option("--style", synth_opt.style)->check(CLI::IsMember({"grid", "radial", "overpass"}))->capture_default_str();
    sub->add_option("--salt", synth_opt.salt, "Fraction of road-mask pixels forced to 1")->capture_default_str();
    sub->add_option("--out-dir", synth_opt.out_dir)->required();
    bind(sub, [&] {
      run.report.params = {{"seed", synth_opt.seed}, {"size", synth_opt.size}, {"style", synth_opt.style}, {"salt", synth_opt.salt}};
      SynthScene s = run.stage("synth", [&] { return synth_scene(synth_opt.seed, synth_opt.size, scene_style_from_string(synth_opt.style)); });
      if (synth_opt.salt > 0.0) s.bundle.road = add_salt(s.bundle.road, synth_opt.salt, synth_opt.seed);
      const fs::path dir(synth_opt.out_dir);
      run.stage("write", [&] {
        ensure_dir(dir);
        io::write_graph(s.gt, dir / "gt.json");
        run.output(dir / "gt.json");
        write_bundle(s.bundle, dir, run);
        io::write_features(s.features, dir / "features.fmap");
        run.output(dir / "features.fmap");
        return 0;
      });
      run.report.scores = {{"nodes", s.gt.node_count()}, {"edges", s.gt.edge_count()}};
    });
  }

  // eval -----------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("eval", "TOPO and APLS of a proposal graph against ground truth");
    sub->add_option("--gt", eval_opt.gt)->required();
    sub->add_option("--pred", eval_opt.pred)->required();
    sub->add_option("--metric", eval_opt.metric)->check(CLI::IsMember({"topo", "apls", "both"}))->capture_default_str();
    sub->add_option("--seed-interval", eval_opt.tp.seed_interval)->capture_default_str();
    sub->add_option("--propagation-dist", eval_opt.tp.propagation_dist)->capture_default_str();
    sub->add_option("--sample-interval", eval_opt.tp.sample_interval)->capture_default_str();
    sub->add_option("--match-radius", eval_opt.tp.match_radius)->capture_default_str();
    sub->add_option("--angle-threshold", eval_opt.tp.angle_threshold)->capture_default_str();
    sub->add_option("--control-interval", eval_opt.ap.control_interval)->capture_default_str();
    sub->add_option("--snap-radius", eval_opt.ap.snap_radius)->capture_default_str();
    sub->add_option("--report", eval_opt.report_path, "Write params, scores and per-seed diagnostics here");
    bind(sub, [&] {
      const RoadGraph a = run.stage("read", [&] { return io::read_graph(eval_opt.gt); });
      const RoadGraph b = io::read_graph(eval_opt.pred);
      ojson params = {{"metric", eval_opt.metric}};
      ojson scores = ojson::object();
      ojson diag = ojson::object();
      if (eval_opt.metric != "apls") {
        params["topo"] = {{"seed_interval", eval_opt.tp.seed_interval}, {"propagation_dist", eval_opt.tp.propagation_dist},
                          {"sample_interval", eval_opt.tp.sample_interval}, {"match_radius", eval_opt.tp.match_radius},
                          {"angle_threshold", eval_opt.tp.angle_threshold}};
        const TopoResult t = run.stage("topo", [&] { return topo(a, b, eval_opt.tp); });
        scores["topo"] = {{"precision", t.precision}, {"recall", t.recall}, {"f1", t.f1}};
        ojson seeds = ojson::array();
        for (const auto& s : t.seeds) {
          seeds.push_back({{"x", s.at.x}, {"y", s.at.y}, {"located", s.located}, {"gt_samples", s.gt_samples},
                           {"prop_samples", s.prop_samples}, {"matched", s.matched}});
        }
        diag["topo_seeds"] = std::move(seeds);
      }
      if (eval_opt.metric != "topo") {
        params["apls"] = {{"control_interval", eval_opt.ap.control_interval}, {"snap_radius", eval_opt.ap.snap_radius}};
        const AplsResult r = run.stage("apls", [&] { return apls(a, b, eval_opt.ap); });
        scores["apls"] = r.score;
        diag["apls"] = {{"gt_to_prop_cost", r.gt_to_prop}, {"prop_to_gt_cost", r.prop_to_gt},
                        {"gt_pairs", r.gt_pairs},          {"prop_pairs", r.prop_pairs},
                        {"gt_unsnapped", r.gt_unsnapped},  {"prop_unsnapped", r.prop_unsnapped}};
      }
      params["gt"] = eval_opt.gt;
      params["pred"] = eval_opt.pred;
      run.report.params = params;
      run.report.scores = scores;
      if (!eval_opt.report_path.empty()) {
        const ojson doc = {{"params", params}, {"scores", scores}, {"diagnostics", diag}};
        io::write_file(eval_opt.report_path, doc.dump(1) + "\n");
        run.output(eval_opt.report_path);
      }
    });
  }

  // render -----------------------------------------------------------------------
  {
    auto* sub = app.add_subcommand("render", "Draw a graph as SVG");
    sub->add_option("--graph", render_opt.graph)->required();
    sub->add_option("--out", render_opt.out_path)->required();
    sub->add_option("--width", render_opt.width, "Canvas width (default: fit the graph)");
    sub->add_option("--height", render_opt.height, "Canvas height (default: fit the graph)");
    sub->add_flag("--no-color", render_opt.plain, "Do not color edges by probability");
    bind(sub, [&] {
      run.report.params = {{"graph", render_opt.graph}, {"width", render_opt.width}, {"height", render_opt.height}, {"color", !render_opt.plain}};
      const RoadGraph gr = run.stage("read", [&] { return io::read_graph(render_opt.graph); });
      RenderOptions ro;
      ro.color_by_prob = !render_opt.plain;
      io::write_file(render_opt.out_path, render_svg(gr, render_opt.width, render_opt.height, ro));
      run.output(render_opt.out_path);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  set_thread_limit(g.threads);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    action();
    run.timer.record("total", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kConstraint;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConstraint;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConstraint;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kConstraint;
  } catch (const LayoutError& e) {
    err << "error: " << e.what() << "\n";
    return kConstraint;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }

  run.report.timings = run.timer.timings();
  if (g.json) {
    out << run.report.to_json().dump(1) << "\n";
  } else {
    print_summary(out, run.report);
  }
  if (whitney_failed) {
    err << "whitney-check: found line-graph collisions beyond the triangle / 3-star pair\n";
    return kConstraint;
  }
  return kOk;
}

}  // namespace roadgraph::cli
