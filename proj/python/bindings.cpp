// Python bindings. Graphs cross the boundary as the same dicts the JSON
// files use; masks as 2-D float32 arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "roadgraph/error.hpp"
#include "roadgraph/graphs.hpp"
#include "roadgraph/gtprep.hpp"
#include "roadgraph/io.hpp"
#include "roadgraph/metrics.hpp"
#include "roadgraph/nms.hpp"
#include "roadgraph/pipeline.hpp"
#include "roadgraph/small_graph.hpp"

namespace py = pybind11;
using namespace roadgraph;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

RoadGraph graph_arg(const py::object& o) { return io::graph_from_json(from_py(o)); }

py::object graph_out(const RoadGraph& g) { return to_py(io::graph_to_json(g)); }

ProbGrid grid_arg(const FloatArray& a) {
  if (a.ndim() != 2) throw ValidationError("mask must be a 2-D array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return ProbGrid(h, w, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray grid_out(const ProbGrid& g) {
  FloatArray a({g.height(), g.width()});
  std::copy(g.values().begin(), g.values().end(), a.mutable_data());
  return a;
}

MaskBundle bundle_arg(const FloatArray& road, const FloatArray& keypoint, const FloatArray& overpass) {
  MaskBundle b{grid_arg(road), grid_arg(keypoint), grid_arg(overpass)};
  b.validate();
  return b;
}

const char* source_name(VertexSource s) {
  switch (s) {
    case VertexSource::kKeypoint: return "keypoint";
    case VertexSource::kOverpass: return "overpass";
    case VertexSource::kRoad: return "road";
  }
  return "?";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Road-network graph extraction from probability masks";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<LayoutError>(m, "LayoutError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_ValueError);

  m.def("synth_scene", [](std::uint64_t seed, int size, const std::string& style, double salt) {
    SynthScene s = synth_scene(seed, size, scene_style_from_string(style));
    if (salt > 0.0) s.bundle.road = add_salt(s.bundle.road, salt, seed);
    py::dict d;
    d["gt"] = graph_out(s.gt);
    d["road"] = grid_out(s.bundle.road);
    d["keypoint"] = grid_out(s.bundle.keypoint);
    d["overpass"] = grid_out(s.bundle.overpass);
    return d;
  }, py::arg("seed") = 7, py::arg("size") = 512, py::arg("style") = "grid", py::arg("salt") = 0.0);

  m.def("coupled_nms", [](const FloatArray& road, const FloatArray& keypoint, const FloatArray& overpass, double t_k,
                          double t_r, double d_k, double d_r) {
    const auto vs = coupled_nms(bundle_arg(road, keypoint, overpass), {t_k, t_r, d_k, d_r});
    py::list out;
    for (const auto& v : vs) out.append(py::make_tuple(v.x, v.y, v.score, source_name(v.source)));
    return out;
  }, py::arg("road"), py::arg("keypoint"), py::arg("overpass"), py::arg("t_k") = 0.5, py::arg("t_r") = 0.5,
     py::arg("d_k") = 8.0, py::arg("d_r") = 16.0);

  m.def("extract", [](const FloatArray& road, const FloatArray& keypoint, const FloatArray& overpass,
                      const std::string& scorer, const py::object& gt, double threshold, int window, int grid,
                      double d_nei) {
    ExtractParams p;
    p.decision_threshold = threshold;
    p.window = window;
    p.grid_n = grid;
    p.d_nei = d_nei;
    EdgeScorer s{MaskScorerConfig{}};
    if (scorer == "oracle") {
      if (gt.is_none()) throw ConfigError("oracle scorer needs a ground-truth graph");
      s = EdgeScorer{OracleScorerConfig{graph_arg(gt), 8.0}};
    } else if (scorer != "mask") {
      throw ConfigError("scorer must be 'mask' or 'oracle'");
    }
    const ExtractResult r = extract_network(bundle_arg(road, keypoint, overpass), nullptr, s, p);
    return graph_out(r.graph);
  }, py::arg("road"), py::arg("keypoint"), py::arg("overpass"), py::arg("scorer") = "mask", py::arg("gt") = py::none(),
     py::arg("threshold") = 0.5, py::arg("window") = 512, py::arg("grid") = 5, py::arg("d_nei") = 64.0);

  m.def("topo", [](const py::object& gt, const py::object& pred, double match_radius) {
    TopoParams p;
    p.match_radius = match_radius;
    const TopoResult r = topo(graph_arg(gt), graph_arg(pred), p);
    py::dict d;
    d["precision"] = r.precision;
    d["recall"] = r.recall;
    d["f1"] = r.f1;
    return d;
  }, py::arg("gt"), py::arg("pred"), py::arg("match_radius") = 8.0);

  m.def("apls", [](const py::object& gt, const py::object& pred) { return apls(graph_arg(gt), graph_arg(pred)).score; },
        py::arg("gt"), py::arg("pred"));

  m.def("detect_keypoints", [](const py::object& g) { return detect_keypoints(graph_arg(g)); }, py::arg("graph"));

  m.def("euclidean_graph", [](const py::object& g, double d_nei) {
    const RoadGraph in = graph_arg(g);
    return graph_out(build_euclidean_graph(std::span<const Node>(in.nodes()), d_nei));
  }, py::arg("graph"), py::arg("d_nei") = 64.0);

  m.def("line_graph", [](const py::object& g) {
    const LineGraphView lg = line_graph(graph_arg(g));
    std::vector<std::pair<NodeId, NodeId>> nodes;
    for (const EdgeKey& e : lg.line_nodes) nodes.emplace_back(e.a, e.b);
    return py::make_tuple(nodes, lg.line_adj);
  }, py::arg("graph"));

  m.def("count_special_components", [](const py::object& g) {
    const auto c = count_special_components(graph_arg(g));
    return py::make_tuple(c.k3, c.k13);
  }, py::arg("graph"));

  m.def("gap_bound", [](double d_k, double d_r, double d1, double d2, double d3, double d4) {
    return gap_bound({d_k, d_r, d1, d2, d3, d4});
  }, py::arg("d_k"), py::arg("d_r"), py::arg("delta1") = 0.0, py::arg("delta2") = 0.0, py::arg("delta3") = 0.0,
     py::arg("delta4") = 0.0);

  m.def("plan_windows", [](int h, int w, int window, int grid, double d_nei) {
    return plan_windows(h, w, window, grid, d_nei).offsets();
  }, py::arg("height"), py::arg("width"), py::arg("window") = 512, py::arg("grid") = 5, py::arg("d_nei") = 64.0);

  m.def("whitney_check", [](std::size_t max_nodes) {
    const auto r = small::whitney_check(max_nodes);
    py::dict d;
    d["graphs_checked"] = r.graphs_checked;
    d["violations"] = r.violations.size();
    d["only_k3_k13"] = r.only_k3_k13;
    return d;
  }, py::arg("max_nodes") = 6);
}
