#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "roadgraph/cli.hpp"

namespace fs = std::filesystem;
using roadgraph::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "roadgraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("roadgraph_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(call({"--help"}).code == 0);
  CHECK(call({"synth", "--help"}).code == 0);
  CHECK(call({}).code == 2);
  CHECK(call({"synth", "--bogus", "1"}).code == 2);
  CHECK(call({"synth", "--style", "maze", "--out-dir", "x"}).code == 2);
  CHECK(call({"whitney-check", "--max-nodes", "12"}).code == 2);
}

TEST_CASE("missing input file names the path") {
  const Result r = call({"count-special", "--graph", "/nonexistent/dir/g.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/dir/g.json") != std::string::npos);
}

TEST_CASE("constraint failures exit with 3") {
  const fs::path d = scratch("constraint");
  std::ofstream(d / "dangling.json") << R"({"nodes":[{"id":0,"x":0,"y":0}],"edges":[[0,5]]})";
  CHECK(call({"count-special", "--graph", (d / "dangling.json").string()}).code == 3);

  REQUIRE(call({"synth", "--seed", "2", "--size", "256", "--out-dir", d.string()}).code == 0);
  const Result r = call({"extract", "--road", (d / "road.pgm").string(), "--keypoint", (d / "keypoint.pgm").string(),
                         "--overpass", (d / "overpass.pgm").string(), "--window", "300", "--out",
                         (d / "pred.json").string()});
  CHECK(r.code == 0);  // the window is clamped to the canvas
  const Result bad = call({"extract", "--road", (d / "road.pgm").string(), "--keypoint",
                           (d / "keypoint.pgm").string(), "--overpass", (d / "overpass.pgm").string(), "--threshold",
                           "1.5", "--out", (d / "pred.json").string()});
  CHECK(bad.code == 3);
  const Result tr = call({"extract", "--road", (d / "road.pgm").string(), "--keypoint", (d / "keypoint.pgm").string(),
                          "--overpass", (d / "overpass.pgm").string(), "--scorer", "transformer", "--out",
                          (d / "pred.json").string()});
  CHECK(tr.code == 3);
}

TEST_CASE("synth, extract and eval chain") {
  const fs::path d = scratch("chain");
  const std::string dir = d.string();
  REQUIRE(call({"synth", "--seed", "7", "--size", "512", "--out-dir", dir}).code == 0);
  for (const char* f : {"gt.json", "road.pgm", "keypoint.pgm", "overpass.pgm", "features.fmap"}) {
    CHECK(fs::exists(d / f));
  }
  const std::vector<std::string> extract = {"extract",     "--road",      dir + "/road.pgm", "--keypoint",
                                            dir + "/keypoint.pgm", "--overpass", dir + "/overpass.pgm",
                                            "--scorer",    "oracle",      "--gt",            dir + "/gt.json",
                                            "--out",       dir + "/pred.json"};
  REQUIRE(call(extract).code == 0);
  const std::string first = slurp(d / "pred.json");

  const Result ev = call({"--json", "eval", "--gt", dir + "/gt.json", "--pred", dir + "/pred.json", "--report",
                          dir + "/report.json"});
  REQUIRE(ev.code == 0);
  const auto j = nlohmann::json::parse(ev.out);
  CHECK(j["command"] == "eval");
  CHECK(j["scores"]["apls"].get<double>() >= 0.95);
  CHECK(j["scores"]["topo"]["f1"].get<double>() > 0.5);
  CHECK(fs::exists(d / "report.json"));

  // Reruns write byte-identical files.
  REQUIRE(call(extract).code == 0);
  CHECK(slurp(d / "pred.json") == first);
  const std::string gt = slurp(d / "gt.json");
  REQUIRE(call({"synth", "--seed", "7", "--size", "512", "--out-dir", dir}).code == 0);
  CHECK(slurp(d / "gt.json") == gt);

  const Result plain = call({"eval", "--gt", dir + "/gt.json", "--pred", dir + "/gt.json", "--metric", "apls"});
  CHECK(plain.code == 0);
  CHECK(plain.out.rfind("eval: ok", 0) == 0);
}

TEST_CASE("graph utilities") {
  const fs::path d = scratch("utils");
  std::ofstream(d / "tri.json") << R"({"nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":10,"y":0},{"id":2,"x":0,"y":10}],
                                     "edges":[[0,1],[1,2],[0,2]]})";
  const Result c = call({"--json", "count-special", "--graph", (d / "tri.json").string()});
  REQUIRE(c.code == 0);
  const auto j = nlohmann::json::parse(c.out);
  CHECK(j["scores"]["k3"] == 1);
  CHECK(j["scores"]["k13"] == 0);

  CHECK(call({"linegraph", "--graph", (d / "tri.json").string(), "--out", (d / "lg.json").string()}).code == 0);
  CHECK(call({"render", "--graph", (d / "tri.json").string(), "--out", (d / "tri.svg").string()}).code == 0);
  CHECK(slurp(d / "tri.svg").find("<svg") != std::string::npos);
  CHECK(call({"whitney-check", "--max-nodes", "4"}).code == 0);
}
