#include "roadgraph/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "roadgraph/error.hpp"

namespace roadgraph::io {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number for the message.
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

void write_json(const json& j, const std::filesystem::path& path) { write_file(path, j.dump(1) + "\n"); }

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + "." + key + ": wrong type");
  }
}

}  // namespace

RoadGraph graph_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("graph: top level must be an object");
  if (!j.contains("nodes") || !j.at("nodes").is_array()) throw ParseError("graph: 'nodes' must be an array");
  std::vector<Node> nodes;
  const auto& jn = j.at("nodes");
  nodes.reserve(jn.size());
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    nodes.push_back(Node{field<NodeId>(jn[i], "id", where), field<double>(jn[i], "x", where),
                         field<double>(jn[i], "y", where)});
  }
  std::vector<EdgeKey> edges;
  if (j.contains("edges")) {
    const auto& je = j.at("edges");
    if (!je.is_array()) throw ParseError("graph: 'edges' must be an array");
    edges.reserve(je.size());
    for (std::size_t i = 0; i < je.size(); ++i) {
      if (!je[i].is_array() || je[i].size() != 2 || !je[i][0].is_number_integer() ||
          !je[i][1].is_number_integer()) {
        throw ParseError("edges[" + std::to_string(i) + "]: expected [id, id]");
      }
      edges.push_back(EdgeKey{je[i][0].get<NodeId>(), je[i][1].get<NodeId>()});
    }
  }
  std::optional<std::vector<double>> probs;
  if (j.contains("edge_probs") && !j.at("edge_probs").is_null()) {
    try {
      probs = j.at("edge_probs").get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ParseError("edge_probs: expected an array of numbers");
    }
  }
  return RoadGraph(std::move(nodes), std::move(edges), std::move(probs));
}

RoadGraph read_graph(const std::filesystem::path& path) {
  const json j = read_json(path);
  try {
    return graph_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

json graph_to_json(const RoadGraph& g) {
  json nodes = json::array();
  for (const Node& n : g.nodes()) nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  json edges = json::array();
  for (const EdgeKey& e : g.edges()) edges.push_back({e.a, e.b});
  json out = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  if (g.edge_probs()) out["edge_probs"] = *g.edge_probs();
  return out;
}

void write_graph(const RoadGraph& g, const std::filesystem::path& path) { write_json(graph_to_json(g), path); }

// ---------------------------------------------------------------------------
// PGM

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long next_int(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (start == pos_) throw FormatError(std::string("PGM: missing ") + what);
    if (pos_ - start > 9) throw FormatError(std::string("PGM: ") + what + " too large");
    return std::stol(bytes_.substr(start, pos_ - start));
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ProbGrid decode_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("PGM: expected magic 'P5'");
  HeaderReader r(bytes);
  r.advance(2);
  const long w = r.next_int("width");
  const long h = r.next_int("height");
  const long maxval = r.next_int("maxval");
  if (maxval != 255) throw FormatError("PGM: maxval must be 255, got " + std::to_string(maxval));
  // Exactly one whitespace byte separates the header from the raster.
  if (r.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[r.pos()]))) {
    throw FormatError("PGM: truncated header");
  }
  r.advance(1);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - r.pos() < n) {
    throw FormatError("PGM: truncated payload (" + std::to_string(bytes.size() - r.pos()) + " of " +
                      std::to_string(n) + " bytes)");
  }
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = static_cast<float>(static_cast<unsigned char>(bytes[r.pos() + i])) / 255.0f;
  }
  return ProbGrid(static_cast<int>(h), static_cast<int>(w), std::move(values));
}

std::string encode_pgm(const ProbGrid& grid) {
  std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + grid.size());
  const auto vals = grid.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const long q = std::lround(static_cast<double>(vals[i]) * 255.0);
    out[header + i] = static_cast<char>(static_cast<unsigned char>(std::clamp(q, 0L, 255L)));
  }
  return out;
}

ProbGrid read_grid(const std::filesystem::path& path) {
  try {
    return decode_pgm(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_grid(const ProbGrid& grid, const std::filesystem::path& path) { write_file(path, encode_pgm(grid)); }

// ---------------------------------------------------------------------------
// FMAP

namespace {

std::uint32_t load_u32_le(const char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

void store_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

FeatureGrid decode_features(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "FMAP", 4) != 0) {
    throw FormatError("FMAP: magic mismatch");
  }
  const std::uint32_t gh = load_u32_le(bytes.data() + 4);
  const std::uint32_t gw = load_u32_le(bytes.data() + 8);
  const std::uint32_t depth = load_u32_le(bytes.data() + 12);
  const std::uint64_t n = static_cast<std::uint64_t>(gh) * gw * depth;
  if (bytes.size() - 16 != n * 4) {
    throw FormatError("FMAP: size mismatch (header declares " + std::to_string(n) + " floats, payload has " +
                      std::to_string((bytes.size() - 16) / 4) + ")");
  }
  std::vector<float> values(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    values[i] = std::bit_cast<float>(load_u32_le(bytes.data() + 16 + 4 * i));
  }
  return FeatureGrid(static_cast<int>(gh), static_cast<int>(gw), static_cast<int>(depth), std::move(values));
}

std::string encode_features(const FeatureGrid& f) {
  std::string out = "FMAP";
  store_u32_le(out, static_cast<std::uint32_t>(f.gh()));
  store_u32_le(out, static_cast<std::uint32_t>(f.gw()));
  store_u32_le(out, static_cast<std::uint32_t>(f.depth()));
  out.reserve(out.size() + 4 * f.values().size());
  for (float v : f.values()) store_u32_le(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureGrid read_features(const std::filesystem::path& path) {
  try {
    return decode_features(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_features(const FeatureGrid& f, const std::filesystem::path& path) {
  write_file(path, encode_features(f));
}

// ---------------------------------------------------------------------------
// Candidate sets

json candidates_to_json(const CandidateSet& c) {
  json verts = json::array();
  for (const Node& v : c.vertices) verts.push_back({{"id", v.id}, {"x", v.x}, {"y", v.y}});
  json pairs = json::array();
  for (const EdgeKey& e : c.pairs) pairs.push_back({e.a, e.b});
  json out = {{"vertices", std::move(verts)}, {"pairs", std::move(pairs)}};
  if (c.labels) out["labels"] = *c.labels;
  if (c.probs) out["probs"] = *c.probs;
  return out;
}

CandidateSet candidates_from_json(const json& j) {
  CandidateSet c;
  if (!j.is_object() || !j.contains("vertices") || !j.contains("pairs")) {
    throw ParseError("candidates: expected 'vertices' and 'pairs'");
  }
  const auto& jv = j.at("vertices");
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const std::string where = "vertices[" + std::to_string(i) + "]";
    c.vertices.push_back(
        Node{field<NodeId>(jv[i], "id", where), field<double>(jv[i], "x", where), field<double>(jv[i], "y", where)});
  }
  for (const auto& p : j.at("pairs")) {
    if (!p.is_array() || p.size() != 2) throw ParseError("candidates: pair must be [id, id]");
    c.pairs.push_back(EdgeKey::make(p[0].get<NodeId>(), p[1].get<NodeId>()));
  }
  if (j.contains("labels")) c.labels = j.at("labels").get<std::vector<int>>();
  if (j.contains("probs")) c.probs = j.at("probs").get<std::vector<double>>();
  return c;
}

}  // namespace roadgraph::io
