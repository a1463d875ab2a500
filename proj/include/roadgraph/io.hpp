#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "roadgraph/types.hpp"

namespace roadgraph::io {

// Graph JSON:
//   {"nodes":[{"id":0,"x":1.5,"y":2.5},...],"edges":[[0,1],...],"edge_probs":[...]}
// edge_probs is optional. Unknown top-level keys are ignored.
RoadGraph read_graph(const std::filesystem::path& path);
RoadGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const RoadGraph& g);
void write_graph(const RoadGraph& g, const std::filesystem::path& path);

// Binary PGM (P5, maxval 255); value v maps to v/255.
ProbGrid read_grid(const std::filesystem::path& path);
void write_grid(const ProbGrid& grid, const std::filesystem::path& path);
// Quantizes each value to round(v * 255).
std::string encode_pgm(const ProbGrid& grid);
ProbGrid decode_pgm(const std::string& bytes);

// "FMAP" magic, u32 gh/gw/depth little-endian, then f32 little-endian values.
FeatureGrid read_features(const std::filesystem::path& path);
void write_features(const FeatureGrid& f, const std::filesystem::path& path);
FeatureGrid decode_features(const std::string& bytes);
std::string encode_features(const FeatureGrid& f);

// {"vertices":[{"id","x","y"}],"pairs":[[a,b]],"labels":[..],"probs":[..]}
nlohmann::json candidates_to_json(const CandidateSet& c);
CandidateSet candidates_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace roadgraph::io
