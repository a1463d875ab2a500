#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "roadgraph/pipeline.hpp"

namespace roadgraph {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Red at 0 through yellow to green at 1.
std::string prob_color(double p) {
  p = std::clamp(p, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 * std::min(1.0, 2.0 * (1.0 - p))));
  const int g = static_cast<int>(std::lround(255.0 * std::min(1.0, 2.0 * p)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x00", r, g);
  return buf;
}

}  // namespace

std::string render_svg(const RoadGraph& g, int width, int height, const RenderOptions& opts) {
  double max_x = 0.0, max_y = 0.0;
  for (const Node& n : g.nodes()) {
    max_x = std::max(max_x, n.x);
    max_y = std::max(max_y, n.y);
  }
  const int w = width > 0 ? width : static_cast<int>(std::ceil(max_x + 2 * opts.node_radius)) + 1;
  const int h = height > 0 ? height : static_cast<int>(std::ceil(max_y + 2 * opts.node_radius)) + 1;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g stroke-width=\"" + num(opts.stroke_width) + "\" stroke-linecap=\"round\">\n";
  const auto& probs = g.edge_probs();
  for (std::size_t k = 0; k < g.edge_count(); ++k) {
    const Point a = g.position(g.edges()[k].a), b = g.position(g.edges()[k].b);
    const std::string color = opts.color_by_prob && probs ? prob_color((*probs)[k]) : "#1f4e9c";
    out += "<line x1=\"" + num(a.x) + "\" y1=\"" + num(a.y) + "\" x2=\"" + num(b.x) + "\" y2=\"" + num(b.y) +
           "\" stroke=\"" + color + "\"/>\n";
  }
  out += "</g>\n<g fill=\"#d62728\">\n";
  for (const Node& n : g.nodes()) {
    out += "<circle cx=\"" + num(n.x) + "\" cy=\"" + num(n.y) + "\" r=\"" + num(opts.node_radius) + "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace roadgraph
