#include "roadgraph/small_graph.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <sstream>

#include "roadgraph/error.hpp"

namespace roadgraph::small {

SmallGraph::SmallGraph(std::size_t n) : adj_(n, 0U) {
  if (n > kMaxNodes) throw CapacityError("small graph limited to " + std::to_string(kMaxNodes) + " nodes");
}

void SmallGraph::add_edge(std::size_t u, std::size_t v) {
  if (u == v) return;
  adj_[u] |= 1U << v;
  adj_[v] |= 1U << u;
}

int SmallGraph::degree(std::size_t u) const { return std::popcount(adj_[u]); }

std::size_t SmallGraph::edge_count() const {
  std::size_t twice = 0;
  for (std::uint32_t r : adj_) twice += static_cast<std::size_t>(std::popcount(r));
  return twice / 2;
}

bool SmallGraph::connected() const {
  if (adj_.empty()) return true;
  std::uint32_t seen = 1U, frontier = 1U;
  while (frontier) {
    std::uint32_t next = 0;
    for (std::uint32_t f = frontier; f; f &= f - 1) next |= adj_[static_cast<std::size_t>(std::countr_zero(f))];
    frontier = next & ~seen;
    seen |= next;
  }
  return std::popcount(seen) == static_cast<int>(adj_.size());
}

std::vector<std::pair<std::size_t, std::size_t>> SmallGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < size(); ++u) {
    for (std::size_t v = u + 1; v < size(); ++v) {
      if (adjacent(u, v)) out.emplace_back(u, v);
    }
  }
  return out;
}

SmallGraph from_road_graph(const RoadGraph& g, std::size_t cap) {
  if (g.node_count() > cap) {
    throw CapacityError("exhaustive search capped at " + std::to_string(cap) + " nodes, graph has " +
                        std::to_string(g.node_count()));
  }
  std::vector<NodeId> ids;
  for (const Node& n : g.nodes()) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  auto rank = [&](NodeId id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  SmallGraph s(ids.size());
  for (const EdgeKey& e : g.edges()) s.add_edge(rank(e.a), rank(e.b));
  return s;
}

SmallGraph line_graph(const SmallGraph& g) {
  const auto es = g.edges();
  SmallGraph lg(es.size());
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = i + 1; j < es.size(); ++j) {
      const auto [a, b] = es[i];
      const auto [c, d] = es[j];
      if (a == c || a == d || b == c || b == d) lg.add_edge(i, j);
    }
  }
  return lg;
}

namespace {

// Backtracking search for bijections a -> b preserving adjacency, with the
// image of node i restricted to the bitmask allowed[i]. Calls on_found for
// each complete mapping; stops early when on_found returns false.
class MappingSearch {
 public:
  MappingSearch(const SmallGraph& a, const SmallGraph& b, std::vector<std::uint32_t> allowed)
      : a_(a), b_(b), allowed_(std::move(allowed)), image_(a.size(), 0) {
    const std::size_t n = a.size();
    // Most constrained first, then nodes with the most links to placed nodes.
    std::vector<char> placed(n, 0);
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t best = n;
      std::tuple<int, int, int> best_key{0, 0, 0};
      for (std::size_t v = 0; v < n; ++v) {
        if (placed[v]) continue;
        int links = 0;
        for (std::size_t u : order_) links += a.adjacent(u, v) ? 1 : 0;
        const std::tuple<int, int, int> key{-std::popcount(allowed_[v]), links, -static_cast<int>(v)};
        if (best == n || key > best_key) {
          best = v;
          best_key = key;
        }
      }
      placed[best] = 1;
      order_.push_back(best);
    }
  }

  void run(const std::function<bool(const std::vector<std::size_t>&)>& on_found) {
    on_found_ = &on_found;
    stop_ = false;
    if (a_.size() != b_.size()) return;
    recurse(0, 0U);
  }

 private:
  void recurse(std::size_t depth, std::uint32_t used) {
    if (stop_) return;
    if (depth == order_.size()) {
      if (!(*on_found_)(image_)) stop_ = true;
      return;
    }
    const std::size_t v = order_[depth];
    const int deg = a_.degree(v);
    for (std::uint32_t cand = allowed_[v] & ~used; cand; cand &= cand - 1) {
      const auto w = static_cast<std::size_t>(std::countr_zero(cand));
      if (b_.degree(w) != deg) continue;
      bool ok = true;
      for (std::size_t k = 0; k < depth && ok; ++k) {
        const std::size_t u = order_[k];
        ok = a_.adjacent(u, v) == b_.adjacent(image_[u], w);
      }
      if (!ok) continue;
      image_[v] = w;
      recurse(depth + 1, used | (1U << w));
      if (stop_) return;
    }
  }

  const SmallGraph& a_;
  const SmallGraph& b_;
  std::vector<std::uint32_t> allowed_;
  std::vector<std::size_t> image_;
  std::vector<std::size_t> order_;
  const std::function<bool(const std::vector<std::size_t>&)>* on_found_ = nullptr;
  bool stop_ = false;
};

std::uint32_t all_mask(std::size_t n) { return n >= 32 ? 0xFFFFFFFFU : ((1U << n) - 1U); }

bool exists_mapping(const SmallGraph& a, const SmallGraph& b, std::vector<std::uint32_t> allowed) {
  bool found = false;
  MappingSearch search(a, b, std::move(allowed));
  search.run([&](const std::vector<std::size_t>&) {
    found = true;
    return false;
  });
  return found;
}

std::vector<int> degree_sequence(const SmallGraph& g) {
  std::vector<int> d;
  for (std::size_t v = 0; v < g.size(); ++v) d.push_back(g.degree(v));
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

bool isomorphic(const SmallGraph& a, const SmallGraph& b) {
  if (a.size() != b.size() || a.edge_count() != b.edge_count()) return false;
  if (degree_sequence(a) != degree_sequence(b)) return false;
  return exists_mapping(a, b, std::vector<std::uint32_t>(a.size(), all_mask(a.size())));
}

bool set_isomorphic(const SmallGraph& g, std::uint32_t from, std::uint32_t to) {
  if (std::popcount(from) != std::popcount(to)) return false;
  const std::uint32_t all = all_mask(g.size());
  std::vector<std::uint32_t> allowed(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) allowed[v] = ((from >> v) & 1U) ? to : (all & ~to);
  return exists_mapping(g, g, std::move(allowed));
}

std::vector<std::size_t> orbits(const SmallGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> color(n);
  for (std::size_t i = 0; i < n; ++i) color[i] = i;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (color[i] != i) continue;  // only test against orbit representatives
      std::vector<std::uint32_t> allowed(n, all_mask(n));
      allowed[i] = 1U << j;
      if (exists_mapping(g, g, std::move(allowed))) {
        color[j] = i;
        break;
      }
    }
  }
  return color;
}

std::uint64_t automorphism_count(const SmallGraph& g) {
  std::uint64_t count = 0;
  MappingSearch search(g, g, std::vector<std::uint32_t>(g.size(), all_mask(g.size())));
  search.run([&](const std::vector<std::size_t>&) {
    ++count;
    return true;
  });
  return count;
}

std::vector<SmallGraph> connected_graph_classes(std::size_t max_n) {
  std::vector<SmallGraph> classes;
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) slots.emplace_back(u, v);
    }
    std::map<std::pair<std::size_t, std::vector<int>>, std::vector<std::size_t>> buckets;
    std::vector<SmallGraph> found;
    const std::uint64_t limit = 1ULL << slots.size();
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
      SmallGraph g(n);
      for (std::size_t k = 0; k < slots.size(); ++k) {
        if ((mask >> k) & 1U) g.add_edge(slots[k].first, slots[k].second);
      }
      if (!g.connected()) continue;
      auto& bucket = buckets[{g.edge_count(), degree_sequence(g)}];
      const bool seen = std::any_of(bucket.begin(), bucket.end(),
                                    [&](std::size_t idx) { return isomorphic(found[idx], g); });
      if (seen) continue;
      bucket.push_back(found.size());
      found.push_back(std::move(g));
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const SmallGraph& l, const SmallGraph& r) { return l.edge_count() < r.edge_count(); });
    for (auto& g : found) classes.push_back(std::move(g));
  }
  return classes;
}

SmallGraph complete(std::size_t n) {
  SmallGraph g(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) g.add_edge(u, v);
  }
  return g;
}

SmallGraph star(std::size_t leaves) {
  SmallGraph g(leaves + 1);
  for (std::size_t v = 1; v <= leaves; ++v) g.add_edge(0, v);
  return g;
}

SmallGraph path(std::size_t n) {
  SmallGraph g(n);
  for (std::size_t v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

SmallGraph cycle(std::size_t n) {
  SmallGraph g = path(n);
  if (n > 2) g.add_edge(n - 1, 0);
  return g;
}

SmallGraph triangular_prism() {
  // Triangles {0,1,2} and {3,4,5}; rungs i -- i+3.
  SmallGraph g(6);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  g.add_edge(3, 4);
  g.add_edge(4, 5);
  g.add_edge(5, 3);
  for (std::size_t i = 0; i < 3; ++i) g.add_edge(i, i + 3);
  return g;
}

namespace {

std::pair<SmallGraph, std::vector<NodeId>> indexed(const RoadGraph& g) {
  std::vector<NodeId> ids;
  for (const Node& n : g.nodes()) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  return {from_road_graph(g, kOracleNodeCap), ids};
}

std::uint32_t to_mask(const std::vector<NodeId>& ids, const std::vector<NodeId>& set) {
  std::uint32_t m = 0;
  for (NodeId id : set) {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw ValidationError("node set references unknown id " + std::to_string(id));
    m |= 1U << static_cast<unsigned>(it - ids.begin());
  }
  return m;
}

}  // namespace

bool set_isomorphic(const RoadGraph& g, const std::vector<NodeId>& s, const std::vector<NodeId>& s2) {
  const auto [sg, ids] = indexed(g);
  const std::uint32_t a = to_mask(ids, s), b = to_mask(ids, s2);
  if (std::popcount(a) != std::popcount(b)) throw ValidationError("set_isomorphic: sets differ in size");
  return set_isomorphic(sg, a, b);
}

std::unordered_map<NodeId, NodeId> orbit_colors(const RoadGraph& g) {
  const auto [sg, ids] = indexed(g);
  const auto col = orbits(sg);
  std::unordered_map<NodeId, NodeId> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = ids[col[i]];
  return out;
}

WhitneyReport whitney_check(std::size_t max_n) {
  WhitneyReport rep;
  const auto classes = connected_graph_classes(max_n);
  rep.graphs_checked = classes.size();
  std::vector<SmallGraph> lines;
  for (const auto& g : classes) lines.push_back(line_graph(g));
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      ++rep.pairs_checked;
      if (isomorphic(lines[i], lines[j])) rep.violations.emplace_back(classes[i], classes[j]);
    }
  }
  if (rep.violations.size() == 1) {
    const auto& [g1, g2] = rep.violations.front();
    const SmallGraph k3 = complete(3), k13 = star(3);
    rep.only_k3_k13 = (isomorphic(g1, k3) && isomorphic(g2, k13)) || (isomorphic(g1, k13) && isomorphic(g2, k3));
  }
  return rep;
}

EdgeOrbitReport edge_orbit_check(std::size_t max_n) {
  EdgeOrbitReport rep;
  const SmallGraph k3 = complete(3), k13 = star(3);
  for (const auto& g : connected_graph_classes(max_n)) {
    if (g.edge_count() == 0 || isomorphic(g, k3) || isomorphic(g, k13)) continue;
    ++rep.graphs_checked;
    const auto es = g.edges();
    const auto col = orbits(line_graph(g));
    bool bad = false;
    for (std::size_t k = 0; k < es.size(); ++k) {
      for (std::size_t l = k + 1; l < es.size(); ++l) {
        ++rep.edge_pairs_checked;
        const std::uint32_t a = (1U << es[k].first) | (1U << es[k].second);
        const std::uint32_t b = (1U << es[l].first) | (1U << es[l].second);
        if ((col[k] == col[l]) != set_isomorphic(g, a, b)) bad = true;
      }
    }
    if (bad) rep.mismatches.push_back(g);
  }
  return rep;
}

std::string describe(const SmallGraph& g) {
  std::ostringstream ss;
  ss << "n=" << g.size() << " edges=[";
  bool first = true;
  for (const auto& [u, v] : g.edges()) {
    ss << (first ? "" : ",") << u << "-" << v;
    first = false;
  }
  ss << "]";
  return ss.str();
}

}  // namespace roadgraph::small
