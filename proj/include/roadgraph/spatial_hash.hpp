#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "roadgraph/types.hpp"

namespace roadgraph {

// Uniform bucket grid over points. Cell size equals the typical query radius
// so a radius query touches at most 3x3 cells.
class SpatialHash {
 public:
  explicit SpatialHash(double cell) : cell_(cell > 0.0 ? cell : 1.0) {}

  void insert(Point p, std::size_t payload) {
    buckets_[key(cell_of(p.x), cell_of(p.y))].push_back({p, payload});
  }

  // Calls fn(payload, point) for every stored point with |p - q| < radius
  // (strict) or <= radius (inclusive).
  template <typename Fn>
  void for_each_within(Point q, double radius, bool inclusive, Fn&& fn) const {
    const std::int64_t r = static_cast<std::int64_t>(std::ceil(radius / cell_));
    const std::int64_t cx = cell_of(q.x), cy = cell_of(q.y);
    const double r2 = radius * radius;
    for (std::int64_t dy = -r; dy <= r; ++dy) {
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        const auto it = buckets_.find(key(cx + dx, cy + dy));
        if (it == buckets_.end()) continue;
        for (const Entry& e : it->second) {
          const double ex = e.p.x - q.x, ey = e.p.y - q.y;
          const double d2 = ex * ex + ey * ey;
          if (inclusive ? d2 <= r2 : d2 < r2) fn(e.payload, e.p);
        }
      }
    }
  }

  bool any_within(Point q, double radius, bool inclusive) const {
    const std::int64_t r = static_cast<std::int64_t>(std::ceil(radius / cell_));
    const std::int64_t cx = cell_of(q.x), cy = cell_of(q.y);
    const double r2 = radius * radius;
    for (std::int64_t dy = -r; dy <= r; ++dy) {
      for (std::int64_t dx = -r; dx <= r; ++dx) {
        const auto it = buckets_.find(key(cx + dx, cy + dy));
        if (it == buckets_.end()) continue;
        for (const Entry& e : it->second) {
          const double ex = e.p.x - q.x, ey = e.p.y - q.y;
          const double d2 = ex * ex + ey * ey;
          if (inclusive ? d2 <= r2 : d2 < r2) return true;
        }
      }
    }
    return false;
  }

 private:
  struct Entry {
    Point p;
    std::size_t payload;
  };

  std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
  static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) ^ (static_cast<std::uint64_t>(cy) & 0xFFFFFFFFULL);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> buckets_;
};

}  // namespace roadgraph
