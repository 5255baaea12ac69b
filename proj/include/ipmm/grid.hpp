#ifndef IPMM_GRID_HPP
#define IPMM_GRID_HPP

/* Uniform bucket grid over points, used for disk queries against mesh
 * vertices and the background (removed-vertex) list.  Buckets are hashed, so
 * the domain needs no declared bounds. */

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ipmm/geom.hpp"

namespace ipmm {

class PointGrid {
 public:
  PointGrid() = default;
  explicit PointGrid(double cell_size) { reset(cell_size); }

  void reset(double cell_size) {
    if (!(cell_size > 0.0)) throw Error("PointGrid: cell size must be positive");
    cell_ = cell_size;
    buckets_.clear();
    count_ = 0;
  }

  double cell_size() const { return cell_; }
  std::size_t size() const { return count_; }

  void insert(Point2 p, uint64_t id) {
    buckets_[bucket_of(p)].push_back({p, id});
    ++count_;
  }

  bool remove(Point2 p, uint64_t id) {
    auto it = buckets_.find(bucket_of(p));
    if (it == buckets_.end()) return false;
    auto& vec = it->second;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (vec[i].second == id && vec[i].first == p) {
        vec[i] = vec.back();
        vec.pop_back();
        if (vec.empty()) buckets_.erase(it);
        --count_;
        return true;
      }
    }
    return false;
  }

  void move(Point2 from, Point2 to, uint64_t id) {
    if (!remove(from, id)) throw Error("PointGrid: move of unknown point");
    insert(to, id);
  }

  /* Visit every stored point whose distance to c is <= r (closed disk).
   * Visit order is deterministic: bucket row-major, then insertion order. */
  template <class F>
  void for_disk(Point2 c, double radius, F&& f) const {
    double r = radius;
    int ix0 = coord(c.x - r), ix1 = coord(c.x + r);
    int iy0 = coord(c.y - r), iy1 = coord(c.y + r);
    double r2 = radius * radius;
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix) {
        auto it = buckets_.find(key(ix, iy));
        if (it == buckets_.end()) continue;
        for (const auto& [p, id] : it->second)
          if (dist2(p, c) <= r2) f(p, id);
      }
  }

  template <class F>
  void for_all(F&& f) const {
    for (const auto& [k, vec] : buckets_)
      for (const auto& [p, id] : vec) f(p, id);
  }

 private:
  int coord(double x) const { return static_cast<int>(std::floor(x / cell_)); }
  uint64_t key(int ix, int iy) const {
    return (uint64_t(uint32_t(ix)) << 32) | uint32_t(iy);
  }
  uint64_t bucket_of(Point2 p) const { return key(coord(p.x), coord(p.y)); }

  double cell_ = 1.0;
  std::size_t count_ = 0;
  std::unordered_map<uint64_t, std::vector<std::pair<Point2, uint64_t>>> buckets_;
};

}  // namespace ipmm

#endif
