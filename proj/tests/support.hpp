#ifndef IPMM_TESTS_SUPPORT_HPP
#define IPMM_TESTS_SUPPORT_HPP

/* Shared helpers for the test binaries: brute-force oracles and canonical
 * shape comparisons.  Everything here trades speed for obviousness. */

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "ipmm/triangulation.hpp"

namespace ipmm_test {

using namespace ipmm;

/* Canonical, order-independent description of the real cells as geometry:
 * each cell becomes its three corner coordinates sorted lexicographically. */
inline std::vector<std::array<double, 6>> cell_shape_set(const Triangulation& t) {
  std::vector<std::array<double, 6>> out;
  for (CellId c : t.cell_ids()) {
    CellSnapshot s = t.snapshot(c);
    std::array<std::array<double, 2>, 3> pts;
    for (int i = 0; i < 3; ++i) pts[i] = {s.pos[i].x, s.pos[i].y};
    std::sort(pts.begin(), pts.end());
    out.push_back({pts[0][0], pts[0][1], pts[1][0], pts[1][1], pts[2][0],
                   pts[2][1]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

/* O(#cells * #vertices) Delaunay check straight from the definition: no
 * vertex may sit strictly inside any cell's circumcircle. */
inline std::vector<CellId> brute_delaunay_offenders(const Triangulation& t) {
  std::vector<CellId> bad;
  std::vector<VertexId> vs = t.vertex_ids();
  for (CellId c : t.cell_ids()) {
    CellSnapshot s = t.snapshot(c);
    for (VertexId v : vs) {
      if (v == s.vertices[0] || v == s.vertices[1] || v == s.vertices[2])
        continue;
      if (in_circle(s.pos[0], s.pos[1], s.pos[2], t.position(v)) ==
          Orientation::positive) {
        bad.push_back(c);
        break;
      }
    }
  }
  return bad;
}

/* Conflict zone by full scan: every real cell whose closed circumdisk
 * contains p. */
inline std::vector<CellId> brute_conflict_zone(const Triangulation& t, Point2 p) {
  std::vector<CellId> out;
  for (CellId c : t.cell_ids()) {
    CellSnapshot s = t.snapshot(c);
    if (in_circle(s.pos[0], s.pos[1], s.pos[2], p) != Orientation::negative)
      out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline bool point_in_cell(const Triangulation& t, CellId c, Point2 p) {
  CellSnapshot s = t.snapshot(c);
  for (int i = 0; i < 3; ++i) {
    if (orient2d(s.pos[(i + 1) % 3], s.pos[(i + 2) % 3], p) ==
        Orientation::negative)
      return false;
  }
  return true;
}

/* Uniformly random interior-ish points of the unit square, plus the square
 * frame so the hull is controlled. */
inline std::vector<std::pair<Point2, VertexKind>> random_cloud(
    std::mt19937_64& rng, int n_interior, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo + 0.05 * (hi - lo),
                                           hi - 0.05 * (hi - lo));
  std::vector<std::pair<Point2, VertexKind>> pts;
  pts.push_back({{lo, lo}, VertexKind::boundary});
  pts.push_back({{hi, lo}, VertexKind::boundary});
  pts.push_back({{hi, hi}, VertexKind::boundary});
  pts.push_back({{lo, hi}, VertexKind::boundary});
  for (int i = 0; i < n_interior; ++i)
    pts.push_back({{u(rng), u(rng)}, VertexKind::bulk});
  return pts;
}

}  // namespace ipmm_test

#endif
