#ifndef IPMM_GEOM_HPP
#define IPMM_GEOM_HPP

/* Low-level planar geometry: exact orientation/incircle predicates plus the
 * inexact circle constructions (circumcircle, diametral circle, minimum
 * covering circle) everything else is built on.  Predicates decide topology
 * and are exact; coordinates and radii are ordinary doubles.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "ipmm/errors.hpp"
#include "ipmm/exact.hpp"

namespace ipmm {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
  friend bool operator!=(Point2 a, Point2 b) { return !(a == b); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point2 a) { return std::sqrt(norm2(a)); }
inline double dist2(Point2 a, Point2 b) { return norm2(a - b); }
inline double dist(Point2 a, Point2 b) { return std::sqrt(dist2(a, b)); }

enum class Orientation { negative = -1, zero = 0, positive = 1 };

/* Exact sign of the signed area of (a,b,c); positive = counterclockwise. */
inline Orientation orient2d(Point2 a, Point2 b, Point2 c) {
  const double pa[2] = {a.x, a.y};
  const double pb[2] = {b.x, b.y};
  const double pc[2] = {c.x, c.y};
  return static_cast<Orientation>(detail::orient2d_sign(pa, pb, pc));
}

/* Exact sign of the incircle determinant.  For counterclockwise (a,b,c):
 * positive = p strictly inside the circumcircle, zero = on it.  Collinear
 * defining points have no circumcircle and are rejected. */
inline Orientation in_circle(Point2 a, Point2 b, Point2 c, Point2 p) {
  if (orient2d(a, b, c) == Orientation::zero)
    throw DegenerateInputError("in_circle: collinear defining points");
  const double pa[2] = {a.x, a.y};
  const double pb[2] = {b.x, b.y};
  const double pc[2] = {c.x, c.y};
  const double pp[2] = {p.x, p.y};
  return static_cast<Orientation>(detail::in_circle_sign(pa, pb, pc, pp));
}

struct Circle {
  Point2 center;
  double radius_squared = 0.0;

  bool contains_closed(Point2 p, double slack = 0.0) const {
    return dist2(p, center) <= radius_squared + slack;
  }
  bool contains_open(Point2 p) const {
    return dist2(p, center) < radius_squared;
  }
};

/* Unique circle through three non-collinear points.  Solved from the
 * perpendicular-bisector linear system, translated to a for conditioning. */
inline Circle circumcircle(Point2 a, Point2 b, Point2 c) {
  if (orient2d(a, b, c) == Orientation::zero)
    throw DegenerateInputError("circumcircle: collinear points");
  Point2 ab = b - a, ac = c - a;
  double d = 2.0 * cross(ab, ac);
  double ab2 = norm2(ab), ac2 = norm2(ac);
  Point2 rel = {(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  return Circle{a + rel, norm2(rel)};
}

/* Smallest circle through both segment endpoints: the diametral circle. */
inline Circle gabriel_circle(Point2 a, Point2 b) {
  if (a == b) throw DegenerateInputError("gabriel_circle: coincident endpoints");
  Point2 mid = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  return Circle{mid, 0.25 * dist2(a, b)};
}

namespace detail {

inline Circle circle_from(Point2 a, Point2 b) { return gabriel_circle(a, b); }

inline bool mcc_contains(const Circle& c, Point2 p) {
  /* Tiny relative slack keeps the recursion stable when a point sits on the
   * boundary up to rounding. */
  double slack = 1e-14 * (1.0 + c.radius_squared);
  return dist2(p, c.center) <= c.radius_squared + slack;
}

inline Circle mcc_trivial(const std::array<Point2, 3>& r, int n) {
  switch (n) {
    case 0: return Circle{{0.0, 0.0}, 0.0};
    case 1: return Circle{r[0], 0.0};
    case 2: return circle_from(r[0], r[1]);
    default: {
      /* Three boundary points: prefer a diametral circle of a pair when it
       * already covers the third (obtuse case), else the circumcircle. */
      for (int i = 0; i < 3; ++i) {
        Circle c = circle_from(r[i], r[(i + 1) % 3]);
        if (mcc_contains(c, r[(i + 2) % 3])) return c;
      }
      return circumcircle(r[0], r[1], r[2]);
    }
  }
}

inline Circle mcc_welzl(std::vector<Point2>& pts, std::size_t n,
                        std::array<Point2, 3>& r, int nr) {
  if (n == 0 || nr == 3) return mcc_trivial(r, nr);
  Circle c = mcc_welzl(pts, n - 1, r, nr);
  if (mcc_contains(c, pts[n - 1])) return c;
  r[nr] = pts[n - 1];
  c = mcc_welzl(pts, n - 1, r, nr + 1);
  /* Move-to-front: keep boundary-determining points early in the order. */
  std::rotate(pts.begin(), pts.begin() + (n - 1), pts.begin() + n);
  return c;
}

}  // namespace detail

struct CoveringCircle {
  Circle circle;
  std::array<Point2, 3> support{};
  int support_count = 0;
};

/* Minimum covering circle with the (at most 3) support points that pin it.
 * Randomized incremental (Welzl) with a fixed shuffle seed so repeated runs
 * over the same input produce bitwise-identical results. */
inline CoveringCircle min_covering_circle_support(const std::vector<Point2>& points) {
  if (points.empty())
    throw DegenerateInputError("min_covering_circle: empty point set");
  std::vector<Point2> pts = points;
  {
    std::mt19937 rng(0x9e3779b9u);
    std::shuffle(pts.begin(), pts.end(), rng);
  }
  std::array<Point2, 3> r{};
  Circle c = detail::mcc_welzl(pts, pts.size(), r, 0);
  /* Recover the support set from the final circle: points on its boundary,
   * reduced to the minimal defining subset (pair if some diametral pair of
   * boundary points already covers everything). */
  std::vector<Point2> on_boundary;
  for (Point2 p : points) {
    double slack = 1e-12 * (1.0 + c.radius_squared);
    if (std::fabs(dist2(p, c.center) - c.radius_squared) <= slack)
      on_boundary.push_back(p);
  }
  std::sort(on_boundary.begin(), on_boundary.end(), [](Point2 a, Point2 b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  on_boundary.erase(std::unique(on_boundary.begin(), on_boundary.end()),
                    on_boundary.end());
  CoveringCircle out;
  out.circle = c;
  if (points.size() == 1 || on_boundary.size() <= 1) {
    out.support[0] = points[0];
    out.support_count = 1;
    if (!on_boundary.empty()) out.support[0] = on_boundary[0];
    return out;
  }
  for (std::size_t i = 0; i < on_boundary.size(); ++i)
    for (std::size_t j = i + 1; j < on_boundary.size(); ++j) {
      Circle d = detail::circle_from(on_boundary[i], on_boundary[j]);
      double slack = 1e-12 * (1.0 + c.radius_squared);
      if (std::fabs(d.radius_squared - c.radius_squared) <= slack &&
          dist2(d.center, c.center) <= slack) {
        out.support = {on_boundary[i], on_boundary[j], Point2{}};
        out.support_count = 2;
        return out;
      }
    }
  /* Otherwise three of the boundary points define it; with exact ties broken
   * lexicographically for determinism. */
  out.support_count = std::min<std::size_t>(3, on_boundary.size());
  for (int i = 0; i < out.support_count; ++i) out.support[i] = on_boundary[i];
  return out;
}

inline Circle min_covering_circle(const std::vector<Point2>& points) {
  return min_covering_circle_support(points).circle;
}

/* True iff the closed segments share any point.  Decided purely from exact
 * orientation signs; endpoint contact counts (conservative for interface
 * crossing checks). */
inline bool segments_properly_intersect(Point2 p1, Point2 p2, Point2 q1,
                                        Point2 q2) {
  if (p1 == p2 || q1 == q2)
    throw DegenerateInputError("segments_properly_intersect: degenerate segment");
  auto sgn = [](Orientation o) { return static_cast<int>(o); };
  int d1 = sgn(orient2d(q1, q2, p1));
  int d2 = sgn(orient2d(q1, q2, p2));
  int d3 = sgn(orient2d(p1, p2, q1));
  int d4 = sgn(orient2d(p1, p2, q2));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  auto on_segment = [&](Point2 a, Point2 b, Point2 p, int orient) {
    if (orient != 0) return false;
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
  };
  return on_segment(q1, q2, p1, d1) || on_segment(q1, q2, p2, d2) ||
         on_segment(p1, p2, q1, d3) || on_segment(p1, p2, q2, d4);
}

/* Incircle diameter 2A/s of a triangle; the building block of the meshwise
 * motion-bound estimate. */
inline double insphere_diameter(Point2 a, Point2 b, Point2 c) {
  if (orient2d(a, b, c) == Orientation::zero)
    throw DegenerateInputError("insphere_diameter: collinear points");
  double area = 0.5 * std::fabs(cross(b - a, c - a));
  double s = 0.5 * (dist(a, b) + dist(b, c) + dist(c, a));
  return 2.0 * area / s;
}

inline double triangle_area(Point2 a, Point2 b, Point2 c) {
  return 0.5 * cross(b - a, c - a);
}

/* Distance from p to the closed segment [a,b]. */
inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  Point2 ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + t * ab);
}

}  // namespace ipmm

#endif
