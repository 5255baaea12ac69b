#ifndef IPMM_INTERFACE_HPP
#define IPMM_INTERFACE_HPP

/* The tracked front and the operations that preserve it while the mesh
 * moves: spacing thresholds, seeding, the four-phase move (ensure, move,
 * coarse, refine), front refinement and coarsening, and the diagnostics
 * (preservation check, phase labeling, covering-circle property test). */

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ipmm/transfer.hpp"

namespace ipmm {

struct InterfaceMeasures {
  double length = 0.0;
  double enclosed_area = 0.0;
  double epsilon_last = 0.0;
};

struct PhaseAssignment {
  std::size_t inside_cells = 0;
  std::size_t outside_cells = 0;
  double inside_area = 0.0;
  double outside_area = 0.0;
};

struct TheoremReport {
  long trials = 0;
  long failures = 0;
};

namespace detail {

/* p inside or on the circle with diameter ab (the witness circle of the
 * edge); the blocking test used everywhere below. */
inline bool in_diametral_closed(Point2 p, Point2 a, Point2 b) {
  return dot(p - a, p - b) <= 0.0;
}

inline int winding_number(const std::vector<Point2>& poly, Point2 q) {
  int wn = 0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    Point2 a = poly[i], b = poly[(i + 1) % n];
    if (a.y <= q.y) {
      if (b.y > q.y && orient2d(a, b, q) == Orientation::positive) ++wn;
    } else {
      if (b.y <= q.y && orient2d(a, b, q) == Orientation::negative) --wn;
    }
  }
  return wn;
}

inline bool edge_exists(const Triangulation& t, VertexId a, VertexId b) {
  for (VertexId u : t.vertex_neighbors(a))
    if (u == b) return true;
  return false;
}

inline std::vector<Point2> ring_positions(const SimulationState& s) {
  std::vector<Point2> out;
  out.reserve(s.iface.ring.size());
  for (VertexId v : s.iface.ring) out.push_back(s.mesh.position(v));
  return out;
}

inline bool strictly_inside_hull(const Triangulation& t,
                                 const std::vector<VertexId>& hull, Point2 p) {
  for (std::size_t i = 0, n = hull.size(); i < n; ++i) {
    Point2 a = t.position(hull[i]);
    Point2 b = t.position(hull[(i + 1) % n]);
    if (orient2d(a, b, p) != Orientation::positive) return false;
  }
  return true;
}

/* Max distance from the old front polyline to the new one, sampled at the
 * old vertices and edge midpoints. */
inline double one_sided_deviation(const std::vector<Point2>& from,
                                  const std::vector<Point2>& to) {
  if (from.empty() || to.empty()) return 0.0;
  auto dist_to_polygon = [&](Point2 q) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = to.size(); i < n; ++i)
      best = std::min(best, point_segment_distance(q, to[i], to[(i + 1) % n]));
    return best;
  };
  double eps = 0.0;
  for (std::size_t i = 0, n = from.size(); i < n; ++i) {
    eps = std::max(eps, dist_to_polygon(from[i]));
    eps = std::max(eps, dist_to_polygon(0.5 * (from[i] + from[(i + 1) % n])));
  }
  return eps;
}

/* Clear the witness circles of every front edge, evaluated at the given
 * per-ring-index positions.  Bulk vertices found inside-or-on go to the
 * background list; an unremovable blocker raises.  Front vertices are judged
 * at their own given positions, since that is where they will sit. */
inline std::size_t ensure_front_clearance(SimulationState& s,
                                          const std::vector<Point2>& at,
                                          ProjectionKind kind) {
  const std::vector<VertexId>& ring = s.iface.ring;
  std::size_t m = ring.size();

  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = (i + 1) % m;
    Point2 a = at[i], b = at[j];
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i || k == j) continue;
      if (in_diametral_closed(at[k], a, b))
        throw InterfaceError(
            "front self-approach: a front vertex blocks a front edge");
    }
  }

  std::size_t removed = 0;
  std::vector<std::pair<Point2, uint64_t>> hits;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = (i + 1) % m;
    Point2 a = at[i], b = at[j];
    Point2 center = 0.5 * (a + b);
    double r = 0.5 * dist(a, b);
    hits.clear();
    s.vertex_grid.for_disk(center, r * (1.0 + 1e-9), [&](Point2 p, uint64_t id) {
      hits.push_back({p, id});
    });
    for (const auto& [p, id] : hits) {
      VertexId v{uint32_t(id >> 32), uint32_t(id)};
      if (!s.mesh.vertex_alive(v)) continue;
      if (!in_diametral_closed(p, a, b)) continue;
      VertexKind k = s.mesh.kind(v);
      if (k == VertexKind::iface) continue;  /* handled by the scan above */
      if (k == VertexKind::boundary)
        throw BoundaryConflictError(
            "front edge clearance reaches the domain boundary");
      s.background.add(p);
      remove_vertex_with_data(s, v, kind);
      ++removed;
    }
  }
  return removed;
}

/* Reinsert background vertices that are clear of the current front: strictly
 * outside every front-edge witness circle and at least dx_min away from
 * every front vertex.  Positions are restored verbatim. */
inline std::size_t restore_background(SimulationState& s, ProjectionKind kind) {
  const std::vector<VertexId>& ring = s.iface.ring;
  std::size_t m = ring.size();
  std::vector<Point2> rp = ring_positions(s);
  std::size_t count = 0;
  for (uint64_t id : s.background.ids_sorted()) {
    Point2 q = s.background.position(id);
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      if (in_diametral_closed(q, rp[i], rp[(i + 1) % m])) ok = false;
      if (ok && dist(q, rp[i]) < s.thr.dx_min) ok = false;
    }
    if (!ok) continue;
    insert_vertex_with_data(s, q, kind, VertexKind::bulk);
    s.background.remove(id);
    ++count;
  }
  return count;
}

}  // namespace detail

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

/* Spacing thresholds from edge-length percentiles: the 1% bulk percentile
 * gates bulk clearing, the 1%/99% front percentiles (spread apart by p so
 * the band is at least 3x wide) gate front coarsening and refinement.
 * When metrics is given, the bulk census is billed as bulk-coarsening work
 * and the front percentiles as front-refinement work. */
inline Thresholds compute_thresholds(const Triangulation& t, const Interface& g,
                                     StepMetrics* metrics = nullptr) {
  if (g.ring.size() < 3) throw InterfaceError("compute_thresholds: empty interface");

  auto percentile = [](std::vector<double>& v, double q) {
    std::size_t idx = static_cast<std::size_t>(q * double(v.size()));
    if (idx >= v.size()) idx = v.size() - 1;
    std::nth_element(v.begin(), v.begin() + idx, v.end());
    return v[idx];
  };

  auto t0 = std::chrono::steady_clock::now();
  std::unordered_set<uint64_t> front_keys;
  std::vector<double> front;
  for (std::size_t i = 0, n = g.ring.size(); i < n; ++i) {
    VertexId a = g.ring[i], b = g.ring[(i + 1) % n];
    front_keys.insert(SimulationState::edge_slot_key(a, b));
    front.push_back(dist(t.position(a), t.position(b)));
  }
  double hg_min = percentile(front, 0.01);
  double hg_max = percentile(front, 0.99);
  if (metrics) metrics->refine_interface_s += detail::seconds_since(t0);

  /* each interior edge is owned by its lower-keyed cell, hull edges by the
   * one real cell on them, so no dedup set is needed */
  t0 = std::chrono::steady_clock::now();
  std::vector<double> bulk;
  for (CellId c : t.cell_ids()) {
    CellView cv = t.cell(c);
    for (int i = 0; i < 3; ++i) {
      CellId nb = cv.neighbors[i];
      if (nb.valid() && !t.cell_is_ghost(nb) && !(c.key() < nb.key())) continue;
      VertexId a = cv.vertices[(i + 1) % 3], b = cv.vertices[(i + 2) % 3];
      if (front_keys.count(SimulationState::edge_slot_key(a, b))) continue;
      bulk.push_back(dist(t.position(a), t.position(b)));
    }
  }
  if (bulk.empty()) throw InterfaceError("compute_thresholds: no bulk edges");
  double h_min = percentile(bulk, 0.01);
  if (metrics) metrics->coarse_bulk_s += detail::seconds_since(t0);

  /* smallest p with (1+p)*hg_max >= 3*(1-p)*hg_min, floored at 0.1 */
  double p = std::max(0.1, (3.0 * hg_min - hg_max) / (3.0 * hg_min + hg_max));

  Thresholds thr;
  thr.p = p;
  thr.dx_min = 0.9 * h_min;
  thr.dx_gamma_min = (1.0 - p) * hg_min;
  thr.dx_gamma_max = (1.0 + p) * hg_max;
  return thr;
}

/* Flood-fill phase labels over cell adjacency, never crossing a front edge;
 * writes the labels into the mesh and returns the tally.  Exactly two
 * components must appear, and the winding number of the front polygon
 * decides which one is enclosed. */
inline PhaseAssignment phase_labels(SimulationState& s) {
  std::vector<CellId> cells = s.mesh.cell_ids();
  if (s.iface.ring.size() < 3)
    throw InterfaceError("phase_labels: no closed front");

  std::unordered_map<uint64_t, int> comp;
  comp.reserve(cells.size() * 2);
  int ncomp = 0;
  std::vector<CellId> stack;
  for (CellId seed : cells) {
    if (comp.count(seed.key())) continue;
    if (ncomp >= 2)
      throw InterfaceError("phase_labels: more than 2 phase components");
    comp[seed.key()] = ncomp;
    stack.assign(1, seed);
    while (!stack.empty()) {
      CellId c = stack.back();
      stack.pop_back();
      CellView cv = s.mesh.cell(c);
      for (int i = 0; i < 3; ++i) {
        CellId nb = cv.neighbors[i];
        if (!nb.valid() || !s.mesh.cell_alive(nb) || s.mesh.cell_is_ghost(nb))
          continue;
        if (s.is_ring_edge(cv.vertices[(i + 1) % 3], cv.vertices[(i + 2) % 3]))
          continue;
        if (comp.count(nb.key())) continue;
        comp[nb.key()] = comp[c.key()];
        stack.push_back(nb);
      }
    }
    ++ncomp;
  }
  if (ncomp != 2)
    throw InterfaceError("phase_labels: front does not split the mesh in 2");

  /* one representative cell per component decides enclosure: components
   * cannot cross the front, so they are uniformly inside or outside */
  std::vector<Point2> poly = detail::ring_positions(s);
  int seen_mask = 0;
  std::array<int, 2> wn_of_comp = {0, 0};
  for (CellId c : cells) {
    int k = comp[c.key()];
    if (seen_mask & (1 << k)) continue;
    seen_mask |= 1 << k;
    CellSnapshot snap = s.mesh.snapshot(c);
    Point2 g = (1.0 / 3.0) * (snap.pos[0] + snap.pos[1] + snap.pos[2]);
    wn_of_comp[k] = detail::winding_number(poly, g);
    if (seen_mask == 3) break;
  }
  if ((wn_of_comp[0] != 0) == (wn_of_comp[1] != 0))
    throw InterfaceError("phase_labels: ambiguous enclosure");
  int inside_comp = wn_of_comp[0] != 0 ? 0 : 1;

  PhaseAssignment out;
  for (CellId c : cells) {
    bool in = comp[c.key()] == inside_comp;
    s.mesh.set_cell_label(c, in ? PhaseLabel::inside : PhaseLabel::outside);
    double a = s.mesh.cell_area(c);
    if (in) {
      ++out.inside_cells;
      out.inside_area += a;
    } else {
      ++out.outside_cells;
      out.outside_area += a;
    }
  }
  return out;
}

/* Install a closed polygon as the tracked front: insert its vertices, clear
 * the blocking bulk vertices so every consecutive pair becomes a mesh edge,
 * and label the phases. */
inline Interface seed_interface(SimulationState& s, const std::vector<Point2>& polygon,
                                ProjectionKind kind = ProjectionKind::local_average) {
  std::size_t n = polygon.size();
  if (n < 3) throw InterfaceError("seed_interface: need at least 3 points");

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_properly_intersect(polygon[i], polygon[(i + 1) % n],
                                      polygon[j], polygon[(j + 1) % n]))
        throw InterfaceError("seed_interface: polygon self-intersects");
    }

  std::vector<VertexId> hull = s.mesh.hull_vertices();
  for (Point2 p : polygon)
    if (!detail::strictly_inside_hull(s.mesh, hull, p))
      throw InterfaceError("seed_interface: polygon touches the domain hull");

  s.iface.ring.clear();
  s.iface.ring.reserve(n);
  for (Point2 p : polygon)
    s.iface.ring.push_back(
        insert_vertex_with_data(s, p, kind, VertexKind::iface));
  s.iface.rebuild_index();
  s.rebuild_ring_edges();

  detail::ensure_front_clearance(s, detail::ring_positions(s), kind);

  for (std::size_t i = 0; i < n; ++i)
    if (!detail::edge_exists(s.mesh, s.iface.ring[i], s.iface.ring[(i + 1) % n]))
      throw InterfaceError("seed_interface: failed to realize a front edge");

  s.epsilon_last = 0.0;
  phase_labels(s);
  return s.iface;
}

/* Move the whole front to per-vertex targets.  Phases, in order: ensure
 * (clear the target-position witness circles into the background list),
 * move (one clearance-bounded hop per vertex), coarse (drop bulk vertices
 * crowding the moved front), refine (restore background vertices that are
 * clear again).  Targets are keyed by VertexId::key(); missing entries mean
 * the vertex stays. */
inline MoveReport move_interface(SimulationState& s,
                                 const std::unordered_map<uint64_t, Point2>& targets,
                                 ProjectionKind kind,
                                 StepMetrics* metrics = nullptr) {
  const std::vector<VertexId>& ring = s.iface.ring;
  std::size_t m = ring.size();
  if (m < 3) throw InterfaceError("move_interface: no closed front");

  auto t0 = std::chrono::steady_clock::now();
  std::vector<Point2> old_pos(m), tgt(m);
  double max_disp = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    old_pos[i] = s.mesh.position(ring[i]);
    auto it = targets.find(ring[i].key());
    tgt[i] = it == targets.end() ? old_pos[i] : it->second;
    max_disp = std::max(max_disp, dist(old_pos[i], tgt[i]));
  }

  std::vector<VertexId> hull = s.mesh.hull_vertices();
  for (std::size_t i = 0; i < m; ++i)
    if (!detail::strictly_inside_hull(s.mesh, hull, tgt[i]))
      throw BoundaryConflictError("move_interface: target leaves the domain");

  if (max_disp > 0.0) {
    /* every hop must stay under half the mesh clearance; the smallest
     * insphere diameter is a cheap lower bound for the clearance, so only
     * borderline calls pay for the exact sweep */
    if (!(max_disp < 0.5 * s.min_insphere_diameter()) &&
        !(max_disp < 0.5 * omega_mesh(s.mesh)))
      throw MoveTooFarError("move_interface: displacement reaches half the mesh clearance");
  }
  if (metrics) metrics->move_s += detail::seconds_since(t0);

  MoveReport rep;
  t0 = std::chrono::steady_clock::now();
  rep.removed_ensure = detail::ensure_front_clearance(s, tgt, kind);
  if (metrics) metrics->ensure_s += detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < m; ++i) {
    if (tgt[i] == old_pos[i]) continue;
    LocalChain chain;
    chain.pts = {s.mesh.position(ring[s.iface.prev(i)]), tgt[i],
                 s.mesh.position(ring[s.iface.next(i)])};
    move_vertex_with_data(s, ring[i], tgt[i], kind, &chain);
    ++rep.moved;
  }
  if (metrics) metrics->move_s += detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  if (s.thr.dx_min > 0.0) {
    std::vector<VertexId> crowd;
    std::unordered_set<uint64_t> seen;
    for (std::size_t i = 0; i < m; ++i) {
      Point2 p = tgt[i];
      for (VertexId u : s.mesh.vertex_neighbors(ring[i])) {
        if (s.mesh.kind(u) != VertexKind::bulk) continue;
        if (!(dist(s.mesh.position(u), p) < s.thr.dx_min)) continue;
        if (seen.insert(u.key()).second) crowd.push_back(u);
      }
    }
    for (VertexId u : crowd) {
      if (!s.mesh.vertex_alive(u)) continue;
      s.background.add(s.mesh.position(u));
      remove_vertex_with_data(s, u, kind);
      ++rep.removed_coarse;
    }
  }
  if (metrics) metrics->coarse_bulk_s += detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  rep.reinserted = detail::restore_background(s, kind);
  if (metrics) metrics->refine_bulk_s += detail::seconds_since(t0);

  /* an unchanged polygon deviates from itself by exactly zero; sampling
   * would report rounding noise from the midpoint projections */
  rep.epsilon = rep.moved == 0
                    ? 0.0
                    : detail::one_sided_deviation(old_pos, detail::ring_positions(s));
  s.epsilon_last = rep.epsilon;
  return rep;
}

/* Split every front edge longer than dx_gamma_max at its midpoint.  The two
 * half-edge witness circles nest inside the old one, so no extra clearing is
 * needed for them to appear in the mesh. */
inline std::size_t refine_interface(SimulationState& s, const Thresholds& thr,
                                    ProjectionKind kind) {
  if (s.iface.ring.size() < 3) return 0;
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (std::size_t i = 0, n = s.iface.ring.size(); i < n; ++i)
    edges.push_back({s.iface.ring[i], s.iface.ring[(i + 1) % n]});

  std::size_t count = 0;
  for (const auto& [a, b] : edges) {
    Point2 pa = s.mesh.position(a), pb = s.mesh.position(b);
    if (!(dist(pa, pb) > thr.dx_gamma_max)) continue;
    LocalChain chain;
    chain.pts = {pa, pb};
    VertexId mid = insert_vertex_with_data(s, 0.5 * (pa + pb), kind,
                                           VertexKind::iface, &chain);
    std::size_t ia = s.iface.index_of(a);
    s.iface.ring.insert(s.iface.ring.begin() + ia + 1, mid);
    s.iface.rebuild_index();
    s.rebuild_ring_edges();
    if (!detail::edge_exists(s.mesh, a, mid) || !detail::edge_exists(s.mesh, mid, b))
      throw InterfaceError("refine_interface: split edge not realized");
    ++count;
  }
  return count;
}

/* Remove front vertices whose shortest incident front edge fell under
 * dx_gamma_min, shortest average spacing first.  The hole between the two
 * neighbors is cleared through its covering circle so the bridging edge is
 * guaranteed to appear. */
inline std::size_t coarsen_interface(SimulationState& s, const Thresholds& thr,
                                     ProjectionKind kind) {
  struct Cand {
    double l_avg;
    uint64_t key;
    VertexId v;
  };
  std::vector<Cand> cands;
  {
    const std::vector<VertexId>& ring = s.iface.ring;
    std::size_t m = ring.size();
    if (m < 3) throw InterfaceError("coarsen_interface: no closed front");
    for (std::size_t i = 0; i < m; ++i) {
      double l1 = dist(s.mesh.position(ring[s.iface.prev(i)]), s.mesh.position(ring[i]));
      double l2 = dist(s.mesh.position(ring[i]), s.mesh.position(ring[s.iface.next(i)]));
      if (std::min(l1, l2) < thr.dx_gamma_min)
        cands.push_back({0.5 * (l1 + l2), ring[i].key(), ring[i]});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.l_avg != b.l_avg ? a.l_avg < b.l_avg : a.key < b.key;
  });

  std::size_t count = 0;
  std::vector<std::pair<Point2, uint64_t>> hits;
  for (const Cand& cand : cands) {
    if (!s.mesh.vertex_alive(cand.v)) continue;
    std::size_t i = s.iface.index_of(cand.v);
    if (i == Interface::npos) continue;

    /* revalidate at current geometry: removals shift the neighbors, and
     * front edges only ever get longer here, so a stale candidate simply
     * drops out */
    VertexId vp = s.iface.ring[s.iface.prev(i)];
    VertexId vn = s.iface.ring[s.iface.next(i)];
    Point2 pv = s.mesh.position(cand.v);
    Point2 pp = s.mesh.position(vp);
    Point2 pn = s.mesh.position(vn);
    if (!(std::min(dist(pp, pv), dist(pv, pn)) < thr.dx_gamma_min)) continue;

    if (s.iface.ring.size() == 3)
      throw InterfaceError("coarsen_interface: front would drop below 3 vertices");

    /* the hole left by the removal is covered by the circle through the two
     * neighbors; everything inside it must go before the vertex does */
    Point2 center = 0.5 * (pp + pn);
    double r = 0.5 * dist(pp, pn);
    hits.clear();
    s.vertex_grid.for_disk(center, r * (1.0 + 1e-9), [&](Point2 p, uint64_t id) {
      hits.push_back({p, id});
    });
    bool blocked = false;
    std::vector<VertexId> to_remove;
    for (const auto& [p, id] : hits) {
      VertexId u{uint32_t(id >> 32), uint32_t(id)};
      if (!s.mesh.vertex_alive(u)) continue;
      if (u == cand.v || u == vp || u == vn) continue;
      if (!detail::in_diametral_closed(p, pp, pn)) continue;
      if (s.mesh.kind(u) == VertexKind::bulk) {
        to_remove.push_back(u);
      } else {
        /* another front or boundary vertex inside the hole circle: this
         * candidate cannot be coarsened safely, leave it for later */
        blocked = true;
        break;
      }
    }
    if (blocked) continue;

    for (VertexId u : to_remove) {
      if (!s.mesh.vertex_alive(u)) continue;
      s.background.add(s.mesh.position(u));
      remove_vertex_with_data(s, u, kind);
    }

    LocalChain chain;
    chain.pts = {s.mesh.position(s.iface.ring[s.iface.prev(s.iface.prev(i))]), pp,
                 pn, s.mesh.position(s.iface.ring[s.iface.next(s.iface.next(i))])};
    remove_vertex_with_data(s, cand.v, kind, &chain);
    s.iface.ring.erase(s.iface.ring.begin() + i);
    s.iface.rebuild_index();
    s.rebuild_ring_edges();

    if (!detail::edge_exists(s.mesh, vp, vn))
      throw InterfaceError("coarsen_interface: bridging edge not realized");
    ++count;
  }
  return count;
}

/* The preservation diagnostic: the front must be a simple closed chain of
 * live mesh edges, and no mesh edge between two non-front vertices may cross
 * a front edge.  Empty result means preserved. */
inline std::vector<std::string> check_preservation(const SimulationState& s) {
  std::vector<std::string> out;
  const std::vector<VertexId>& ring = s.iface.ring;
  std::size_t m = ring.size();
  if (m < 3) {
    out.push_back("front has fewer than 3 vertices");
    return out;
  }
  for (VertexId v : ring) {
    if (!s.mesh.vertex_alive(v)) {
      out.push_back("front lists a dead vertex");
      return out;
    }
    if (s.mesh.kind(v) != VertexKind::iface)
      out.push_back("front vertex not marked as interface kind");
  }
  {
    std::unordered_set<uint64_t> uniq;
    for (VertexId v : ring) uniq.insert(v.key());
    if (uniq.size() != m) out.push_back("front repeats a vertex");
  }

  std::vector<Point2> rp = detail::ring_positions(s);
  for (std::size_t i = 0; i < m; ++i)
    if (!detail::edge_exists(s.mesh, ring[i], ring[(i + 1) % m]))
      out.push_back("front edge missing from the mesh at index " + std::to_string(i));

  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      bool adjacent = j == i + 1 || (i == 0 && j == m - 1);
      if (adjacent) continue;
      if (segments_properly_intersect(rp[i], rp[(i + 1) % m], rp[j],
                                      rp[(j + 1) % m])) {
        out.push_back("front polygon self-intersects");
        i = m;
        break;
      }
    }

  /* bounding boxes of the front edges for cheap rejection */
  std::vector<std::array<double, 4>> fbox(m);
  for (std::size_t i = 0; i < m; ++i) {
    Point2 a = rp[i], b = rp[(i + 1) % m];
    fbox[i] = {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
               std::max(a.y, b.y)};
  }

  std::unordered_set<uint64_t> seen;
  for (CellId c : s.mesh.cell_ids()) {
    CellView cv = s.mesh.cell(c);
    for (int e = 0; e < 3; ++e) {
      VertexId a = cv.vertices[e], b = cv.vertices[(e + 1) % 3];
      if (s.mesh.kind(a) == VertexKind::iface || s.mesh.kind(b) == VertexKind::iface)
        continue;
      if (!seen.insert(SimulationState::edge_slot_key(a, b)).second) continue;
      Point2 pa = s.mesh.position(a), pb = s.mesh.position(b);
      double lx = std::min(pa.x, pb.x), ly = std::min(pa.y, pb.y);
      double hx = std::max(pa.x, pb.x), hy = std::max(pa.y, pb.y);
      for (std::size_t i = 0; i < m; ++i) {
        if (hx < fbox[i][0] || hy < fbox[i][1] || lx > fbox[i][2] ||
            ly > fbox[i][3])
          continue;
        if (segments_properly_intersect(pa, pb, rp[i], rp[(i + 1) % m])) {
          out.push_back("mesh edge between non-front vertices crosses the front");
          return out;
        }
      }
    }
  }
  return out;
}

/* Perimeter, shoelace area of the front polygon, and the deviation realized
 * by the last front move. */
inline InterfaceMeasures interface_measures(const SimulationState& s) {
  InterfaceMeasures out;
  std::vector<Point2> rp = detail::ring_positions(s);
  std::size_t m = rp.size();
  if (m < 3) return out;
  double area2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    Point2 a = rp[i], b = rp[(i + 1) % m];
    out.length += dist(a, b);
    area2 += a.x * b.y - b.x * a.y;
  }
  out.enclosed_area = std::abs(0.5 * area2);
  out.epsilon_last = s.epsilon_last;
  return out;
}

/* Randomized check of the covering-circle blocking property: two points
 * strictly outside the minimum covering circle of a point set, connected by
 * a segment that crosses the set's hull, never form a Delaunay edge. */
inline TheoremReport verify_theorem_minsphere(long trials, uint64_t seed = 0x11b7a2c5u) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::uniform_real_distribution<double> wide(-3.5, 3.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  TheoremReport rep;
  rep.trials = trials;
  for (long trial = 0; trial < trials; ++trial) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200)
        throw Error("verify_theorem_minsphere: could not build a test case");
      int mcount = 2 + int(rng() % 7);
      std::vector<Point2> core;
      for (int i = 0; i < mcount; ++i) core.push_back({box(rng), box(rng)});
      Circle M = min_covering_circle(core);
      double R = std::sqrt(M.radius_squared);
      if (!(R > 1e-6)) continue;

      /* a point q strictly inside the convex hull of the core (on the
       * segment itself when the core is two points) */
      Point2 q{0.0, 0.0};
      if (mcount == 2) {
        double tpar = 0.15 + 0.7 * unit(rng);
        q = core[0] + tpar * (core[1] - core[0]);
      } else {
        double wsum = 0.0;
        for (Point2 cp : core) {
          double w = -std::log(unit(rng) + 1e-300);
          q = q + w * cp;
          wsum += w;
        }
        q = (1.0 / wsum) * q;
      }

      double ang = 6.283185307179586 * unit(rng);
      Point2 dir{std::cos(ang), std::sin(ang)};
      double reach = dist(q, M.center) + R * (1.0 + 1e-6);
      Point2 p1 = q - (reach + 0.2 * unit(rng)) * dir;
      Point2 p2 = q + (reach + 0.2 * unit(rng)) * dir;
      if (!(dist2(p1, M.center) > M.radius_squared) ||
          !(dist2(p2, M.center) > M.radius_squared))
        continue;

      std::vector<std::pair<Point2, VertexKind>> pts;
      for (Point2 cp : core) pts.push_back({cp, VertexKind::bulk});
      pts.push_back({p1, VertexKind::bulk});
      pts.push_back({p2, VertexKind::bulk});
      int fillers = int(rng() % 7);
      for (int i = 0; i < fillers; ++i) {
        for (int tries = 0; tries < 50; ++tries) {
          Point2 f{wide(rng), wide(rng)};
          if (dist2(f, M.center) > M.radius_squared * (1.0 + 1e-6)) {
            pts.push_back({f, VertexKind::bulk});
            break;
          }
        }
      }

      Triangulation t;
      VertexId v1, v2;
      try {
        t = Triangulation::build(pts);
        bool found1 = false, found2 = false;
        for (VertexId v : t.vertex_ids()) {
          if (t.position(v) == p1) {
            v1 = v;
            found1 = true;
          }
          if (t.position(v) == p2) {
            v2 = v;
            found2 = true;
          }
        }
        if (!found1 || !found2) continue;
      } catch (const Error&) {
        continue;  /* degenerate draw, resample */
      }

      if (detail::edge_exists(t, v1, v2)) ++rep.failures;
      break;
    }
  }
  return rep;
}

}  // namespace ipmm

#endif
