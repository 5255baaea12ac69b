#ifndef IPMM_TRANSFER_HPP
#define IPMM_TRANSFER_HPP

/* Data-carrying mesh edits.  Every topology change is framed as a projection
 * from an old stencil (cells about to vanish, plus context) onto a new one
 * covering the same region, so cell averages stay conservative.  Near the
 * tracked front the projection is phase-protected: values never average
 * across the front. */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_set>
#include <vector>

#include "ipmm/state.hpp"

namespace ipmm {

enum class ProjectionKind { local_average, l2_projection };

/* Frozen donor cells for one edit: geometry, payload, area, phase side. */
struct Stencil {
  struct Entry {
    std::array<Point2, 3> pos;
    DataVector data;
    double area = 0.0;
    PhaseLabel label = PhaseLabel::unset;
  };
  std::vector<Entry> entries;

  double total_area() const {
    double a = 0.0;
    for (const Entry& e : entries) a += e.area;
    return a;
  }
};

/* Clearance radius of an interior vertex: its distance to the boundary of
 * the union of incident cells, i.e. to the polygon through its neighbors.
 * Any move shorter than this keeps the vertex inside its own star. */
inline double omega_vertex(const Triangulation& t, VertexId v) {
  if (t.kind(v) == VertexKind::boundary)
    throw MeshError("omega_vertex: vertex lies on the domain boundary");
  std::vector<VertexId> link = t.vertex_neighbors(v);
  Point2 p = t.position(v);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = link.size(); i < n; ++i) {
    Point2 a = t.position(link[i]);
    Point2 b = t.position(link[(i + 1) % n]);
    double d = point_segment_distance(p, a, b);
    if (d < best) best = d;
  }
  return best;
}

/* Minimum clearance over all interior vertices. */
inline double omega_mesh(const Triangulation& t) {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (VertexId v : t.vertex_ids()) {
    if (t.kind(v) == VertexKind::boundary) continue;
    any = true;
    double w = omega_vertex(t, v);
    if (w < best) best = w;
  }
  if (!any) throw MeshError("omega_mesh: mesh has no interior vertices");
  return best;
}

namespace detail {

inline double polygon_area(const std::vector<Point2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    Point2 p = poly[i];
    Point2 q = poly[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

/* Keep the part of poly on or left of the directed line a->b. */
inline void clip_halfplane(std::vector<Point2>& poly, std::vector<Point2>& tmp,
                           Point2 a, Point2 b) {
  tmp.clear();
  Point2 d = b - a;
  std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    Point2 cur = poly[i];
    Point2 nxt = poly[(i + 1) % n];
    double sc = cross(d, cur - a);
    double sn = cross(d, nxt - a);
    if (sc >= 0.0) tmp.push_back(cur);
    if ((sc > 0.0 && sn < 0.0) || (sc < 0.0 && sn > 0.0)) {
      double t = sc / (sc - sn);
      tmp.push_back(cur + t * (nxt - cur));
    }
  }
  poly.swap(tmp);
}

/* Area of the intersection of two counterclockwise triangles. */
inline double triangle_overlap_area(const std::array<Point2, 3>& tri,
                                    const std::array<Point2, 3>& clip) {
  thread_local std::vector<Point2> poly, tmp;
  poly.assign(tri.begin(), tri.end());
  for (int e = 0; e < 3 && poly.size() >= 3; ++e)
    clip_halfplane(poly, tmp, clip[e], clip[(e + 1) % 3]);
  if (poly.size() < 3) return 0.0;
  double a = polygon_area(poly);
  return a > 0.0 ? a : 0.0;
}

/* Weighted mean of stencil values, anchored at the first donor so that a
 * spatially constant field is reproduced bit-exactly. */
inline DataVector anchored_mean(const Stencil& st, const std::vector<int>& subset,
                                const std::vector<double>& weights,
                                double weight_total) {
  DataVector out = st.entries[subset[0]].data;
  int m = out.size();
  for (int c = 0; c < m; ++c) {
    double anchor = out[c];
    double acc = 0.0;
    for (std::size_t j = 0; j < subset.size(); ++j)
      acc += (weights[j] / weight_total) * (st.entries[subset[j]].data[c] - anchor);
    out[c] += acc;
  }
  return out;
}

}  // namespace detail

/* Uniform fill: every new cell receives the area-weighted mean of the old
 * stencil.  The cheap projection; exact on constants. */
inline std::vector<DataVector> project_average(
    const Stencil& old_st, const std::vector<std::array<Point2, 3>>& new_cells) {
  if (old_st.entries.empty() || !(old_st.total_area() > 0.0))
    throw DegenerateInputError("project_average: zero-area stencil");
  std::vector<int> subset(old_st.entries.size());
  std::vector<double> weights(old_st.entries.size());
  for (std::size_t j = 0; j < old_st.entries.size(); ++j) {
    subset[j] = static_cast<int>(j);
    weights[j] = old_st.entries[j].area;
  }
  DataVector mean =
      detail::anchored_mean(old_st, subset, weights, old_st.total_area());
  return std::vector<DataVector>(new_cells.size(), mean);
}

/* Geometric overlap fill: each new cell receives the mean of the old values
 * weighted by clipped intersection areas.  Sharper than the uniform fill and
 * still conservative; each new cell must be covered by the old stencil. */
inline std::vector<DataVector> project_l2(
    const Stencil& old_st, const std::vector<std::array<Point2, 3>>& new_cells) {
  if (old_st.entries.empty() || !(old_st.total_area() > 0.0))
    throw DegenerateInputError("project_l2: zero-area stencil");
  std::vector<DataVector> out;
  out.reserve(new_cells.size());
  std::vector<int> subset;
  std::vector<double> weights;
  for (const auto& tri : new_cells) {
    double cell_area = triangle_area(tri[0], tri[1], tri[2]);
    subset.clear();
    weights.clear();
    double covered = 0.0;
    for (std::size_t j = 0; j < old_st.entries.size(); ++j) {
      double w = detail::triangle_overlap_area(tri, old_st.entries[j].pos);
      if (w > 0.0) {
        subset.push_back(static_cast<int>(j));
        weights.push_back(w);
        covered += w;
      }
    }
    if (std::abs(covered - cell_area) > 1e-6 * cell_area)
      throw Error("project_l2: old stencil does not cover a new cell");
    out.push_back(detail::anchored_mean(old_st, subset, weights, covered));
  }
  return out;
}

/* Open or closed polyline along the front near an edit, oriented with the
 * enclosed phase on its left.  Used to classify which side of the front a
 * point lies on: take the nearest chain segment and the orientation sign
 * against it.  Ties at shared segment endpoints resolve toward the segment
 * whose line the point is farther from, which is the decisive one. */
struct LocalChain {
  std::vector<Point2> pts;
  bool closed = false;

  PhaseLabel side_of(Point2 p) const {
    std::size_t n = pts.size();
    std::size_t segs = closed ? n : (n >= 1 ? n - 1 : 0);
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segs; ++i) {
      Point2 a = pts[i], b = pts[(i + 1) % n];
      if (!(dist(a, b) > 0.0)) continue;
      best_d = std::min(best_d, point_segment_distance(p, a, b));
    }
    double best_sign = 0.0;
    double band = best_d + 1e-12 * (1.0 + best_d);
    for (std::size_t i = 0; i < segs; ++i) {
      Point2 a = pts[i], b = pts[(i + 1) % n];
      double len = dist(a, b);
      if (!(len > 0.0)) continue;
      if (point_segment_distance(p, a, b) > band) continue;
      double s = cross(b - a, p - a) / len;
      if (std::abs(s) > std::abs(best_sign)) best_sign = s;
    }
    return best_sign >= 0.0 ? PhaseLabel::inside : PhaseLabel::outside;
  }
};

/* Side of the full current front; O(ring) fallback when no local chain is in
 * hand. */
inline PhaseLabel ring_side_of(const SimulationState& s, Point2 p) {
  LocalChain chain;
  chain.closed = true;
  chain.pts.reserve(s.iface.ring.size());
  for (VertexId v : s.iface.ring) chain.pts.push_back(s.mesh.position(v));
  if (chain.pts.size() < 3) return PhaseLabel::unset;
  return chain.side_of(p);
}

namespace detail {

/* Collect donor entries from the snapshots an edit destroyed.  Ghost cells
 * carry no payload and no area, so they never participate; `skip` excludes
 * transient cells that were created and consumed within the same edit. */
inline void add_donors(Stencil& st, const std::vector<CellSnapshot>& snaps,
                       const std::unordered_set<uint64_t>* skip = nullptr) {
  for (const CellSnapshot& c : snaps) {
    if (c.ghost) continue;
    if (skip && skip->count(c.id.key())) continue;
    double a = c.area();
    if (!(a > 0.0)) throw MeshError("stencil cell with nonpositive area");
    st.entries.push_back({c.pos, c.data, a, c.label});
  }
}

inline void add_targets(std::vector<CellId>& ids,
                        const std::vector<CellSnapshot>& snaps,
                        const std::unordered_set<uint64_t>* skip = nullptr) {
  for (const CellSnapshot& c : snaps) {
    if (c.ghost) continue;
    if (skip && skip->count(c.id.key())) continue;
    ids.push_back(c.id);
  }
}

inline void refresh_cell_caches(SimulationState& s,
                                const std::vector<CellSnapshot>& destroyed,
                                const std::vector<CellSnapshot>& created) {
  for (const CellSnapshot& c : destroyed) s.track_destroyed_cell(c.id);
  for (const CellSnapshot& c : created) s.track_created_cell(c);
}

/* Write projected values and phase labels onto the replacement cells, check
 * the two stencils cover the same area, and log the mass delta.  When the old
 * stencil holds cells from both phases, each new cell draws only from donors
 * on its own side of the front. */
inline void apply_projection(SimulationState& s, const Stencil& old_st,
                             const std::vector<CellId>& new_cells,
                             ProjectionKind kind, const LocalChain* chain) {
  int m = s.data_dim();
  double old_area = old_st.total_area();
  if (old_st.entries.empty() || !(old_area > 0.0))
    throw DegenerateInputError("projection from a zero-area stencil");

  std::vector<std::array<Point2, 3>> geom;
  geom.reserve(new_cells.size());
  double new_area = 0.0;
  for (CellId c : new_cells) {
    CellSnapshot snap = s.mesh.snapshot(c);
    geom.push_back(snap.pos);
    new_area += snap.area();
  }
  if (std::abs(new_area - old_area) > 1e-9 * std::max(old_area, new_area))
    throw MeshError("projection stencils cover different areas");

  std::array<double, DataVector::kMaxDim> mass_old{}, scale{};
  for (const Stencil::Entry& e : old_st.entries)
    for (int c = 0; c < m; ++c) {
      mass_old[c] += e.data[c] * e.area;
      scale[c] += std::abs(e.data[c]) * e.area;
    }

  bool has_in = false, has_out = false;
  for (const Stencil::Entry& e : old_st.entries) {
    has_in = has_in || e.label == PhaseLabel::inside;
    has_out = has_out || e.label == PhaseLabel::outside;
  }
  bool straddle = has_in && has_out;

  std::vector<DataVector> values;
  std::vector<PhaseLabel> labels(new_cells.size());
  if (!straddle) {
    values = kind == ProjectionKind::local_average ? project_average(old_st, geom)
                                                   : project_l2(old_st, geom);
    PhaseLabel lab = has_in    ? PhaseLabel::inside
                     : has_out ? PhaseLabel::outside
                               : PhaseLabel::unset;
    std::fill(labels.begin(), labels.end(), lab);
  } else {
    values.reserve(new_cells.size());
    std::vector<int> subset;
    std::vector<double> weights;
    for (std::size_t i = 0; i < new_cells.size(); ++i) {
      Point2 centroid = (1.0 / 3.0) * (geom[i][0] + geom[i][1] + geom[i][2]);
      PhaseLabel side = chain ? chain->side_of(centroid) : ring_side_of(s, centroid);
      labels[i] = side;
      subset.clear();
      weights.clear();
      double wtot = 0.0;
      for (std::size_t j = 0; j < old_st.entries.size(); ++j) {
        PhaseLabel l = old_st.entries[j].label;
        if (l != side && l != PhaseLabel::unset) continue;
        double w = kind == ProjectionKind::local_average
                       ? old_st.entries[j].area
                       : triangle_overlap_area(geom[i], old_st.entries[j].pos);
        if (w > 0.0) {
          subset.push_back(static_cast<int>(j));
          weights.push_back(w);
          wtot += w;
        }
      }
      if (subset.empty()) {
        /* no same-side donor overlaps: fall back to same-side areas, then to
         * the whole stencil */
        for (std::size_t j = 0; j < old_st.entries.size(); ++j) {
          PhaseLabel l = old_st.entries[j].label;
          if (l != side && l != PhaseLabel::unset) continue;
          subset.push_back(static_cast<int>(j));
          weights.push_back(old_st.entries[j].area);
          wtot += old_st.entries[j].area;
        }
      }
      if (subset.empty()) {
        for (std::size_t j = 0; j < old_st.entries.size(); ++j) {
          subset.push_back(static_cast<int>(j));
          weights.push_back(old_st.entries[j].area);
          wtot += old_st.entries[j].area;
        }
      }
      values.push_back(detail::anchored_mean(old_st, subset, weights, wtot));
    }
  }

  std::array<double, DataVector::kMaxDim> delta{};
  for (int c = 0; c < m; ++c) delta[c] = -mass_old[c];
  for (std::size_t i = 0; i < new_cells.size(); ++i) {
    double a = s.mesh.cell_area(new_cells[i]);
    for (int c = 0; c < m; ++c) delta[c] += values[i][c] * a;
    s.mesh.set_cell_data(new_cells[i], values[i]);
    s.mesh.set_cell_label(new_cells[i], labels[i]);
  }
  s.note_mass_delta(delta.data(), scale.data(), m, !straddle);
}

}  // namespace detail

/* Remove an interior vertex, projecting its star onto the refilled hole. */
inline void remove_vertex_with_data(SimulationState& s, VertexId v,
                                    ProjectionKind kind,
                                    const LocalChain* chain = nullptr) {
  Point2 old_pos = s.mesh.position(v);
  Triangulation::RemoveResult res = s.mesh.remove(v);
  s.vertex_grid.remove(old_pos, v.key());
  detail::refresh_cell_caches(s, res.destroyed, res.created);
  Stencil old_st;
  detail::add_donors(old_st, res.destroyed);
  std::vector<CellId> new_cells;
  detail::add_targets(new_cells, res.created);
  detail::apply_projection(s, old_st, new_cells, kind, chain);
}

/* Insert a vertex, projecting the cells it displaces onto its new star. */
inline VertexId insert_vertex_with_data(SimulationState& s, Point2 p,
                                        ProjectionKind kind,
                                        VertexKind vkind = VertexKind::bulk,
                                        const LocalChain* chain = nullptr) {
  Triangulation::InsertResult res = s.mesh.insert(p, vkind);
  s.vertex_grid.insert(p, res.vertex.key());
  detail::refresh_cell_caches(s, res.destroyed, res.created);
  Stencil old_st;
  detail::add_donors(old_st, res.destroyed);
  std::vector<CellId> new_cells;
  detail::add_targets(new_cells, res.created);
  detail::apply_projection(s, old_st, new_cells, kind, chain);
  return res.vertex;
}

/* Shift an interior vertex by less than its clearance radius.  The donors are
 * the pre-existing cells destroyed by either phase of the move; the targets
 * are the cells alive afterwards.  Refill cells consumed by the reinsertion
 * are transient and sit on neither side, so both stencils tile exactly the
 * re-triangulated region even when nearby points are exactly cocircular. */
inline void move_vertex_with_data(SimulationState& s, VertexId v, Point2 target,
                                  ProjectionKind kind,
                                  const LocalChain* chain = nullptr) {
  Point2 from = s.mesh.position(v);
  if (from == target) return;
  double w = omega_vertex(s.mesh, v);
  if (!(dist(from, target) < w))
    throw MoveTooFarError("move_vertex_with_data: displacement reaches the clearance radius");
  Triangulation::MoveResult res = s.mesh.move_vertex(v, target);
  s.vertex_grid.move(from, target, v.key());
  detail::refresh_cell_caches(s, res.hole_destroyed, res.hole_created);
  detail::refresh_cell_caches(s, res.insert_destroyed, res.insert_created);
  std::unordered_set<uint64_t> refill, consumed;
  for (const CellSnapshot& c : res.hole_created) refill.insert(c.id.key());
  for (const CellSnapshot& c : res.insert_destroyed) consumed.insert(c.id.key());
  Stencil old_st;
  detail::add_donors(old_st, res.hole_destroyed);
  detail::add_donors(old_st, res.insert_destroyed, &refill);
  std::vector<CellId> new_ids;
  detail::add_targets(new_ids, res.hole_created, &consumed);
  detail::add_targets(new_ids, res.insert_created);
  detail::apply_projection(s, old_st, new_ids, kind, chain);
}

}  // namespace ipmm

#endif
