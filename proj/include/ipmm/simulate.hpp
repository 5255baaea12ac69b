#ifndef IPMM_SIMULATE_HPP
#define IPMM_SIMULATE_HPP

/* The benchmark layer: prescribed motion fields, initial shapes, the per-step
 * driver (front advance with step halving, optional bulk flux update, front
 * re-fitting), and the error measures the runs report. */

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipmm/interface.hpp"
#include "ipmm/meshgen.hpp"

namespace ipmm {

inline constexpr double kPi = 3.14159265358979323846;

/* ---- motion fields ------------------------------------------------------ */

/* Pulsing star: anti-symmetric in time over each unit interval, so the shape
 * returns to the initial circle at every integer time; the lobe count grows
 * with ceil(t). */
inline Point2 star_velocity(double t, Point2 x) {
  double lobes = 2.0 * std::ceil(t);
  double f = -std::sin(2.0 * kPi * t) * std::cos(lobes * std::atan2(x.y, x.x));
  return f * x;
}

/* Single vortex on the unit square, divergence free, zero on the walls; the
 * cosine factor reverses the flow at period/2 so the motion rewinds itself by
 * t = period. */
inline Point2 vortex_velocity(double t, Point2 x, double period) {
  double f = std::cos(kPi * t / period);
  double sx = std::sin(kPi * x.x), sy = std::sin(kPi * x.y);
  return f * Point2{sx * sx * std::sin(2.0 * kPi * x.y),
                    -std::sin(2.0 * kPi * x.x) * sy * sy};
}

/* Rigid counterclockwise rotation about the origin at unit angular speed. */
inline Point2 rotation_velocity(double, Point2 x) { return {-x.y, x.x}; }

/* Counterclockwise rotation of a point about the origin. */
inline Point2 rotate_origin(Point2 p, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

/* ---- initial shapes ----------------------------------------------------- */

inline std::vector<Point2> circle_polygon(Point2 c, double r, double spacing) {
  long m = std::max<long>(8, std::lround(2.0 * kPi * r / spacing));
  std::vector<Point2> out;
  out.reserve(m);
  for (long i = 0; i < m; ++i) {
    double a = 2.0 * kPi * double(i) / double(m);
    out.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return out;
}

/* A disk with a rectangular slot cut in from below: the classic rotating
 * shape with two concave corners.  half_width is half the slot width,
 * slot_top the y level where the slot ends inside the disk. */
struct SlottedDisk {
  Point2 center{0.0, 2.0};
  double radius = 1.0;
  double half_width = 0.15;
  double slot_top = 2.2;

  bool contains(Point2 p) const {
    Point2 d = p - center;
    if (d.x * d.x + d.y * d.y > radius * radius) return false;
    return !(std::abs(d.x) <= half_width && p.y <= slot_top);
  }

  /* Counterclockwise boundary polygon with segment lengths at most spacing.
   * The four slot corners are kept exact. */
  std::vector<Point2> polygon(double spacing) const {
    double jy = center.y - std::sqrt(radius * radius - half_width * half_width);
    Point2 jr{center.x + half_width, jy};  /* right slot-circle junction */
    Point2 jl{center.x - half_width, jy};
    Point2 tl{center.x - half_width, slot_top};
    Point2 tr{center.x + half_width, slot_top};

    std::vector<Point2> out;
    double a0 = std::atan2(jr.y - center.y, jr.x - center.x);
    double a1 = std::atan2(jl.y - center.y, jl.x - center.x) + 2.0 * kPi;
    long n_arc = std::max<long>(3, (long)std::ceil((a1 - a0) * radius / spacing));
    out.push_back(jr);  /* not through cos/sin, which would blur the corner */
    for (long i = 1; i < n_arc; ++i) {
      double a = a0 + (a1 - a0) * double(i) / double(n_arc);
      out.push_back({center.x + radius * std::cos(a),
                     center.y + radius * std::sin(a)});
    }
    auto wall = [&](Point2 from, Point2 to) {
      long n = std::max<long>(1, (long)std::ceil(dist(from, to) / spacing));
      for (long i = 0; i < n; ++i)
        out.push_back(from + (double(i) / double(n)) * (to - from));
    };
    wall(jl, tl);  /* up the left slot wall */
    wall(tl, tr);  /* across the slot top */
    wall(tr, jr);  /* down the right slot wall */
    return out;
  }
};

/* ---- benchmark definitions ---------------------------------------------- */

enum class BenchmarkKind { star2d, vortex2d, circadv };

struct BenchmarkDef {
  BenchmarkKind kind;
  std::string name;
  Point2 lo, hi;     /* simulation box */
  double t_end;      /* canonical run length */
  double dt;         /* canonical step */
  std::function<Point2(double, Point2)> velocity;
  std::function<std::vector<Point2>(double)> front; /* initial polygon */
};

inline BenchmarkDef benchmark_def(BenchmarkKind k) {
  BenchmarkDef d;
  d.kind = k;
  switch (k) {
    case BenchmarkKind::star2d:
      d.name = "star2d";
      d.lo = {-1.0, -1.0};
      d.hi = {1.0, 1.0};
      d.t_end = 3.0;
      d.dt = 2e-4;
      d.velocity = star_velocity;
      d.front = [](double s) { return circle_polygon({0.0, 0.0}, 0.5, s); };
      break;
    case BenchmarkKind::vortex2d:
      d.name = "vortex2d";
      d.lo = {0.0, 0.0};
      d.hi = {1.0, 1.0};
      d.t_end = 8.0;
      d.dt = 1e-4;
      d.velocity = [](double t, Point2 x) { return vortex_velocity(t, x, 8.0); };
      d.front = [](double s) { return circle_polygon({0.5, 0.75}, 0.15, s); };
      break;
    case BenchmarkKind::circadv:
      d.name = "circadv";
      d.lo = {-4.0, -4.0};
      d.hi = {4.0, 4.0};
      d.t_end = kPi / 2.0;
      d.dt = 1e-4;
      d.velocity = rotation_velocity;
      d.front = [](double s) { return SlottedDisk{}.polygon(s); };
      break;
  }
  return d;
}

inline BenchmarkDef benchmark_by_name(const std::string& name) {
  if (name == "star2d") return benchmark_def(BenchmarkKind::star2d);
  if (name == "vortex2d") return benchmark_def(BenchmarkKind::vortex2d);
  if (name == "circadv") return benchmark_def(BenchmarkKind::circadv);
  throw Error("unknown benchmark: " + name);
}

/* ---- measures ----------------------------------------------------------- */

/* Total of u_k * |C| over real cells (Kahan). */
inline double total_mass(const Triangulation& t, int comp = 0) {
  double sum = 0.0, cc = 0.0;
  for (CellId c : t.cell_ids()) {
    double term = t.cell_data(c)[comp] * t.cell_area(c);
    double y = term - cc;
    double s2 = sum + y;
    cc = (s2 - sum) - y;
    sum = s2;
  }
  return sum;
}

struct RadialDeviation {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0; /* signed */
};

/* Signed distance statistics of the front vertices from a reference circle. */
inline RadialDeviation circle_deviation(const SimulationState& s, Point2 center,
                                        double radius) {
  RadialDeviation out;
  if (s.iface.ring.empty()) return out;
  out.min = std::numeric_limits<double>::infinity();
  out.max = -out.min;
  double acc = 0.0;
  for (VertexId v : s.iface.ring) {
    double d = dist(s.mesh.position(v), center) - radius;
    out.min = std::min(out.min, d);
    out.max = std::max(out.max, d);
    acc += d;
  }
  out.mean = acc / double(s.iface.ring.size());
  return out;
}

/* L1 distance between the piecewise-constant cell field and a reference
 * function, by uniform 4-way triangle subdivision (4^depth panels per cell,
 * midpoint rule per panel). */
inline double l1_error(const Triangulation& t,
                       const std::function<double(Point2)>& exact,
                       int comp = 0, int depth = 4) {
  std::function<double(Point2, Point2, Point2, double, int)> panel =
      [&](Point2 a, Point2 b, Point2 c, double u, int d) -> double {
    if (d == 0) {
      Point2 g = (1.0 / 3.0) * (a + b + c);
      return std::abs(u - exact(g)) * triangle_area(a, b, c);
    }
    Point2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
    return panel(a, ab, ca, u, d - 1) + panel(ab, b, bc, u, d - 1) +
           panel(ca, bc, c, u, d - 1) + panel(ab, bc, ca, u, d - 1);
  };
  double sum = 0.0, cc = 0.0;
  for (CellId c : t.cell_ids()) {
    CellSnapshot s = t.snapshot(c);
    double term = panel(s.pos[0], s.pos[1], s.pos[2], t.cell_data(c)[comp], depth);
    double y = term - cc;
    double s2 = sum + y;
    cc = (s2 - sum) - y;
    sum = s2;
  }
  return sum;
}

/* Average of f over a triangle, same subdivision quadrature as l1_error:
 * 4^depth congruent panels, midpoint sample each. */
inline double triangle_average(const std::function<double(Point2)>& f, Point2 a,
                               Point2 b, Point2 c, int depth = 4) {
  std::function<double(Point2, Point2, Point2, int)> panel =
      [&](Point2 pa, Point2 pb, Point2 pc, int d) -> double {
    if (d == 0) return f((1.0 / 3.0) * (pa + pb + pc));
    Point2 ab = 0.5 * (pa + pb), bc = 0.5 * (pb + pc), ca = 0.5 * (pc + pa);
    return panel(pa, ab, ca, d - 1) + panel(ab, pb, bc, d - 1) +
           panel(ca, bc, pc, d - 1) + panel(ab, bc, ca, d - 1);
  };
  double scale = 1.0;
  for (int i = 0; i < depth; ++i) scale *= 0.25;
  return panel(a, b, c, depth) * scale;
}

/* ---- bulk finite-volume updates ----------------------------------------- */

/* Signed area swept by the oriented edge a->b when its endpoints move to
 * a2/b2; positive toward the right of a->b, which is outward for an edge
 * traversed in a cell's counterclockwise order.  Summed over a cell's edges
 * this reproduces the cell's area change exactly. */
inline double edge_swept_area(Point2 a, Point2 b, Point2 a2, Point2 b2) {
  auto cr = [](Point2 p, Point2 q) { return p.x * q.y - p.y * q.x; };
  return -0.5 * (cr(a, b) + cr(b, b2) + cr(b2, a2) + cr(a2, a));
}

namespace detail {

/* Shared first-order upwind pass.  prev_pos gives pre-step positions for
 * vertices that moved this step (missing = did not move); when given, fluxes
 * use the velocity relative to the edge sweep and edges of the front ring
 * carry no flux at all (they move with the material).  Zero flux through the
 * outer hull. */
inline void upwind_pass(SimulationState& s, double t, double dt,
                        const std::unordered_map<uint64_t, Point2>* prev_pos) {
  const int m = s.data_dim();
  std::vector<CellId> cells = s.mesh.cell_ids();
  std::unordered_map<uint64_t, std::size_t> index;
  index.reserve(cells.size() * 2);
  for (std::size_t i = 0; i < cells.size(); ++i) index[cells[i].key()] = i;

  double vmax = 0.0;
  for (CellId c : cells) {
    CellSnapshot snap = s.mesh.snapshot(c);
    Point2 g = (1.0 / 3.0) * (snap.pos[0] + snap.pos[1] + snap.pos[2]);
    vmax = std::max(vmax, norm(s.velocity(t, g)));
  }
  if (dt * vmax > s.min_insphere_diameter())
    throw Error("fv_step: time step exceeds the CFL bound for this mesh");

  std::vector<std::array<double, DataVector::kMaxDim>> acc(
      cells.size(), std::array<double, DataVector::kMaxDim>{});

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellView cv = s.mesh.cell(cells[ci]);
    for (int i = 0; i < 3; ++i) {
      CellId nb = cv.neighbors[i];
      if (!nb.valid() || s.mesh.cell_is_ghost(nb)) continue; /* hull: no flux */
      if (!(cells[ci].key() < nb.key())) continue;           /* one visit per edge */
      VertexId va = cv.vertices[(i + 1) % 3], vb = cv.vertices[(i + 2) % 3];
      if (prev_pos && s.is_ring_edge(va, vb)) continue;      /* moves with material */

      Point2 a = s.mesh.position(va), b = s.mesh.position(vb);
      Point2 n_len{b.y - a.y, a.x - b.x}; /* outward for this cell, length-scaled */
      double phi = dot(s.velocity(t, 0.5 * (a + b)), n_len);
      if (prev_pos) {
        auto ia = prev_pos->find(va.key());
        auto ib = prev_pos->find(vb.key());
        if (ia != prev_pos->end() || ib != prev_pos->end()) {
          Point2 a0 = ia == prev_pos->end() ? a : ia->second;
          Point2 b0 = ib == prev_pos->end() ? b : ib->second;
          phi -= edge_swept_area(a0, b0, a, b) / dt;
        }
      }

      std::size_t ni = index.at(nb.key());
      const DataVector& up =
          phi >= 0.0 ? s.mesh.cell_data(cells[ci]) : s.mesh.cell_data(nb);
      for (int k = 0; k < m; ++k) {
        double f = dt * phi * up[k];
        acc[ci][k] -= f;
        acc[ni][k] += f;
      }
    }
  }

  /* apply and fold the realized total change into the mass ledger;
   * u_new = (u * old_area + fluxes) / new_area, with the old area taken from
   * the same pre-step positions as the edge sweeps so that cells squeezed or
   * stretched by the front keep phase-constant data exactly */
  std::array<double, DataVector::kMaxDim> delta{}, comp{};
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    double area = s.mesh.cell_area(cells[ci]);
    double area0 = area;
    if (prev_pos) {
      CellSnapshot snap = s.mesh.snapshot(cells[ci]);
      bool touched = false;
      std::array<Point2, 3> old = snap.pos;
      for (int j = 0; j < 3; ++j) {
        auto it = prev_pos->find(snap.vertices[j].key());
        if (it != prev_pos->end()) {
          old[j] = it->second;
          touched = true;
        }
      }
      if (touched) area0 = triangle_area(old[0], old[1], old[2]);
    }
    DataVector u = s.mesh.cell_data(cells[ci]);
    for (int k = 0; k < m; ++k) {
      double du = (u[k] * (area0 - area) + acc[ci][k]) / area;
      if (du == 0.0) continue;
      u[k] += du;
      double term = du * area;
      double y = term - comp[k];
      double s2 = delta[k] + y;
      comp[k] = (s2 - delta[k]) - y;
      delta[k] = s2;
    }
    s.mesh.set_cell_data(cells[ci], u);
  }
  std::array<double, DataVector::kMaxDim> scale{};
  scale.fill(1.0);
  s.note_mass_delta(delta.data(), scale.data(), m, false);
}

}  // namespace detail

/* Upwind step on a static mesh (every edge carries the plain flux). */
inline void fv_step_static(SimulationState& s, double t, double dt) {
  detail::upwind_pass(s, t, dt, nullptr);
}

/* Upwind step after a front advance: fluxes are relative to the mesh motion
 * captured in prev_pos, and front-ring edges carry none. */
inline void fv_step_ipmm(SimulationState& s, double t, double dt,
                         const std::unordered_map<uint64_t, Point2>& prev_pos) {
  detail::upwind_pass(s, t, dt, &prev_pos);
}

/* ---- per-step driver ----------------------------------------------------- */

struct AdvanceOutcome {
  MoveReport move;      /* summed over sub-steps */
  std::size_t refined = 0;
  std::size_t coarsened = 0;
  int halvings = 0;     /* deepest step subdivision used */
};

namespace detail {

/* Advance the front from time t by dt, halving the step (depth-capped) when
 * a hop would reach the mesh clearance bound.  Returns with the thresholds
 * freshly computed and, optionally, the pre-step ring positions captured. */
inline AdvanceOutcome advance_front(SimulationState& s, double t, double dt,
                                    ProjectionKind kind, StepMetrics* met,
                                    std::unordered_map<uint64_t, Point2>* prev) {
  s.thr = compute_thresholds(s.mesh, s.iface, met);
  if (prev) {
    prev->clear();
    for (VertexId v : s.iface.ring) (*prev)[v.key()] = s.mesh.position(v);
  }

  AdvanceOutcome out;
  double eps = 0.0;
  std::unordered_map<uint64_t, Point2> targets;
  std::function<void(double, double, int)> go = [&](double t0, double h, int d) {
    targets.clear();
    for (VertexId v : s.iface.ring) {
      Point2 p = s.mesh.position(v);
      targets[v.key()] = p + h * s.velocity(t0, p);
    }
    try {
      MoveReport r = move_interface(s, targets, kind, met);
      out.move.removed_ensure += r.removed_ensure;
      out.move.removed_coarse += r.removed_coarse;
      out.move.reinserted += r.reinserted;
      out.move.moved += r.moved;
      eps = std::max(eps, r.epsilon);
    } catch (const MoveTooFarError&) {
      if (d >= 6) throw;
      out.halvings = std::max(out.halvings, d + 1);
      go(t0, 0.5 * h, d + 1);
      go(t0 + 0.5 * h, 0.5 * h, d + 1);
    }
  };
  go(t, dt, 0);
  out.move.epsilon = eps;
  s.epsilon_last = eps;
  return out;
}

/* Re-fit the front spacing after an advance. */
inline void refit_front(SimulationState& s, ProjectionKind kind,
                        AdvanceOutcome& out, StepMetrics* met) {
  auto t0 = std::chrono::steady_clock::now();
  out.refined = refine_interface(s, s.thr, kind);
  if (met) met->refine_interface_s += seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  out.coarsened = coarsen_interface(s, s.thr, kind);
  if (met) met->coarsen_interface_s += seconds_since(t0);
}

}  // namespace detail

/* One step of the front-only run. */
inline AdvanceOutcome step_interface_only(SimulationState& s, double t, double dt,
                                          ProjectionKind kind,
                                          StepMetrics* met = nullptr) {
  AdvanceOutcome out = detail::advance_front(s, t, dt, kind, met, nullptr);
  detail::refit_front(s, kind, out, met);
  return out;
}

/* One step of the combined run: front advance, bulk flux update relative to
 * the realized mesh motion, then the front re-fit. */
inline AdvanceOutcome step_with_flux(SimulationState& s, double t, double dt,
                                     ProjectionKind kind,
                                     StepMetrics* met = nullptr) {
  std::unordered_map<uint64_t, Point2> prev;
  AdvanceOutcome out = detail::advance_front(s, t, dt, kind, met, &prev);
  auto t0 = std::chrono::steady_clock::now();
  fv_step_ipmm(s, t, dt, prev);
  if (met) met->fv_s += detail::seconds_since(t0);
  detail::refit_front(s, kind, out, met);
  return out;
}

/* ---- state assembly ------------------------------------------------------ */

/* Background mesh + front + indicator payload (u = 1 inside the front, else
 * 0), with caches sized to the mesh spacing and the mass ledger zeroed so a
 * run's drift measures only what happens after seeding. */
inline SimulationState make_benchmark_state(const BenchmarkDef& def, double dx,
                                            double front_spacing, uint64_t seed,
                                            ProjectionKind kind) {
  SimulationState s;
  s.mesh = generate_initial_mesh(def.lo, def.hi, dx, seed, 1);
  s.velocity = def.velocity;
  s.background.reset(dx);
  s.rebuild_caches(dx);
  seed_interface(s, def.front(front_spacing), kind);
  for (CellId c : s.mesh.cell_ids()) {
    DataVector d(1);
    d[0] = s.mesh.cell_label(c) == PhaseLabel::inside ? 1.0 : 0.0;
    s.mesh.set_cell_data(c, d);
  }
  s.declared_delta = 0.0;
  s.declared_delta_comp = 0.0;
  s.max_sidepure_rel = 0.0;
  s.time = 0.0;
  return s;
}

}  // namespace ipmm

#endif
