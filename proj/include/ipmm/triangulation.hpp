#ifndef IPMM_TRIANGULATION_HPP
#define IPMM_TRIANGULATION_HPP

/* Incremental 2D Delaunay triangulation with stable ids.
 *
 * The convex hull is closed off by "ghost" cells: one pseudo-triangle
 * (head, tail, INF) per counterclockwise hull edge tail->head.  Ghosts make
 * insertion fully uniform (a point outside the hull simply conflicts with
 * the ghosts of the hull edges it can see) and give O(1) hull traversal.
 * Ghost cells never appear in public results.
 *
 * Vertices and cells live in slot arenas with generation counters: freeing a
 * slot bumps its generation, so stale ids are detected instead of silently
 * aliasing.  move_vertex keeps the vertex id alive across the relocation,
 * which callers rely on for long-lived handles.
 */

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ipmm/data.hpp"
#include "ipmm/errors.hpp"
#include "ipmm/geom.hpp"

namespace ipmm {

struct VertexId {
  uint32_t slot = std::numeric_limits<uint32_t>::max();
  uint32_t gen = 0;

  bool valid() const { return slot != std::numeric_limits<uint32_t>::max(); }
  uint64_t key() const { return (uint64_t(slot) << 32) | gen; }
  friend bool operator==(VertexId a, VertexId b) {
    return a.slot == b.slot && a.gen == b.gen;
  }
  friend bool operator!=(VertexId a, VertexId b) { return !(a == b); }
  friend bool operator<(VertexId a, VertexId b) {
    return a.slot != b.slot ? a.slot < b.slot : a.gen < b.gen;
  }
};

struct CellId {
  uint32_t slot = std::numeric_limits<uint32_t>::max();
  uint32_t gen = 0;

  bool valid() const { return slot != std::numeric_limits<uint32_t>::max(); }
  uint64_t key() const { return (uint64_t(slot) << 32) | gen; }
  friend bool operator==(CellId a, CellId b) {
    return a.slot == b.slot && a.gen == b.gen;
  }
  friend bool operator!=(CellId a, CellId b) { return !(a == b); }
  friend bool operator<(CellId a, CellId b) {
    return a.slot != b.slot ? a.slot < b.slot : a.gen < b.gen;
  }
};

enum class VertexKind : uint8_t { bulk, iface, boundary };

namespace detail {
/* Relaxed atomic that is copyable/movable so the owning mesh stays a regular
 * value type.  Used for the walk-start hint, which concurrent read-only
 * queries may update racily but harmlessly. */
struct RelaxedHint {
  std::atomic<uint64_t> v{~uint64_t(0)};
  RelaxedHint() = default;
  RelaxedHint(const RelaxedHint& o) : v(o.load()) {}
  RelaxedHint& operator=(const RelaxedHint& o) {
    store(o.load());
    return *this;
  }
  uint64_t load() const { return v.load(std::memory_order_relaxed); }
  void store(uint64_t x) { v.store(x, std::memory_order_relaxed); }
};
}  // namespace detail

struct VertexView {
  VertexId id;
  Point2 position;
  VertexKind kind;
};

struct CellView {
  CellId id;
  std::array<VertexId, 3> vertices;  /* counterclockwise */
  std::array<CellId, 3> neighbors;   /* neighbor i is opposite vertex i */
  DataVector data;
  PhaseLabel label;
};

/* Frozen geometry of a cell that may no longer exist; the unit of stencil
 * bookkeeping in the data-transfer layer. */
struct CellSnapshot {
  CellId id;
  std::array<VertexId, 3> vertices;
  std::array<Point2, 3> pos;
  DataVector data;
  PhaseLabel label = PhaseLabel::unset;
  bool ghost = false;

  double area() const { return triangle_area(pos[0], pos[1], pos[2]); }
};

struct Violation {
  CellId cell;  /* invalid id for mesh-level violations */
  std::string message;
};

class Triangulation {
 public:
  struct InsertResult {
    VertexId vertex;
    std::vector<CellSnapshot> created;
    std::vector<CellSnapshot> destroyed;
  };
  struct RemoveResult {
    std::vector<CellSnapshot> created;
    std::vector<CellSnapshot> destroyed;
  };
  struct MoveResult {
    /* phase 1: remove at the old position */
    std::vector<CellSnapshot> hole_destroyed;
    std::vector<CellSnapshot> hole_created;
    /* phase 2: reinsert at the target (may consume phase-1 cells) */
    std::vector<CellSnapshot> insert_destroyed;
    std::vector<CellSnapshot> insert_created;
    bool moved = false;  /* false for a no-op move onto the same position */
  };

  explicit Triangulation(int data_dim = 1) : data_dim_(data_dim) {
    if (data_dim < 0 || data_dim > DataVector::kMaxDim)
      throw Error("Triangulation: unsupported data dimension");
  }

  static Triangulation build(const std::vector<std::pair<Point2, VertexKind>>& points,
                             int data_dim = 1);

  /* ---- queries ---------------------------------------------------------- */

  std::optional<CellId> locate(Point2 p) const;
  std::vector<CellId> conflict_zone(Point2 p) const;
  std::vector<Violation> validate_delaunay() const;

  int data_dim() const { return data_dim_; }
  std::size_t vertex_count() const { return alive_vertices_; }
  std::size_t real_cell_count() const { return alive_real_cells_; }
  std::size_t hull_vertex_count() const { return alive_ghost_cells_; }

  bool vertex_alive(VertexId v) const {
    return v.slot < verts_.size() && verts_[v.slot].alive &&
           verts_[v.slot].gen == v.gen;
  }
  bool cell_alive(CellId c) const {
    return c.slot < cells_.size() && cells_[c.slot].alive &&
           cells_[c.slot].gen == c.gen;
  }
  bool cell_is_ghost(CellId c) const { return cslot(c).ghost; }

  VertexView vertex(VertexId v) const {
    const VSlot& s = vslot(v);
    return {v, s.pos, s.kind};
  }
  Point2 position(VertexId v) const { return vslot(v).pos; }
  VertexKind kind(VertexId v) const { return vslot(v).kind; }
  void set_kind(VertexId v, VertexKind k) { vslot_mut(v).kind = k; }

  CellView cell(CellId c) const {
    const CSlot& s = cslot(c);
    CellView out;
    out.id = c;
    for (int i = 0; i < 3; ++i) {
      out.vertices[i] = vid_of_slot(s.v[i]);
      out.neighbors[i] = cid_of_slot(s.n[i]);
    }
    out.data = s.data;
    out.label = static_cast<PhaseLabel>(s.label);
    return out;
  }
  CellSnapshot snapshot(CellId c) const {
    const CSlot& s = cslot(c);
    CellSnapshot out;
    out.id = c;
    for (int i = 0; i < 3; ++i) {
      out.vertices[i] = vid_of_slot(s.v[i]);
      out.pos[i] = s.v[i] == kInf ? Point2{} : verts_[s.v[i]].pos;
    }
    out.data = s.data;
    out.label = static_cast<PhaseLabel>(s.label);
    out.ghost = s.ghost;
    return out;
  }

  const DataVector& cell_data(CellId c) const { return cslot(c).data; }
  void set_cell_data(CellId c, const DataVector& d) { cslot_mut(c).data = d; }
  PhaseLabel cell_label(CellId c) const {
    return static_cast<PhaseLabel>(cslot(c).label);
  }
  void set_cell_label(CellId c, PhaseLabel l) {
    cslot_mut(c).label = static_cast<uint8_t>(l);
  }

  double cell_area(CellId c) const {
    CSlot const& s = cslot(c);
    if (s.ghost) return 0.0;
    return triangle_area(verts_[s.v[0]].pos, verts_[s.v[1]].pos,
                         verts_[s.v[2]].pos);
  }

  std::vector<VertexId> vertex_ids() const {
    std::vector<VertexId> out;
    out.reserve(alive_vertices_);
    for (uint32_t s = 0; s < verts_.size(); ++s)
      if (verts_[s].alive) out.push_back({s, verts_[s].gen});
    return out;
  }
  std::vector<CellId> cell_ids() const {
    std::vector<CellId> out;
    out.reserve(alive_real_cells_);
    for (uint32_t s = 0; s < cells_.size(); ++s)
      if (cells_[s].alive && !cells_[s].ghost) out.push_back({s, cells_[s].gen});
    return out;
  }

  /* Cells around v in counterclockwise order.  Ghosts appear only when v is
   * a hull vertex and include_ghosts is set. */
  std::vector<CellId> incident_cells(VertexId v, bool include_ghosts = false) const;

  /* Link vertices of v in counterclockwise order (the boundary cycle of its
   * star). */
  std::vector<VertexId> vertex_neighbors(VertexId v) const;

  /* Counterclockwise hull cycle. */
  std::vector<VertexId> hull_vertices() const;

  double total_area() const;

  /* ---- mutations -------------------------------------------------------- */

  InsertResult insert(Point2 p, VertexKind kind);
  RemoveResult remove(VertexId v);
  MoveResult move_vertex(VertexId v, Point2 target);

  /* Replace the diagonal shared by cell c and its neighbor opposite vertex i
   * (both real).  A maintenance/testing utility: the result is generally not
   * Delaunay.  Cell data of the two rebuilt cells is zeroed. */
  void flip_edge(CellId c, int i);

 private:
  static constexpr uint32_t kInf = std::numeric_limits<uint32_t>::max() - 1;
  static constexpr uint32_t kNone = std::numeric_limits<uint32_t>::max();

  struct VSlot {
    Point2 pos;
    uint32_t gen = 0;
    uint32_t incident = kNone;  /* some alive real cell touching this vertex */
    VertexKind kind = VertexKind::bulk;
    bool alive = false;
  };
  struct CSlot {
    std::array<uint32_t, 3> v{kNone, kNone, kNone};
    std::array<uint32_t, 3> n{kNone, kNone, kNone};
    DataVector data;
    uint32_t gen = 0;
    uint8_t label = 0;
    bool alive = false;
    bool ghost = false;
  };

  /* ---- arena plumbing --------------------------------------------------- */

  const VSlot& vslot(VertexId v) const {
    if (!vertex_alive(v)) throw MeshError("stale or unknown vertex id");
    return verts_[v.slot];
  }
  VSlot& vslot_mut(VertexId v) {
    if (!vertex_alive(v)) throw MeshError("stale or unknown vertex id");
    return verts_[v.slot];
  }
  const CSlot& cslot(CellId c) const {
    if (!cell_alive(c)) throw MeshError("stale or unknown cell id");
    return cells_[c.slot];
  }
  CSlot& cslot_mut(CellId c) {
    if (!cell_alive(c)) throw MeshError("stale or unknown cell id");
    return cells_[c.slot];
  }
  VertexId vid_of_slot(uint32_t s) const {
    if (s == kInf) return VertexId{};  /* invalid marker for the ghost apex */
    return {s, verts_[s].gen};
  }
  CellId cid_of_slot(uint32_t s) const {
    if (s == kNone) return CellId{};
    return {s, cells_[s].gen};
  }

  uint32_t alloc_vertex(Point2 p, VertexKind kind) {
    uint32_t s;
    if (!free_verts_.empty()) {
      s = free_verts_.back();
      free_verts_.pop_back();
    } else {
      s = static_cast<uint32_t>(verts_.size());
      verts_.emplace_back();
    }
    VSlot& vs = verts_[s];
    vs.pos = p;
    vs.kind = kind;
    vs.alive = true;
    vs.incident = kNone;
    ++alive_vertices_;
    return s;
  }
  void free_vertex(uint32_t s) {
    verts_[s].alive = false;
    verts_[s].gen++;
    free_verts_.push_back(s);
    --alive_vertices_;
  }

  uint32_t alloc_cell(uint32_t a, uint32_t b, uint32_t c) {
    uint32_t s;
    if (!free_cells_.empty()) {
      s = free_cells_.back();
      free_cells_.pop_back();
    } else {
      s = static_cast<uint32_t>(cells_.size());
      cells_.emplace_back();
    }
    CSlot& cs = cells_[s];
    cs.v = {a, b, c};
    cs.n = {kNone, kNone, kNone};
    cs.data = DataVector(data_dim_);
    cs.label = 0;
    cs.alive = true;
    cs.ghost = (a == kInf || b == kInf || c == kInf);
    if (cs.ghost)
      ++alive_ghost_cells_;
    else
      ++alive_real_cells_;
    return s;
  }
  void free_cell(uint32_t s) {
    if (cells_[s].ghost)
      --alive_ghost_cells_;
    else
      --alive_real_cells_;
    cells_[s].alive = false;
    cells_[s].gen++;
    free_cells_.push_back(s);
  }

  /* Register the cell as the incident handle of its finite vertices. */
  void stamp_incident(uint32_t c) {
    if (cells_[c].ghost) return;
    for (uint32_t vs : cells_[c].v) verts_[vs].incident = c;
  }

  /* ---- predicate adapters ---------------------------------------------- */

  int orient_slots(uint32_t a, uint32_t b, Point2 p) const {
    const double pa[2] = {verts_[a].pos.x, verts_[a].pos.y};
    const double pb[2] = {verts_[b].pos.x, verts_[b].pos.y};
    const double pp[2] = {p.x, p.y};
    return detail::orient2d_sign(pa, pb, pp);
  }

  /* Conflict ("would be destroyed by inserting x"): a real cell conflicts
   * when x is inside or on its circumcircle; a ghost conflicts when x is
   * strictly outside its hull edge, or exactly on the open edge segment. */
  bool in_conflict(uint32_t c, Point2 x) const {
    const CSlot& s = cells_[c];
    if (s.ghost) {
      uint32_t head = s.v[0], tail = s.v[1];
      int o = orient_slots(tail, head, x);
      if (o < 0) return true;
      if (o > 0) return false;
      Point2 a = verts_[tail].pos, b = verts_[head].pos;
      return dot(x - a, b - a) > 0.0 && dot(x - b, a - b) > 0.0;
    }
    const double pa[2] = {verts_[s.v[0]].pos.x, verts_[s.v[0]].pos.y};
    const double pb[2] = {verts_[s.v[1]].pos.x, verts_[s.v[1]].pos.y};
    const double pc[2] = {verts_[s.v[2]].pos.x, verts_[s.v[2]].pos.y};
    const double pp[2] = {x.x, x.y};
    return detail::in_circle_sign(pa, pb, pc, pp) >= 0;
  }

  /* ---- walk / cavity internals ----------------------------------------- */

  struct WalkEnd {
    uint32_t cell = kNone;  /* real containing cell, or conflicting ghost */
    bool outside = false;
  };
  WalkEnd walk(Point2 p) const;

  std::vector<uint32_t> collect_conflicts(uint32_t seed, Point2 x) const;
  std::vector<uint32_t> retriangulate_cavity(const std::vector<uint32_t>& cavity,
                                             uint32_t x_slot);
  void destroy_cells(const std::vector<uint32_t>& slots);
  void wire_new_cells(const std::vector<uint32_t>& fresh,
                      const std::unordered_map<uint64_t, uint32_t>& boundary_owner);

  std::vector<uint32_t> star_slots(uint32_t v) const;

  uint32_t any_real_cell() const {
    for (uint32_t s = 0; s < cells_.size(); ++s)
      if (cells_[s].alive && !cells_[s].ghost) return s;
    throw MeshError("empty triangulation");
  }

  static uint64_t edge_key(uint32_t a, uint32_t b) {
    return (uint64_t(a) << 32) | b;
  }

  void snapshot_slots(const std::vector<uint32_t>& slots,
                      std::vector<CellSnapshot>& out) const {
    out.reserve(out.size() + slots.size());
    for (uint32_t s : slots) {
      CellSnapshot snap;
      snap.id = {s, cells_[s].gen};
      for (int i = 0; i < 3; ++i) {
        uint32_t vs = cells_[s].v[i];
        snap.vertices[i] = vs == kInf ? VertexId{} : VertexId{vs, verts_[vs].gen};
        snap.pos[i] = vs == kInf ? Point2{} : verts_[vs].pos;
      }
      snap.data = cells_[s].data;
      snap.label = static_cast<PhaseLabel>(cells_[s].label);
      snap.ghost = cells_[s].ghost;
      out.push_back(snap);
    }
  }

  /* Internal insert used by build(): accepts points outside the current hull
   * and on hull edges. */
  uint32_t insert_any(Point2 p, VertexKind kind);
  void insert_with_slot(uint32_t seed, Point2 p, uint32_t vslot,
                        std::vector<uint32_t>* destroyed_out,
                        std::vector<uint32_t>* created_out);

  /* Ear-clip the link polygon of v (counterclockwise slot cycle) into
   * triangles that restore the Delaunay property inside the hole. */
  static std::vector<std::array<uint32_t, 3>> delaunay_ear_clip(
      const std::vector<uint32_t>& poly, const std::vector<VSlot>& verts);

  void remove_core(uint32_t vslot, std::vector<uint32_t>& destroyed,
                   std::vector<uint32_t>& created);

  int data_dim_ = 1;
  std::vector<VSlot> verts_;
  std::vector<CSlot> cells_;
  std::vector<uint32_t> free_verts_;
  std::vector<uint32_t> free_cells_;
  std::size_t alive_vertices_ = 0;
  std::size_t alive_real_cells_ = 0;
  std::size_t alive_ghost_cells_ = 0;
  mutable detail::RelaxedHint walk_hint_;
};

/* ---- scratch marks (thread-local, epoch based) -------------------------- */

namespace detail {
struct ScratchMarks {
  std::vector<uint32_t> m;
  uint32_t epoch = 0;

  uint32_t begin(std::size_t n) {
    if (m.size() < n) m.resize(n, 0);
    if (++epoch == 0) {
      std::fill(m.begin(), m.end(), 0);
      epoch = 1;
    }
    return epoch;
  }
  bool marked(uint32_t i) const { return m[i] == epoch; }
  void mark(uint32_t i) { m[i] = epoch; }
};
inline ScratchMarks& tl_marks() {
  thread_local ScratchMarks s;
  return s;
}
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
inline uint64_t point_bits(Point2 p) {
  uint64_t a, b;
  static_assert(sizeof(double) == 8);
  __builtin_memcpy(&a, &p.x, 8);
  __builtin_memcpy(&b, &p.y, 8);
  return splitmix64(a ^ splitmix64(b));
}
}  // namespace detail

/* ---- walk --------------------------------------------------------------- */

inline Triangulation::WalkEnd Triangulation::walk(Point2 p) const {
  uint32_t cur = kNone;
  {
    uint64_t h = walk_hint_.load();
    uint32_t s = static_cast<uint32_t>(h >> 32);
    uint32_t g = static_cast<uint32_t>(h);
    if (s < cells_.size() && cells_[s].alive && !cells_[s].ghost &&
        cells_[s].gen == g)
      cur = s;
  }
  if (cur == kNone) cur = any_real_cell();

  uint64_t rng = detail::point_bits(p);
  uint32_t prev = kNone;
  std::size_t limit = 16 * cells_.size() + 64;
  for (std::size_t step = 0; step < limit; ++step) {
    const CSlot& s = cells_[cur];
    if (s.ghost) return {cur, true};
    int sign[3];
    for (int i = 0; i < 3; ++i)
      sign[i] = orient_slots(s.v[(i + 1) % 3], s.v[(i + 2) % 3], p);
    int neg[3], nneg = 0;
    for (int i = 0; i < 3; ++i)
      if (sign[i] < 0) neg[nneg++] = i;
    if (nneg == 0) {
      walk_hint_.store((uint64_t(cur) << 32) | s.gen);
      return {cur, false};
    }
    int pick = neg[0];
    if (nneg > 1) {
      /* Prefer not walking straight back; break remaining ties randomly but
       * deterministically from the query point's bits. */
      int usable[3], nu = 0;
      for (int k = 0; k < nneg; ++k)
        if (s.n[neg[k]] != prev) usable[nu++] = neg[k];
      if (nu == 0) usable[nu++] = neg[0];
      rng = detail::splitmix64(rng + step);
      pick = usable[rng % nu];
    }
    prev = cur;
    cur = s.n[pick];
  }
  throw MeshError("point location walk failed to terminate");
}

/* ---- queries ------------------------------------------------------------ */

inline std::optional<CellId> Triangulation::locate(Point2 p) const {
  WalkEnd end = walk(p);
  if (end.outside) return std::nullopt;
  const CSlot& s = cells_[end.cell];
  int sign[3];
  bool any_zero = false;
  for (int i = 0; i < 3; ++i) {
    sign[i] = orient_slots(s.v[(i + 1) % 3], s.v[(i + 2) % 3], p);
    if (sign[i] == 0) any_zero = true;
  }
  if (!any_zero) return cid_of_slot(end.cell);

  /* p sits on an edge or vertex: collect every containing cell by flooding
   * across the zero edges, then report the smallest id for determinism. */
  detail::ScratchMarks& marks = detail::tl_marks();
  marks.begin(cells_.size());
  std::vector<uint32_t> stack = {end.cell};
  marks.mark(end.cell);
  uint32_t best = end.cell;
  while (!stack.empty()) {
    uint32_t c = stack.back();
    stack.pop_back();
    const CSlot& cs = cells_[c];
    for (int i = 0; i < 3; ++i) {
      if (orient_slots(cs.v[(i + 1) % 3], cs.v[(i + 2) % 3], p) != 0) continue;
      uint32_t nb = cs.n[i];
      if (nb == kNone || marks.marked(nb)) continue;
      marks.mark(nb);
      const CSlot& ns = cells_[nb];
      if (ns.ghost) continue;
      bool contains = true;
      for (int j = 0; j < 3; ++j)
        if (orient_slots(ns.v[(j + 1) % 3], ns.v[(j + 2) % 3], p) < 0)
          contains = false;
      if (!contains) continue;
      if (nb < best) best = nb;
      stack.push_back(nb);
    }
  }
  return cid_of_slot(best);
}

inline std::vector<uint32_t> Triangulation::collect_conflicts(uint32_t seed,
                                                              Point2 x) const {
  detail::ScratchMarks& marks = detail::tl_marks();
  marks.begin(cells_.size());
  std::vector<uint32_t> zone;
  std::vector<uint32_t> stack = {seed};
  marks.mark(seed);
  while (!stack.empty()) {
    uint32_t c = stack.back();
    stack.pop_back();
    zone.push_back(c);
    for (uint32_t nb : cells_[c].n) {
      if (nb == kNone || marks.marked(nb)) continue;
      marks.mark(nb);
      if (in_conflict(nb, x)) stack.push_back(nb);
    }
  }
  return zone;
}

inline std::vector<CellId> Triangulation::conflict_zone(Point2 p) const {
  WalkEnd end = walk(p);
  if (end.outside) throw MeshError("conflict_zone: point outside hull");
  std::vector<uint32_t> zone = collect_conflicts(end.cell, p);
  std::vector<CellId> out;
  out.reserve(zone.size());
  for (uint32_t c : zone)
    if (!cells_[c].ghost) out.push_back(cid_of_slot(c));
  std::sort(out.begin(), out.end());
  return out;
}

/* ---- cavity retriangulation -------------------------------------------- */

inline void Triangulation::destroy_cells(const std::vector<uint32_t>& slots) {
  for (uint32_t s : slots) free_cell(s);
}

inline void Triangulation::wire_new_cells(
    const std::vector<uint32_t>& fresh,
    const std::unordered_map<uint64_t, uint32_t>& boundary_owner) {
  std::unordered_map<uint64_t, std::pair<uint32_t, int>> edges;
  edges.reserve(fresh.size() * 3);
  for (uint32_t c : fresh) {
    const CSlot& s = cells_[c];
    for (int i = 0; i < 3; ++i)
      edges[edge_key(s.v[(i + 1) % 3], s.v[(i + 2) % 3])] = {c, i};
  }
  for (uint32_t c : fresh) {
    CSlot& s = cells_[c];
    for (int i = 0; i < 3; ++i) {
      uint32_t a = s.v[(i + 1) % 3], b = s.v[(i + 2) % 3];
      auto rev = edges.find(edge_key(b, a));
      if (rev != edges.end()) {
        s.n[i] = rev->second.first;
        continue;
      }
      auto out = boundary_owner.find(edge_key(a, b));
      if (out == boundary_owner.end())
        throw MeshError("cavity wiring: unmatched edge");
      uint32_t nb = out->second;
      s.n[i] = nb;
      /* patch the outside cell's back-pointer along the shared edge (b,a) */
      CSlot& ns = cells_[nb];
      bool patched = false;
      for (int j = 0; j < 3; ++j) {
        if (ns.v[(j + 1) % 3] == b && ns.v[(j + 2) % 3] == a) {
          ns.n[j] = c;
          patched = true;
          break;
        }
      }
      if (!patched) throw MeshError("cavity wiring: back-pointer patch failed");
    }
  }
}

inline std::vector<uint32_t> Triangulation::retriangulate_cavity(
    const std::vector<uint32_t>& cavity, uint32_t x_slot) {
  /* Boundary edges of the cavity, each with the surviving cell behind it. */
  detail::ScratchMarks& marks = detail::tl_marks();
  marks.begin(cells_.size());
  for (uint32_t c : cavity) marks.mark(c);

  struct BEdge {
    uint32_t u, w, outside;
  };
  std::vector<BEdge> boundary;
  boundary.reserve(cavity.size() + 2);
  for (uint32_t c : cavity) {
    const CSlot& s = cells_[c];
    for (int i = 0; i < 3; ++i) {
      uint32_t nb = s.n[i];
      if (nb != kNone && marks.marked(nb)) continue;
      boundary.push_back({s.v[(i + 1) % 3], s.v[(i + 2) % 3], nb});
    }
  }

  destroy_cells(cavity);

  std::unordered_map<uint64_t, uint32_t> boundary_owner;
  boundary_owner.reserve(boundary.size());
  std::vector<uint32_t> fresh;
  fresh.reserve(boundary.size());
  for (const BEdge& e : boundary) {
    boundary_owner[edge_key(e.u, e.w)] = e.outside;
    uint32_t c;
    if (e.w == kInf)
      c = alloc_cell(x_slot, e.u, kInf); /* new hull edge u -> x */
    else if (e.u == kInf)
      c = alloc_cell(e.w, x_slot, kInf); /* new hull edge x -> w */
    else
      c = alloc_cell(e.u, e.w, x_slot);
    fresh.push_back(c);
  }
  wire_new_cells(fresh, boundary_owner);
  for (uint32_t c : fresh) stamp_incident(c);
  for (uint32_t c : fresh)
    if (!cells_[c].ghost) {
      walk_hint_.store((uint64_t(c) << 32) | cells_[c].gen);
      break;
    }
  return fresh;
}

inline void Triangulation::insert_with_slot(uint32_t seed, Point2 p,
                                            uint32_t vs,
                                            std::vector<uint32_t>* destroyed_out,
                                            std::vector<uint32_t>* created_out) {
  std::vector<uint32_t> cavity = collect_conflicts(seed, p);
  for (uint32_t c : cavity)
    for (uint32_t v : cells_[c].v)
      if (v != kInf && v != vs && verts_[v].pos == p)
        throw MeshError("insert: duplicate point");
  if (destroyed_out) *destroyed_out = cavity;
  std::vector<uint32_t> fresh = retriangulate_cavity(cavity, vs);
  if (created_out) *created_out = std::move(fresh);
}

inline uint32_t Triangulation::insert_any(Point2 p, VertexKind kind) {
  WalkEnd end = walk(p);
  uint32_t vs = alloc_vertex(p, kind);
  std::vector<uint32_t> destroyed;
  insert_with_slot(end.cell, p, vs, &destroyed, nullptr);
  return vs;
}

inline Triangulation::InsertResult Triangulation::insert(Point2 p,
                                                         VertexKind kind) {
  WalkEnd end = walk(p);
  if (end.outside) throw MeshError("insert: point outside hull");
  std::vector<uint32_t> cavity = collect_conflicts(end.cell, p);
  for (uint32_t c : cavity) {
    if (cells_[c].ghost)
      throw MeshError("insert: point on hull boundary");
    for (uint32_t v : cells_[c].v)
      if (verts_[v].pos == p) throw MeshError("insert: duplicate point");
  }
  InsertResult res;
  snapshot_slots(cavity, res.destroyed);
  uint32_t vs = alloc_vertex(p, kind);
  res.vertex = {vs, verts_[vs].gen};
  std::vector<uint32_t> fresh = retriangulate_cavity(cavity, vs);
  snapshot_slots(fresh, res.created);
  return res;
}

/* ---- removal ------------------------------------------------------------ */

inline std::vector<uint32_t> Triangulation::star_slots(uint32_t v) const {
  uint32_t start = verts_[v].incident;
  if (start == kNone || !cells_[start].alive)
    throw MeshError("star: missing incident cell");
  std::vector<uint32_t> out;
  uint32_t cur = start;
  do {
    const CSlot& s = cells_[cur];
    int k = -1;
    for (int i = 0; i < 3; ++i)
      if (s.v[i] == v) k = i;
    if (k < 0) throw MeshError("star: incident walk left the star");
    out.push_back(cur);
    /* step counterclockwise: across the edge (v, v[k+2]), i.e. the neighbor
     * opposite v[k+1] */
    cur = s.n[(k + 1) % 3];
    if (cur == kNone) throw MeshError("star: open fan");
    if (out.size() > cells_.size()) throw MeshError("star: walk did not close");
  } while (cur != start);
  return out;
}

inline std::vector<CellId> Triangulation::incident_cells(VertexId v,
                                                         bool include_ghosts) const {
  const VSlot& s = vslot(v);
  (void)s;
  std::vector<uint32_t> star = star_slots(v.slot);
  std::vector<CellId> out;
  out.reserve(star.size());
  for (uint32_t c : star)
    if (include_ghosts || !cells_[c].ghost) out.push_back(cid_of_slot(c));
  return out;
}

inline std::vector<VertexId> Triangulation::vertex_neighbors(VertexId v) const {
  vslot(v);
  std::vector<uint32_t> star = star_slots(v.slot);
  std::vector<VertexId> out;
  out.reserve(star.size());
  for (uint32_t c : star) {
    const CSlot& s = cells_[c];
    int k = -1;
    for (int i = 0; i < 3; ++i)
      if (s.v[i] == v.slot) k = i;
    uint32_t a = s.v[(k + 1) % 3];
    if (a != kInf) out.push_back(vid_of_slot(a));
  }
  return out;
}

inline std::vector<std::array<uint32_t, 3>> Triangulation::delaunay_ear_clip(
    const std::vector<uint32_t>& poly, const std::vector<VSlot>& verts) {
  std::vector<uint32_t> p = poly;
  std::vector<std::array<uint32_t, 3>> tris;
  tris.reserve(p.size() - 2);
  auto orient_ = [&](uint32_t a, uint32_t b, uint32_t c) {
    const double pa[2] = {verts[a].pos.x, verts[a].pos.y};
    const double pb[2] = {verts[b].pos.x, verts[b].pos.y};
    const double pc[2] = {verts[c].pos.x, verts[c].pos.y};
    return detail::orient2d_sign(pa, pb, pc);
  };
  auto strictly_in_circle = [&](uint32_t a, uint32_t b, uint32_t c, uint32_t q) {
    const double pa[2] = {verts[a].pos.x, verts[a].pos.y};
    const double pb[2] = {verts[b].pos.x, verts[b].pos.y};
    const double pc[2] = {verts[c].pos.x, verts[c].pos.y};
    const double pq[2] = {verts[q].pos.x, verts[q].pos.y};
    return detail::in_circle_sign(pa, pb, pc, pq) > 0;
  };
  while (p.size() > 3) {
    std::size_t n = p.size();
    std::size_t found = n;
    for (std::size_t i = 0; i < n && found == n; ++i) {
      uint32_t a = p[(i + n - 1) % n], b = p[i], c = p[(i + 1) % n];
      if (orient_(a, b, c) <= 0) continue;
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j) {
        uint32_t q = p[j];
        if (q == a || q == b || q == c) continue;
        if (strictly_in_circle(a, b, c, q)) ok = false;
      }
      if (ok) {
        tris.push_back({a, b, c});
        found = i;
      }
    }
    if (found == n) {
      /* Degenerate tie fallback: accept a plain ear (convex corner whose
       * triangle contains no other polygon vertex). */
      for (std::size_t i = 0; i < n && found == n; ++i) {
        uint32_t a = p[(i + n - 1) % n], b = p[i], c = p[(i + 1) % n];
        if (orient_(a, b, c) <= 0) continue;
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
          uint32_t q = p[j];
          if (q == a || q == b || q == c) continue;
          if (orient_(a, b, q) >= 0 && orient_(b, c, q) >= 0 &&
              orient_(c, a, q) >= 0)
            ok = false;
        }
        if (ok) {
          tris.push_back({a, b, c});
          found = i;
        }
      }
    }
    if (found == n) throw MeshError("hole retriangulation found no ear");
    p.erase(p.begin() + found);
  }
  if (orient_(p[0], p[1], p[2]) <= 0)
    throw MeshError("hole retriangulation: degenerate final triangle");
  tris.push_back({p[0], p[1], p[2]});
  return tris;
}

inline void Triangulation::remove_core(uint32_t vs,
                                       std::vector<uint32_t>& destroyed,
                                       std::vector<uint32_t>& created) {
  std::vector<uint32_t> star = star_slots(vs);
  for (uint32_t c : star)
    if (cells_[c].ghost)
      throw MeshError("remove: vertex lies on the hull");

  /* Link polygon, counterclockwise: per star cell (v, a, b) the edge a->b. */
  std::vector<uint32_t> poly;
  poly.reserve(star.size());
  std::unordered_map<uint64_t, uint32_t> outside;  /* link edge -> outer cell */
  outside.reserve(star.size());
  for (uint32_t c : star) {
    const CSlot& s = cells_[c];
    int k = -1;
    for (int i = 0; i < 3; ++i)
      if (s.v[i] == vs) k = i;
    uint32_t a = s.v[(k + 1) % 3], b = s.v[(k + 2) % 3];
    poly.push_back(a);
    outside[edge_key(a, b)] = s.n[k];
  }
  if (poly.size() < 3) throw MeshError("remove: degenerate star");

  std::vector<std::array<uint32_t, 3>> tris = delaunay_ear_clip(poly, verts_);

  destroyed = star;
  destroy_cells(star);
  created.clear();
  created.reserve(tris.size());
  for (const auto& t : tris) created.push_back(alloc_cell(t[0], t[1], t[2]));
  wire_new_cells(created, outside);
  for (uint32_t c : created) stamp_incident(c);
  walk_hint_.store((uint64_t(created[0]) << 32) | cells_[created[0]].gen);
}

inline Triangulation::RemoveResult Triangulation::remove(VertexId v) {
  const VSlot& s = vslot(v);
  if (s.kind == VertexKind::boundary)
    throw MeshError("remove: boundary vertices are fixed");
  RemoveResult res;
  std::vector<uint32_t> destroyed, created;
  {
    /* snapshot before mutation */
    std::vector<uint32_t> star = star_slots(v.slot);
    snapshot_slots(star, res.destroyed);
  }
  remove_core(v.slot, destroyed, created);
  free_vertex(v.slot);
  snapshot_slots(created, res.created);
  return res;
}

/* ---- move --------------------------------------------------------------- */

inline Triangulation::MoveResult Triangulation::move_vertex(VertexId v,
                                                            Point2 target) {
  const VSlot& s = vslot(v);
  if (s.kind == VertexKind::boundary)
    throw MeshError("move_vertex: boundary vertices are fixed");
  MoveResult res;
  if (s.pos == target) return res;

  /* Validate the target before touching the mesh so failures leave it
   * intact. */
  {
    WalkEnd end = walk(target);
    if (end.outside) throw MeshError("move_vertex: target outside hull");
    std::vector<uint32_t> pre = collect_conflicts(end.cell, target);
    for (uint32_t c : pre) {
      if (cells_[c].ghost)
        throw MeshError("move_vertex: target on hull boundary");
      for (uint32_t w : cells_[c].v)
        if (w != v.slot && verts_[w].pos == target)
          throw MeshError("move_vertex: duplicate target position");
    }
  }

  std::vector<uint32_t> hole_destroyed, hole_created;
  {
    std::vector<uint32_t> star = star_slots(v.slot);
    snapshot_slots(star, res.hole_destroyed);
  }
  remove_core(v.slot, hole_destroyed, hole_created);
  snapshot_slots(hole_created, res.hole_created);

  verts_[v.slot].pos = target;  /* same slot, same generation: id survives */

  WalkEnd end = walk(target);
  if (end.outside)
    throw MeshError("move_vertex: lost the target after hole fill");
  std::vector<uint32_t> cavity = collect_conflicts(end.cell, target);
  snapshot_slots(cavity, res.insert_destroyed);
  std::vector<uint32_t> fresh = retriangulate_cavity(cavity, v.slot);
  snapshot_slots(fresh, res.insert_created);
  res.moved = true;
  return res;
}

/* ---- flip (maintenance / validator testing) ----------------------------- */

inline void Triangulation::flip_edge(CellId cid, int i) {
  CSlot& c = cslot_mut(cid);
  if (i < 0 || i > 2) throw MeshError("flip_edge: bad index");
  uint32_t d_slot = c.n[i];
  if (d_slot == kNone || cells_[d_slot].ghost || c.ghost)
    throw MeshError("flip_edge: needs two real cells");
  CSlot& d = cells_[d_slot];

  uint32_t vi = c.v[i], u = c.v[(i + 1) % 3], w = c.v[(i + 2) % 3];
  int j = -1;
  for (int k = 0; k < 3; ++k)
    if (d.v[k] != u && d.v[k] != w) j = k;
  if (j < 0) throw MeshError("flip_edge: neighbor does not share the edge");
  uint32_t z = d.v[j];

  auto ori = [&](uint32_t a, uint32_t b, uint32_t cc) {
    const double pa[2] = {verts_[a].pos.x, verts_[a].pos.y};
    const double pb[2] = {verts_[b].pos.x, verts_[b].pos.y};
    const double pc[2] = {verts_[cc].pos.x, verts_[cc].pos.y};
    return detail::orient2d_sign(pa, pb, pc);
  };
  if (ori(vi, u, z) <= 0 || ori(vi, z, w) <= 0)
    throw MeshError("flip_edge: quad not strictly convex");

  uint32_t c_slot = cid.slot;
  /* outer neighbors before rewiring */
  auto outer = [&](CSlot& s, uint32_t a, uint32_t b) -> uint32_t {
    for (int k = 0; k < 3; ++k)
      if (s.v[(k + 1) % 3] == a && s.v[(k + 2) % 3] == b) return s.n[k];
    throw MeshError("flip_edge: edge lookup failed");
  };
  uint32_t n_uz = outer(d, u, z);   /* stays with new cell 1 */
  uint32_t n_zw = outer(d, z, w);   /* goes to new cell 2 */
  uint32_t n_wvi = outer(c, w, vi); /* goes to new cell 2 */
  uint32_t n_viu = outer(c, vi, u); /* stays with new cell 1 */

  free_cell(c_slot);
  free_cell(d_slot);
  uint32_t c1 = alloc_cell(vi, u, z);
  uint32_t c2 = alloc_cell(vi, z, w);
  /* exact slot reuse (LIFO free list) keeps the arena compact */
  CSlot& s1 = cells_[c1];
  CSlot& s2 = cells_[c2];
  s1.n = {n_uz, c2, n_viu};
  s2.n = {n_zw, n_wvi, c1};
  auto patch = [&](uint32_t nb, uint32_t a, uint32_t b, uint32_t to) {
    if (nb == kNone) return;
    CSlot& ns = cells_[nb];
    for (int k = 0; k < 3; ++k)
      if (ns.v[(k + 1) % 3] == a && ns.v[(k + 2) % 3] == b) {
        ns.n[k] = to;
        return;
      }
    throw MeshError("flip_edge: patch failed");
  };
  patch(n_uz, z, u, c1);
  patch(n_viu, u, vi, c1);
  patch(n_zw, w, z, c2);
  patch(n_wvi, vi, w, c2);
  stamp_incident(c1);
  stamp_incident(c2);
  walk_hint_.store((uint64_t(c1) << 32) | cells_[c1].gen);
}

/* ---- hull / area / build ------------------------------------------------ */

inline std::vector<VertexId> Triangulation::hull_vertices() const {
  uint32_t g = kNone;
  for (uint32_t s = 0; s < cells_.size(); ++s)
    if (cells_[s].alive && cells_[s].ghost) {
      g = s;
      break;
    }
  if (g == kNone) throw MeshError("hull_vertices: no hull");
  std::vector<VertexId> out;
  out.reserve(alive_ghost_cells_);
  uint32_t cur = g;
  do {
    out.push_back(vid_of_slot(cells_[cur].v[1]));  /* tail of the hull edge */
    cur = cells_[cur].n[1];                        /* next ghost along hull */
    if (cur == kNone || !cells_[cur].ghost)
      throw MeshError("hull_vertices: broken ghost ring");
    if (out.size() > alive_ghost_cells_)
      throw MeshError("hull_vertices: ghost ring does not close");
  } while (cur != g);
  return out;
}

inline double Triangulation::total_area() const {
  double sum = 0.0, comp = 0.0;
  for (uint32_t s = 0; s < cells_.size(); ++s) {
    if (!cells_[s].alive || cells_[s].ghost) continue;
    const CSlot& c = cells_[s];
    double a = triangle_area(verts_[c.v[0]].pos, verts_[c.v[1]].pos,
                             verts_[c.v[2]].pos);
    double y = a - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

inline Triangulation Triangulation::build(
    const std::vector<std::pair<Point2, VertexKind>>& points, int data_dim) {
  if (points.size() < 3) throw DegenerateInputError("build: need at least 3 points");
  Triangulation t(data_dim);

  /* Seed triangle: first two distinct points plus the first non-collinear
   * third. */
  std::size_t i0 = 0, i1 = points.size(), i2 = points.size();
  for (std::size_t i = 1; i < points.size() && i1 == points.size(); ++i)
    if (points[i].first != points[i0].first) i1 = i;
  if (i1 == points.size())
    throw DegenerateInputError("build: all points coincide");
  int seed_orient = 0;
  for (std::size_t i = 1; i < points.size() && i2 == points.size(); ++i) {
    if (i == i1) continue;
    int o = static_cast<int>(
        orient2d(points[i0].first, points[i1].first, points[i].first));
    if (o != 0) {
      i2 = i;
      seed_orient = o;
    }
  }
  if (i2 == points.size())
    throw DegenerateInputError("build: all points collinear");

  uint32_t a = t.alloc_vertex(points[i0].first, points[i0].second);
  uint32_t b = t.alloc_vertex(points[i1].first, points[i1].second);
  uint32_t c = t.alloc_vertex(points[i2].first, points[i2].second);
  if (seed_orient < 0) std::swap(b, c);

  uint32_t r = t.alloc_cell(a, b, c);
  uint32_t gab = t.alloc_cell(b, a, kInf); /* hull edge a->b */
  uint32_t gbc = t.alloc_cell(c, b, kInf); /* hull edge b->c */
  uint32_t gca = t.alloc_cell(a, c, kInf); /* hull edge c->a */
  {
    std::unordered_map<uint64_t, uint32_t> none;
    std::vector<uint32_t> all = {r, gab, gbc, gca};
    /* all edges pair internally for a single triangle plus its ghost ring */
    t.wire_new_cells(all, none);
    t.stamp_incident(r);
  }
  t.walk_hint_.store((uint64_t(r) << 32) | t.cells_[r].gen);

  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i == i0 || i == i1 || i == i2) continue;
    t.insert_any(points[i].first, points[i].second);
  }

  /* Everything on the final hull is pinned as boundary. */
  for (VertexId v : t.hull_vertices()) t.verts_[v.slot].kind = VertexKind::boundary;
  return t;
}

/* ---- validation --------------------------------------------------------- */

inline std::vector<Violation> Triangulation::validate_delaunay() const {
  std::vector<Violation> out;
  auto mesh_violation = [&](std::string msg) {
    out.push_back({CellId{}, std::move(msg)});
  };

  for (uint32_t s = 0; s < cells_.size(); ++s) {
    if (!cells_[s].alive) continue;
    const CSlot& cs = cells_[s];
    CellId id = {s, cs.gen};
    /* structural checks for every cell, geometric ones for real cells */
    for (int i = 0; i < 3; ++i) {
      uint32_t vs = cs.v[i];
      if (vs == kInf) {
        if (i != 2 || !cs.ghost)
          out.push_back({id, "ghost apex out of canonical slot"});
        continue;
      }
      if (vs >= verts_.size() || !verts_[vs].alive)
        out.push_back({id, "cell references dead vertex"});
    }
    for (int i = 0; i < 3; ++i) {
      uint32_t nb = cs.n[i];
      if (nb == kNone || nb >= cells_.size() || !cells_[nb].alive) {
        out.push_back({id, "missing neighbor"});
        continue;
      }
      uint32_t ea = cs.v[(i + 1) % 3], eb = cs.v[(i + 2) % 3];
      const CSlot& ns = cells_[nb];
      bool back = false;
      for (int j = 0; j < 3; ++j)
        if (ns.v[(j + 1) % 3] == eb && ns.v[(j + 2) % 3] == ea && ns.n[j] == s)
          back = true;
      if (!back) out.push_back({id, "asymmetric neighbor link"});
    }
    if (cs.ghost) continue;

    const double* pv[3];
    double coords[3][2];
    for (int i = 0; i < 3; ++i) {
      coords[i][0] = verts_[cs.v[i]].pos.x;
      coords[i][1] = verts_[cs.v[i]].pos.y;
      pv[i] = coords[i];
    }
    if (detail::orient2d_sign(pv[0], pv[1], pv[2]) <= 0)
      out.push_back({id, "cell not positively oriented"});

    /* Local Delaunay: the apex of each real neighbor must not be strictly
     * inside this cell's circumcircle.  Local implies global on a
     * triangulation of a convex region. */
    for (int i = 0; i < 3; ++i) {
      uint32_t nb = cs.n[i];
      if (nb == kNone || !cells_[nb].alive || cells_[nb].ghost) continue;
      const CSlot& ns = cells_[nb];
      uint32_t ea = cs.v[(i + 1) % 3], eb = cs.v[(i + 2) % 3];
      uint32_t apex = kNone;
      for (int j = 0; j < 3; ++j)
        if (ns.v[j] != ea && ns.v[j] != eb) apex = ns.v[j];
      if (apex == kNone || apex == kInf) continue;
      const double pq[2] = {verts_[apex].pos.x, verts_[apex].pos.y};
      if (detail::in_circle_sign(pv[0], pv[1], pv[2], pq) > 0)
        out.push_back({id, "neighbor apex inside circumcircle"});
    }
  }

  /* Euler relation for a triangulated convex polygon with ghosts counting
   * the hull edges. */
  if (alive_vertices_ >= 3) {
    std::size_t expect = 2 * alive_vertices_ - alive_ghost_cells_ - 2;
    if (alive_real_cells_ != expect)
      mesh_violation("cell count violates Euler relation");
    try {
      std::vector<VertexId> hull = hull_vertices();
      double hull_area = 0.0;
      for (std::size_t i = 0; i < hull.size(); ++i) {
        Point2 p = verts_[hull[i].slot].pos;
        Point2 q = verts_[hull[(i + 1) % hull.size()].slot].pos;
        hull_area += 0.5 * cross(p, q);
      }
      double cells_area = total_area();
      double scale = std::max(std::fabs(hull_area), 1e-300);
      if (std::fabs(cells_area - hull_area) > 1e-10 * scale)
        mesh_violation("triangulated area does not match hull area");
    } catch (const MeshError& e) {
      mesh_violation(std::string("hull traversal failed: ") + e.what());
    }
  }

  for (uint32_t s = 0; s < verts_.size(); ++s) {
    if (!verts_[s].alive) continue;
    uint32_t inc = verts_[s].incident;
    bool ok = inc != kNone && inc < cells_.size() && cells_[inc].alive &&
              !cells_[inc].ghost;
    if (ok) {
      ok = false;
      for (uint32_t w : cells_[inc].v)
        if (w == s) ok = true;
    }
    if (!ok) mesh_violation("vertex with broken incident-cell handle");
  }
  return out;
}

}  // namespace ipmm

#endif
