#ifndef IPMM_STATE_HPP
#define IPMM_STATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ipmm/grid.hpp"
#include "ipmm/triangulation.hpp"

namespace ipmm {

/* Spacing bounds driving bulk clearing and interface refinement/coarsening.
 * Derived from edge-length percentiles of the current mesh. */
struct Thresholds {
  double dx_min = 0.0;        /* minimum spacing kept around the front */
  double dx_gamma_min = 0.0;  /* front edge below this gets coarsened */
  double dx_gamma_max = 0.0;  /* front edge above this gets split */
  double p = 0.0;             /* spread parameter the front band was built with */
};

/* Outcome of one front move: how much bulk restructuring it required and how
 * far the realized polygon ended up from the requested one. */
struct MoveReport {
  std::size_t removed_ensure = 0;  /* bulk vertices cleared before the move */
  std::size_t removed_coarse = 0;  /* bulk vertices cleared after the move */
  std::size_t reinserted = 0;      /* background vertices restored */
  std::size_t moved = 0;           /* front vertices repositioned */
  double epsilon = 0.0;            /* max one-sided deviation from the request */
};

/* Per-step timing and size accounting emitted by the benchmark driver. */
struct StepMetrics {
  int step = 0;
  double t = 0.0;
  /* seconds per phase */
  double ensure_s = 0.0;
  double move_s = 0.0;
  double coarse_bulk_s = 0.0;
  double refine_bulk_s = 0.0;
  double refine_interface_s = 0.0;
  double coarsen_interface_s = 0.0;
  double fv_s = 0.0;
  /* op counts */
  std::size_t ensure_removed = 0;
  std::size_t coarse_removed = 0;
  std::size_t refine_reinserted = 0;
  std::size_t iface_refined = 0;
  std::size_t iface_coarsened = 0;
  /* state summary */
  std::size_t cells = 0;
  std::size_t iface_vertices = 0;
  double iface_length = 0.0;
  double enclosed_area = 0.0;
  double epsilon = 0.0;
  double mass = 0.0;
  double l1 = -1.0; /* against the exact solution when one exists, else -1 */

  double remesh_seconds() const {
    return ensure_s + move_s + coarse_bulk_s + refine_bulk_s +
           refine_interface_s + coarsen_interface_s;
  }
};

/* The tracked front: a closed, counterclockwise cycle of mesh vertices whose
 * consecutive pairs must stay mesh edges.  Positions live in the mesh; the
 * ring only orders the ids. */
struct Interface {
  std::vector<VertexId> ring;

  std::size_t size() const { return ring.size(); }
  std::size_t next(std::size_t i) const { return (i + 1) % ring.size(); }
  std::size_t prev(std::size_t i) const { return (i + ring.size() - 1) % ring.size(); }

  /* Position of a vertex id within the ring, or npos. */
  std::size_t index_of(VertexId v) const {
    auto it = index_.find(v.key());
    return it == index_.end() ? npos : it->second;
  }
  bool contains(VertexId v) const { return index_.count(v.key()) != 0; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void rebuild_index() {
    index_.clear();
    index_.reserve(ring.size());
    for (std::size_t i = 0; i < ring.size(); ++i) index_[ring[i].key()] = i;
  }

 private:
  std::unordered_map<uint64_t, std::size_t> index_;
};

/* Vertices removed from the mesh to clear space around the front.  Their
 * original coordinates are kept verbatim so a later reinsertion restores the
 * bit-identical point. */
class BackgroundList {
 public:
  void reset(double grid_cell) {
    entries_.clear();
    grid_.reset(grid_cell);
    next_ = 0;
  }
  std::size_t size() const { return entries_.size(); }

  uint64_t add(Point2 p) {
    uint64_t id = next_++;
    entries_.emplace(id, p);
    grid_.insert(p, id);
    return id;
  }
  void remove(uint64_t id) {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error("BackgroundList: unknown entry");
    grid_.remove(it->second, id);
    entries_.erase(it);
  }
  Point2 position(uint64_t id) const { return entries_.at(id); }

  template <class F>
  void for_disk(Point2 c, double radius, F&& f) const {
    grid_.for_disk(c, radius, std::forward<F>(f));
  }
  /* Snapshot of ids in ascending insertion order (deterministic). */
  std::vector<uint64_t> ids_sorted() const {
    std::vector<uint64_t> out;
    out.reserve(entries_.size());
    for (const auto& [id, p] : entries_) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_map<uint64_t, Point2> entries_;
  PointGrid grid_;
  uint64_t next_ = 0;
};

/* Everything one benchmark run mutates: the mesh, the front, the background
 * list, spacing thresholds, time, and the prescribed motion field.  The extra
 * members are derived caches kept in sync by the data-transfer ops; after
 * assembling a state by hand call rebuild_caches(). */
struct SimulationState {
  Triangulation mesh;
  Interface iface;
  BackgroundList background;
  Thresholds thr;
  double time = 0.0;
  double epsilon_last = 0.0;  /* realized front deviation of the last move */
  std::function<Point2(double, Point2)> velocity;

  /* -- derived caches ------------------------------------------------- */

  PointGrid vertex_grid;                            /* id = vertex key */
  std::multiset<double> insphere_set;               /* real-cell insphere diameters */
  std::unordered_map<uint64_t, double> cell_insphere; /* cell key -> diameter */
  std::unordered_set<uint64_t> ring_edges;          /* unordered slot-pair keys */

  /* conservation bookkeeping: accumulated projection mass deltas (Kahan)
   * in component 0, and the worst per-op relative delta seen for ops whose
   * stencil did not straddle the front */
  double declared_delta = 0.0;
  double declared_delta_comp = 0.0;
  double max_sidepure_rel = 0.0;

  int data_dim() const { return mesh.data_dim(); }

  static uint64_t edge_slot_key(VertexId a, VertexId b) {
    uint32_t lo = a.slot < b.slot ? a.slot : b.slot;
    uint32_t hi = a.slot < b.slot ? b.slot : a.slot;
    return (uint64_t(lo) << 32) | hi;
  }
  bool is_ring_edge(VertexId a, VertexId b) const {
    return ring_edges.count(edge_slot_key(a, b)) != 0;
  }
  void rebuild_ring_edges() {
    ring_edges.clear();
    std::size_t n = iface.ring.size();
    for (std::size_t i = 0; i < n; ++i)
      ring_edges.insert(edge_slot_key(iface.ring[i], iface.ring[(i + 1) % n]));
  }

  void note_mass_delta(const double* delta, const double* scale, int m,
                       bool side_pure) {
    double y = delta[0] - declared_delta_comp;
    double t = declared_delta + y;
    declared_delta_comp = (t - declared_delta) - y;
    declared_delta = t;
    if (side_pure)
      for (int c = 0; c < m; ++c) {
        double rel = std::abs(delta[c]) / (scale[c] + 1e-300);
        if (rel > max_sidepure_rel) max_sidepure_rel = rel;
      }
  }

  void track_created_cell(const CellSnapshot& s) {
    if (s.ghost) return;
    double d = insphere_diameter(s.pos[0], s.pos[1], s.pos[2]);
    cell_insphere[s.id.key()] = d;
    insphere_set.insert(d);
  }
  void track_destroyed_cell(CellId id) {
    auto it = cell_insphere.find(id.key());
    if (it == cell_insphere.end()) return;
    insphere_set.erase(insphere_set.find(it->second));
    cell_insphere.erase(it);
  }
  double min_insphere_diameter() const {
    if (insphere_set.empty()) throw MeshError("empty mesh");
    return *insphere_set.begin();
  }

  /* Rebuild every derived cache from the mesh and ring.  grid_cell sizes the
   * spatial buckets; pass roughly the target mesh spacing. */
  void rebuild_caches(double grid_cell) {
    vertex_grid.reset(grid_cell);
    for (VertexId v : mesh.vertex_ids())
      vertex_grid.insert(mesh.position(v), v.key());
    insphere_set.clear();
    cell_insphere.clear();
    for (CellId c : mesh.cell_ids()) track_created_cell(mesh.snapshot(c));
    iface.rebuild_index();
    rebuild_ring_edges();
  }
};

}  // namespace ipmm

#endif
