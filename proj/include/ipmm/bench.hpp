#ifndef IPMM_BENCH_HPP
#define IPMM_BENCH_HPP

/* Benchmark orchestration: resolve a run configuration, drive the stepping
 * loop with optional runtime validation, collect per-step metrics, and emit
 * metrics.csv / summary.json / VTK snapshots.  Also the randomized property
 * suites behind the `verify` subcommand and a multi-config sweep driver. */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ipmm/interface.hpp"
#include "ipmm/meshgen.hpp"
#include "ipmm/simulate.hpp"
#include "ipmm/state.hpp"
#include "ipmm/transfer.hpp"
#include "ipmm/vtk_io.hpp"

namespace ipmm {

/* ---- configuration ------------------------------------------------------- */

struct RunConfig {
  std::string benchmark = "star2d";
  double dx = 0.1;
  double dt = 0.0;    /* <= 0 picks the benchmark default */
  double t_end = -1.0; /* < 0 picks the benchmark default */
  std::string method = "ipmm-fv";     /* ipmm-fv | fv | both */
  std::string projection = "average"; /* average | l2 */
  std::string validate = "sparse";    /* off | sparse | every-step */
  std::string out;                    /* output directory; empty writes nothing */
  int snapshot_every = 1000;
  uint64_t seed = 1;
  /* not exposed as flags; settable through a JSON config */
  double front_spacing = 0.0; /* <= 0 means dx / 2 */
  int l1_every = 0;           /* extra L1 rows every N steps; 0 = ends only */
};

inline ProjectionKind parse_projection(const std::string& name) {
  if (name == "average") return ProjectionKind::local_average;
  if (name == "l2") return ProjectionKind::l2_projection;
  throw Error("unknown projection: " + name + " (expected average or l2)");
}

/* Fill defaults from the benchmark and reject malformed values. */
inline RunConfig resolve_config(RunConfig cfg) {
  BenchmarkDef def = benchmark_by_name(cfg.benchmark);
  if (cfg.dt <= 0.0) cfg.dt = def.dt;
  if (cfg.t_end < 0.0) cfg.t_end = def.t_end;
  if (!(cfg.dx > 0.0)) throw Error("dx must be positive");
  if (!(cfg.dt > 0.0)) throw Error("dt must be positive");
  if (!(cfg.t_end > 0.0)) throw Error("t-end must be positive");
  if (cfg.snapshot_every < 1) throw Error("snapshot-every must be >= 1");
  if (cfg.method != "ipmm-fv" && cfg.method != "fv" && cfg.method != "both")
    throw Error("unknown method: " + cfg.method);
  if (cfg.validate != "off" && cfg.validate != "sparse" &&
      cfg.validate != "every-step")
    throw Error("unknown validation mode: " + cfg.validate);
  parse_projection(cfg.projection);
  if (cfg.front_spacing <= 0.0) cfg.front_spacing = 0.5 * cfg.dx;
  return cfg;
}

/* ---- results ------------------------------------------------------------- */

struct RunSummary {
  int steps = 0;
  double t_final = 0.0;
  double wall_s = 0.0;
  std::size_t cells_final = 0;
  std::size_t cells_max = 0;
  double cells_mean = 0.0;
  std::size_t iface_vertices_final = 0;
  double iface_length_min = 0.0;
  double iface_length_max = 0.0;
  double iface_length_final = 0.0;
  double enclosed_area_initial = 0.0;
  double enclosed_area_final = 0.0;
  double epsilon_max = 0.0;
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double declared_delta = 0.0;
  double mass_drift_rel = 0.0;
  double l1_initial = -1.0;
  double l1_final = -1.0;
  bool has_reference_circle = false;
  RadialDeviation deviation; /* front vs the reference circle at t_end */
  /* totals of the per-step timing columns */
  double ensure_s = 0.0;
  double move_s = 0.0;
  double coarse_bulk_s = 0.0;
  double refine_bulk_s = 0.0;
  double refine_interface_s = 0.0;
  double coarsen_interface_s = 0.0;
  double fv_s = 0.0;
  double remesh_s = 0.0;
  double mean_step_s = 0.0;
};

struct RunOutput {
  std::vector<StepMetrics> metrics;
  RunSummary summary;
};

struct RunResult {
  RunConfig config;            /* resolved */
  RunOutput main;              /* ipmm-fv run (or the fv run for method=fv) */
  std::optional<RunOutput> fv; /* static-mesh comparison when method=both */
};

/* Observation points for tests and the acceptance gate; both optional. */
struct RunHooks {
  std::function<void(const SimulationState&)> on_start;
  std::function<void(const SimulationState&, const StepMetrics&)> on_step;
};

/* ---- references ---------------------------------------------------------- */

/* Exact field at time t, when the benchmark has one (rigid rotation of the
 * sliced disk); empty otherwise. */
inline std::function<double(double, Point2)> exact_solution(BenchmarkKind k) {
  if (k != BenchmarkKind::circadv) return {};
  return [](double t, Point2 p) {
    return SlottedDisk{}.contains(rotate_origin(p, -t)) ? 1.0 : 0.0;
  };
}

/* Circle the front should return to at t_end, for the periodic flows. */
inline bool reference_circle(BenchmarkKind k, Point2& center, double& radius) {
  if (k == BenchmarkKind::star2d) {
    center = {0.0, 0.0};
    radius = 0.5;
    return true;
  }
  if (k == BenchmarkKind::vortex2d) {
    center = {0.5, 0.75};
    radius = 0.15;
    return true;
  }
  return false;
}

/* ---- output files -------------------------------------------------------- */

inline const char* kMetricsHeader =
    "step,t,cells,iface_vertices,iface_length,enclosed_area,epsilon,mass,l1,"
    "ensure_removed,coarse_removed,refine_reinserted,iface_refined,"
    "iface_coarsened,ensure_s,move_s,coarse_bulk_s,refine_bulk_s,"
    "refine_interface_s,coarsen_interface_s,fv_s\n";

inline void write_metrics_csv(const std::string& path,
                              const std::vector<StepMetrics>& rows) {
  std::string out;
  out.reserve(rows.size() * 160 + 256);
  out += kMetricsHeader;
  char buf[40];
  auto num = [&](double v, char tail) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
    out += tail;
  };
  for (const StepMetrics& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    num(r.t, ',');
    out += std::to_string(r.cells) + ',' + std::to_string(r.iface_vertices) + ',';
    num(r.iface_length, ',');
    num(r.enclosed_area, ',');
    num(r.epsilon, ',');
    num(r.mass, ',');
    num(r.l1, ',');
    out += std::to_string(r.ensure_removed) + ',' +
           std::to_string(r.coarse_removed) + ',' +
           std::to_string(r.refine_reinserted) + ',' +
           std::to_string(r.iface_refined) + ',' +
           std::to_string(r.iface_coarsened) + ',';
    num(r.ensure_s, ',');
    num(r.move_s, ',');
    num(r.coarse_bulk_s, ',');
    num(r.refine_bulk_s, ',');
    num(r.refine_interface_s, ',');
    num(r.coarsen_interface_s, ',');
    num(r.fv_s, '\n');
  }
  detail::write_text_file(path, out);
}

inline nlohmann::ordered_json summary_json(const RunResult& res) {
  const RunConfig& c = res.config;
  const RunSummary& s = res.main.summary;
  nlohmann::ordered_json j;
  j["config"] = {{"benchmark", c.benchmark}, {"dx", c.dx},
                 {"dt", c.dt},               {"t_end", c.t_end},
                 {"method", c.method},       {"projection", c.projection},
                 {"validate", c.validate},   {"snapshot_every", c.snapshot_every},
                 {"seed", c.seed},           {"front_spacing", c.front_spacing}};
  j["steps"] = s.steps;
  j["t_final"] = s.t_final;
  j["cells"] = {{"final", s.cells_final},
                {"max", s.cells_max},
                {"mean", s.cells_mean}};
  j["interface"] = {{"vertices_final", s.iface_vertices_final},
                    {"length_min", s.iface_length_min},
                    {"length_max", s.iface_length_max},
                    {"length_final", s.iface_length_final},
                    {"enclosed_area_initial", s.enclosed_area_initial},
                    {"enclosed_area_final", s.enclosed_area_final},
                    {"epsilon_max", s.epsilon_max}};
  j["mass"] = {{"initial", s.mass_initial},
               {"final", s.mass_final},
               {"declared_delta", s.declared_delta},
               {"drift_rel", s.mass_drift_rel}};
  j["l1"] = {{"initial", s.l1_initial}, {"final", s.l1_final}};
  if (res.fv) j["l1"]["final_fv"] = res.fv->summary.l1_final;
  if (s.has_reference_circle)
    j["deviation"] = {{"min", s.deviation.min},
                      {"max", s.deviation.max},
                      {"mean", s.deviation.mean}};
  j["timings"] = {{"ensure_s", s.ensure_s},
                  {"move_s", s.move_s},
                  {"coarse_bulk_s", s.coarse_bulk_s},
                  {"refine_bulk_s", s.refine_bulk_s},
                  {"refine_interface_s", s.refine_interface_s},
                  {"coarsen_interface_s", s.coarsen_interface_s},
                  {"fv_s", s.fv_s},
                  {"remesh_s", s.remesh_s},
                  {"mean_step_s", s.mean_step_s},
                  {"wall_s", s.wall_s}};
  return j;
}

/* ---- run loop ------------------------------------------------------------ */

namespace detail {

inline void run_validation(const SimulationState& s, int step) {
  std::vector<std::string> issues = check_preservation(s);
  if (!issues.empty())
    throw ValidationError("step " + std::to_string(step) + ": " + issues.front());
  std::vector<Violation> viol = s.mesh.validate_delaunay();
  if (!viol.empty())
    throw ValidationError("step " + std::to_string(step) + ": " +
                          viol.front().message);
}

/* One simulation: `moving` selects the front-advancing scheme, otherwise the
 * mesh stays put and every step is a plain upwind pass. */
inline RunOutput run_one(const RunConfig& cfg, bool moving,
                         const RunHooks& hooks, const std::string& csv_name) {
  BenchmarkDef def = benchmark_by_name(cfg.benchmark);
  ProjectionKind kind = parse_projection(cfg.projection);
  std::function<double(double, Point2)> exact = exact_solution(def.kind);
  bool files = !cfg.out.empty();
  if (files) std::filesystem::create_directories(cfg.out);

  auto wall0 = std::chrono::steady_clock::now();
  SimulationState s =
      make_benchmark_state(def, cfg.dx, cfg.front_spacing, cfg.seed, kind);

  RunOutput out;
  RunSummary& sum = out.summary;
  int n = std::max(1, (int)std::ceil(cfg.t_end / cfg.dt - 1e-9));
  out.metrics.reserve(n);

  sum.mass_initial = total_mass(s.mesh);
  sum.enclosed_area_initial = interface_measures(s).enclosed_area;
  if (exact) sum.l1_initial = l1_error(s.mesh, [&](Point2 p) { return exact(0.0, p); });
  sum.iface_length_min = std::numeric_limits<double>::infinity();

  if (files && moving) write_snapshot(s, cfg.out, 0);
  if (hooks.on_start) hooks.on_start(s);

  int check_every = cfg.validate == "every-step" ? 1
                    : cfg.validate == "sparse"   ? 200
                                                 : 0;
  double t = 0.0;
  double cells_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    double hdt = k + 1 == n ? cfg.t_end - t : cfg.dt;
    StepMetrics met;
    met.step = k + 1;
    if (moving) {
      AdvanceOutcome adv = step_with_flux(s, t, hdt, kind, &met);
      met.ensure_removed = adv.move.removed_ensure;
      met.coarse_removed = adv.move.removed_coarse;
      met.refine_reinserted = adv.move.reinserted;
      met.iface_refined = adv.refined;
      met.iface_coarsened = adv.coarsened;
      met.epsilon = adv.move.epsilon;
    } else {
      auto t0 = std::chrono::steady_clock::now();
      fv_step_static(s, t, hdt);
      met.fv_s = seconds_since(t0);
    }
    t = k + 1 == n ? cfg.t_end : t + hdt;
    s.time = t;
    met.t = t;
    met.cells = s.mesh.real_cell_count();
    met.iface_vertices = s.iface.ring.size();
    InterfaceMeasures im = interface_measures(s);
    met.iface_length = im.length;
    met.enclosed_area = im.enclosed_area;
    met.mass = total_mass(s.mesh);
    bool last = k + 1 == n;
    bool want_l1 = exact && (last || k == 0 ||
                             (cfg.l1_every > 0 && (k + 1) % cfg.l1_every == 0));
    if (want_l1)
      met.l1 = l1_error(s.mesh, [&](Point2 p) { return exact(t, p); });
    if (check_every > 0 && ((k + 1) % check_every == 0 || last))
      run_validation(s, k + 1);

    cells_sum += double(met.cells);
    sum.cells_max = std::max(sum.cells_max, met.cells);
    sum.iface_length_min = std::min(sum.iface_length_min, met.iface_length);
    sum.iface_length_max = std::max(sum.iface_length_max, met.iface_length);
    sum.epsilon_max = std::max(sum.epsilon_max, met.epsilon);
    sum.ensure_s += met.ensure_s;
    sum.move_s += met.move_s;
    sum.coarse_bulk_s += met.coarse_bulk_s;
    sum.refine_bulk_s += met.refine_bulk_s;
    sum.refine_interface_s += met.refine_interface_s;
    sum.coarsen_interface_s += met.coarsen_interface_s;
    sum.fv_s += met.fv_s;

    out.metrics.push_back(met);
    if (files && moving &&
        ((k + 1) % cfg.snapshot_every == 0 || last))
      write_snapshot(s, cfg.out, k + 1);
    if (hooks.on_step) hooks.on_step(s, met);
  }

  sum.steps = n;
  sum.t_final = t;
  sum.cells_final = s.mesh.real_cell_count();
  sum.cells_mean = cells_sum / double(n);
  sum.iface_vertices_final = s.iface.ring.size();
  sum.iface_length_final = out.metrics.back().iface_length;
  sum.enclosed_area_final = out.metrics.back().enclosed_area;
  sum.mass_final = out.metrics.back().mass;
  sum.declared_delta = s.declared_delta;
  sum.mass_drift_rel = std::abs(sum.mass_final - sum.mass_initial -
                                sum.declared_delta) /
                       std::max(std::abs(sum.mass_initial), 1e-300);
  sum.l1_final = out.metrics.back().l1;
  Point2 rc;
  double rr = 0.0;
  if (moving && reference_circle(def.kind, rc, rr)) {
    sum.has_reference_circle = true;
    sum.deviation = circle_deviation(s, rc, rr);
  }
  sum.remesh_s = sum.ensure_s + sum.move_s + sum.coarse_bulk_s +
                 sum.refine_bulk_s + sum.refine_interface_s +
                 sum.coarsen_interface_s;
  sum.wall_s = seconds_since(wall0);
  sum.mean_step_s = sum.wall_s / double(n);

  if (files) write_metrics_csv(cfg.out + "/" + csv_name, out.metrics);
  return out;
}

}  // namespace detail

/* Execute one configuration.  method=both runs the moving-mesh scheme and
 * then the static-mesh upwind scheme on a fresh state for comparison; hooks
 * observe the moving run only. */
inline RunResult run_benchmark(const RunConfig& cfg_in,
                               const RunHooks& hooks = {}) {
  RunResult res;
  res.config = resolve_config(cfg_in);
  bool moving = res.config.method != "fv";
  res.main = detail::run_one(res.config, moving, hooks, "metrics.csv");
  if (res.config.method == "both")
    res.fv = detail::run_one(res.config, false, {}, "metrics_fv.csv");
  if (!res.config.out.empty())
    detail::write_text_file(res.config.out + "/summary.json",
                            summary_json(res).dump(2) + "\n");
  return res;
}

/* ---- verification suites ------------------------------------------------- */

struct VerifyReport {
  std::string suite;
  long trials = 0;
  long failures = 0;
  double max_drift = 0.0; /* conservation suite only */
  bool passed = false;
  std::string detail;
};

/* Random mixed insert/remove/move sequences; the validator must stay green
 * after every single operation.  `trials` counts sequences (200 ops each). */
inline VerifyReport verify_delaunay(long trials, uint64_t seed = 0x5eedu) {
  VerifyReport rep;
  rep.suite = "delaunay";
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::uniform_real_distribution<double> step(-0.02, 0.02);
  for (long t = 0; t < trials && rep.failures == 0; ++t) {
    /* the unit-square frame keeps the hull fixed, so any interior point is
     * insertable and interior vertices stay removable */
    std::vector<std::pair<Point2, VertexKind>> pts = {
        {{0.0, 0.0}, VertexKind::boundary}, {{1.0, 0.0}, VertexKind::boundary},
        {{1.0, 1.0}, VertexKind::boundary}, {{0.0, 1.0}, VertexKind::boundary}};
    int n0 = 12 + int(rng() % 30);
    for (int i = 0; i < n0; ++i)
      pts.push_back({{u(rng), u(rng)}, VertexKind::bulk});
    Triangulation mesh = Triangulation::build(pts);
    std::vector<VertexId> pool;
    for (VertexId v : mesh.vertex_ids())
      if (mesh.kind(v) != VertexKind::boundary) pool.push_back(v);
    for (int done = 0; done < 200;) {
      int op = int(rng() % 3);
      if (op == 0 || pool.size() < 6) {
        pool.push_back(mesh.insert({u(rng), u(rng)}, VertexKind::bulk).vertex);
      } else if (op == 1) {
        std::size_t k = rng() % pool.size();
        mesh.remove(pool[k]);
        pool.erase(pool.begin() + k);
      } else {
        std::size_t k = rng() % pool.size();
        Point2 p = mesh.position(pool[k]);
        Point2 q{std::clamp(p.x + step(rng), 0.01, 0.99),
                 std::clamp(p.y + step(rng), 0.01, 0.99)};
        try {
          mesh.move_vertex(pool[k], q);
        } catch (const MoveTooFarError&) {
          continue; /* crowded spot; not an executed operation */
        }
      }
      ++done;
      if (!mesh.validate_delaunay().empty()) {
        ++rep.failures;
        rep.detail = "sequence " + std::to_string(t) + " op " +
                     std::to_string(done) + ": " +
                     mesh.validate_delaunay().front().message;
        break;
      }
    }
  }
  rep.passed = rep.failures == 0;
  return rep;
}

/* Blocking property of minimum covering circles (delegates to the geometry
 * suite): trials random configurations, zero tolerated counterexamples. */
inline VerifyReport verify_theorem(long trials, uint64_t seed = 0x11b7a2c5u) {
  TheoremReport tr = verify_theorem_minsphere(trials, seed);
  VerifyReport rep;
  rep.suite = "theorem";
  rep.trials = tr.trials;
  rep.failures = tr.failures;
  rep.passed = tr.failures == 0;
  return rep;
}

/* Short star-benchmark run (trials = steps) with the full preservation and
 * mesh check after every step. */
inline VerifyReport verify_preservation(long trials, uint64_t seed = 1) {
  VerifyReport rep;
  rep.suite = "preservation";
  rep.trials = trials;
  RunConfig cfg;
  cfg.benchmark = "star2d";
  cfg.dx = 0.1;
  cfg.seed = seed;
  cfg.validate = "every-step";
  cfg.t_end = double(trials) * benchmark_def(BenchmarkKind::star2d).dt;
  try {
    run_benchmark(cfg);
  } catch (const ValidationError& e) {
    ++rep.failures;
    rep.detail = e.what();
  }
  rep.passed = rep.failures == 0;
  return rep;
}

/* Random data-carrying edit sequences on a front-free mesh: the realized
 * total of u*area must match the declared projection deltas to 1e-8
 * relative.  `trials` counts sequences (50 edits each). */
inline VerifyReport verify_conservation(long trials, uint64_t seed = 0xc0115eedu) {
  VerifyReport rep;
  rep.suite = "conservation";
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  std::uniform_real_distribution<double> step(-0.02, 0.02);
  for (long t = 0; t < trials; ++t) {
    SimulationState s;
    std::vector<std::pair<Point2, VertexKind>> pts = {
        {{0.0, 0.0}, VertexKind::boundary}, {{1.0, 0.0}, VertexKind::boundary},
        {{1.0, 1.0}, VertexKind::boundary}, {{0.0, 1.0}, VertexKind::boundary}};
    int n0 = 15 + int(rng() % 25);
    for (int i = 0; i < n0; ++i)
      pts.push_back({{u(rng), u(rng)}, VertexKind::bulk});
    s.mesh = Triangulation::build(pts);
    for (CellId c : s.mesh.cell_ids()) {
      CellSnapshot snap = s.mesh.snapshot(c);
      Point2 g = (1.0 / 3.0) * (snap.pos[0] + snap.pos[1] + snap.pos[2]);
      s.mesh.set_cell_data(c, DataVector(1, 1.5 + std::sin(3.0 * g.x) *
                                                      std::cos(2.0 * g.y)));
    }
    s.rebuild_caches(0.2);
    double mass0 = total_mass(s.mesh);
    ProjectionKind kind =
        rng() % 2 ? ProjectionKind::local_average : ProjectionKind::l2_projection;

    std::vector<VertexId> pool;
    for (VertexId v : s.mesh.vertex_ids())
      if (s.mesh.kind(v) != VertexKind::boundary) pool.push_back(v);
    for (int done = 0; done < 50;) {
      int op = int(rng() % 3);
      if (op == 0 || pool.size() < 6) {
        pool.push_back(insert_vertex_with_data(s, {u(rng), u(rng)}, kind));
      } else if (op == 1) {
        std::size_t k = rng() % pool.size();
        remove_vertex_with_data(s, pool[k], kind);
        pool.erase(pool.begin() + k);
      } else {
        std::size_t k = rng() % pool.size();
        Point2 p = s.mesh.position(pool[k]);
        Point2 q{std::clamp(p.x + step(rng), 0.01, 0.99),
                 std::clamp(p.y + step(rng), 0.01, 0.99)};
        try {
          move_vertex_with_data(s, pool[k], q, kind);
        } catch (const MoveTooFarError&) {
          continue;
        }
      }
      ++done;
    }
    double drift = std::abs(total_mass(s.mesh) - mass0 - s.declared_delta) /
                   std::max(std::abs(mass0), 1e-300);
    rep.max_drift = std::max(rep.max_drift, drift);
    if (drift > 1e-8) ++rep.failures;
  }
  rep.passed = rep.failures == 0;
  return rep;
}

inline VerifyReport verify_suite(const std::string& name, long trials,
                                 uint64_t seed) {
  if (name == "delaunay") return verify_delaunay(trials, seed ? seed : 0x5eedu);
  if (name == "theorem") return verify_theorem(trials, seed ? seed : 0x11b7a2c5u);
  if (name == "preservation") return verify_preservation(trials, seed ? seed : 1);
  if (name == "conservation")
    return verify_conservation(trials, seed ? seed : 0xc0115eedu);
  throw Error("unknown verify suite: " + name);
}

/* ---- sweeps -------------------------------------------------------------- */

struct SweepEntry {
  RunConfig config;
  RunSummary summary;
  double l1_final_fv = -1.0;
  std::string error; /* empty on success */
};

/* Run the configs on a small worker pool (one state per worker) and write
 * run_NNN/ outputs plus one merged sweep.csv under out_dir. */
inline std::vector<SweepEntry> run_sweep(std::vector<RunConfig> configs,
                                         const std::string& out_dir,
                                         unsigned workers = 0) {
  if (workers == 0)
    workers = std::max(1u, std::min<unsigned>(
                               std::thread::hardware_concurrency(),
                               (unsigned)configs.size()));
  std::vector<SweepEntry> entries(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (!out_dir.empty()) {
      char sub[16];
      std::snprintf(sub, sizeof sub, "/run_%03zu", i);
      configs[i].out = out_dir + sub;
    }
    entries[i].config = configs[i];
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        RunResult r = run_benchmark(configs[i]);
        entries[i].config = r.config;
        entries[i].summary = r.main.summary;
        if (r.fv) entries[i].l1_final_fv = r.fv->summary.l1_final;
      } catch (const std::exception& e) {
        entries[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::string csv =
        "run,benchmark,dx,dt,t_end,method,projection,seed,steps,cells_mean,"
        "iface_length_min,iface_length_max,iface_length_final,"
        "enclosed_area_final,epsilon_max,mass_drift_rel,l1_initial,l1_final,"
        "l1_final_fv,remesh_s,fv_s,wall_s,error\n";
    char buf[40];
    auto num = [&](double v, char tail) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      csv += buf;
      csv += tail;
    };
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const SweepEntry& e = entries[i];
      const RunSummary& s = e.summary;
      csv += std::to_string(i) + ',' + e.config.benchmark + ',';
      num(e.config.dx, ',');
      num(e.config.dt, ',');
      num(e.config.t_end, ',');
      csv += e.config.method + ',' + e.config.projection + ',' +
             std::to_string(e.config.seed) + ',' + std::to_string(s.steps) + ',';
      num(s.cells_mean, ',');
      num(s.iface_length_min, ',');
      num(s.iface_length_max, ',');
      num(s.iface_length_final, ',');
      num(s.enclosed_area_final, ',');
      num(s.epsilon_max, ',');
      num(s.mass_drift_rel, ',');
      num(s.l1_initial, ',');
      num(s.l1_final, ',');
      num(e.l1_final_fv, ',');
      num(s.remesh_s, ',');
      num(s.fv_s, ',');
      num(s.wall_s, ',');
      csv += e.error + '\n';
    }
    detail::write_text_file(out_dir + "/sweep.csv", csv);
  }
  return entries;
}

}  // namespace ipmm

#endif
