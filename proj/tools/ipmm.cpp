/* ipmm: benchmark and verification driver.
 *
 *   ipmm run    --benchmark star2d --dx 0.1 --out results/star
 *   ipmm sweep  --benchmark circadv --dx 0.5,0.25,0.125 --method both --out results/adv
 *   ipmm verify theorem --trials 10000
 *
 * `run` executes one configuration and writes metrics.csv, summary.json and
 * VTK snapshots; `sweep` fans a dx list (or a "runs" array from a JSON
 * config) across a worker pool and merges the summaries into sweep.csv;
 * `verify` runs one of the randomized property suites and exits nonzero on
 * any violation. */

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipmm/bench.hpp"

namespace {

using nlohmann::json;

ipmm::RunConfig apply_json(ipmm::RunConfig cfg, const json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "benchmark")
      cfg.benchmark = val.get<std::string>();
    else if (key == "dx")
      cfg.dx = val.get<double>();
    else if (key == "dt")
      cfg.dt = val.get<double>();
    else if (key == "t_end")
      cfg.t_end = val.get<double>();
    else if (key == "method")
      cfg.method = val.get<std::string>();
    else if (key == "projection")
      cfg.projection = val.get<std::string>();
    else if (key == "validate")
      cfg.validate = val.get<std::string>();
    else if (key == "out")
      cfg.out = val.get<std::string>();
    else if (key == "snapshot_every")
      cfg.snapshot_every = val.get<int>();
    else if (key == "seed")
      cfg.seed = val.get<uint64_t>();
    else if (key == "front_spacing")
      cfg.front_spacing = val.get<double>();
    else if (key == "l1_every")
      cfg.l1_every = val.get<int>();
    else if (key != "runs")
      throw ipmm::Error("config: unknown key '" + key + "'");
  }
  return cfg;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ipmm::IoError("cannot read config: " + path);
  json j;
  in >> j;
  return j;
}

/* Shared flag set; returns the per-flag CLI option handles so callers can
 * tell "explicitly set" from "default". */
struct RunFlags {
  std::string benchmark, method, projection, validate, out, config;
  double dx = 0.0, dt = 0.0, t_end = 0.0;
  int snapshot_every = 0;
  uint64_t seed = 0;

  CLI::Option *o_benchmark, *o_dx, *o_dt, *o_t_end, *o_method, *o_projection,
      *o_validate, *o_out, *o_snapshot, *o_seed, *o_config;

  void attach(CLI::App* cmd, bool dx_as_list, std::vector<double>* dx_list) {
    o_benchmark = cmd->add_option("--benchmark", benchmark,
                                  "star2d, vortex2d, or circadv");
    if (dx_as_list)
      o_dx = cmd->add_option("--dx", *dx_list, "target max edge lengths")
                 ->delimiter(',');
    else
      o_dx = cmd->add_option("--dx", dx, "target max edge length");
    o_dt = cmd->add_option("--dt", dt, "time step (default: per benchmark)");
    o_t_end = cmd->add_option("--t-end", t_end, "end time (default: per benchmark)");
    o_method = cmd->add_option("--method", method, "ipmm-fv, fv, or both");
    o_projection = cmd->add_option("--projection", projection, "average or l2");
    o_validate = cmd->add_option("--validate", validate,
                                 "off, sparse, or every-step");
    o_out = cmd->add_option("--out", out, "output directory");
    o_snapshot = cmd->add_option("--snapshot-every", snapshot_every,
                                 "steps between VTK snapshots");
    o_seed = cmd->add_option("--seed", seed, "mesh generation seed");
    o_config = cmd->add_option("--config", config,
                               "JSON config; explicit flags override it");
  }

  /* config file first, then every explicitly given flag on top */
  ipmm::RunConfig merge(double dx_val) const {
    ipmm::RunConfig cfg;
    if (o_config->count()) cfg = apply_json(cfg, load_json(config));
    if (o_benchmark->count()) cfg.benchmark = benchmark;
    if (dx_val > 0.0) cfg.dx = dx_val;
    if (o_dt->count()) cfg.dt = dt;
    if (o_t_end->count()) cfg.t_end = t_end;
    if (o_method->count()) cfg.method = method;
    if (o_projection->count()) cfg.projection = projection;
    if (o_validate->count()) cfg.validate = validate;
    if (o_out->count()) cfg.out = out;
    if (o_snapshot->count()) cfg.snapshot_every = snapshot_every;
    if (o_seed->count()) cfg.seed = seed;
    return cfg;
  }
};

void print_summary(const ipmm::RunResult& res) {
  const ipmm::RunSummary& s = res.main.summary;
  std::printf("benchmark %s: %d steps to t=%g (dx=%g, dt=%g, %s)\n",
              res.config.benchmark.c_str(), s.steps, s.t_final, res.config.dx,
              res.config.dt, res.config.method.c_str());
  std::printf("cells: mean %.1f, max %zu, final %zu\n", s.cells_mean,
              s.cells_max, s.cells_final);
  std::printf(
      "interface: %zu vertices, length [%.6g, %.6g] final %.6g, "
      "area %.6g -> %.6g\n",
      s.iface_vertices_final, s.iface_length_min, s.iface_length_max,
      s.iface_length_final, s.enclosed_area_initial, s.enclosed_area_final);
  std::printf("front deviation bound (max per step): %.3g\n", s.epsilon_max);
  std::printf("mass: %.9g -> %.9g, relative ledger drift %.3g\n",
              s.mass_initial, s.mass_final, s.mass_drift_rel);
  if (s.l1_initial >= 0.0) {
    std::printf("l1 error: initial %.6g, final %.6g", s.l1_initial, s.l1_final);
    if (res.fv) std::printf(", static-mesh fv %.6g", res.fv->summary.l1_final);
    std::printf("\n");
  }
  if (s.has_reference_circle)
    std::printf("deviation from the reference circle: mean %.3g in [%.3g, %.3g]\n",
                s.deviation.mean, s.deviation.min, s.deviation.max);
  std::printf(
      "timings [s]: remesh %.2f (ensure %.2f, move %.2f, coarse_bulk %.2f, "
      "refine_bulk %.2f, refine_iface %.2f, coarsen_iface %.2f), fv %.2f, "
      "wall %.2f\n",
      s.remesh_s, s.ensure_s, s.move_s, s.coarse_bulk_s, s.refine_bulk_s,
      s.refine_interface_s, s.coarsen_interface_s, s.fv_s, s.wall_s);
  if (!res.config.out.empty())
    std::printf("wrote %s/{metrics.csv,summary.json,snap_*.vtk,iface_*.vtk}\n",
                res.config.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interface-preserving moving-mesh benchmarks"};
  app.require_subcommand(1);

  CLI::App* cmd_run = app.add_subcommand("run", "execute one configuration");
  RunFlags rf;
  rf.attach(cmd_run, false, nullptr);

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "run a dx list (or config \"runs\") in parallel");
  RunFlags sf;
  std::vector<double> sweep_dx;
  sf.attach(cmd_sweep, true, &sweep_dx);
  unsigned sweep_workers = 0;
  cmd_sweep->add_option("--workers", sweep_workers,
                        "worker threads (default: hardware)");

  CLI::App* cmd_verify =
      app.add_subcommand("verify", "run a randomized property suite");
  std::string suite;
  long trials = 0;
  uint64_t vseed = 0;
  cmd_verify
      ->add_option("suite", suite,
                   "delaunay, preservation, theorem, or conservation")
      ->required();
  cmd_verify->add_option("--trials", trials, "sequence/trial count");
  cmd_verify->add_option("--seed", vseed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      ipmm::RunConfig cfg = rf.merge(rf.o_dx->count() ? rf.dx : 0.0);
      print_summary(ipmm::run_benchmark(cfg));
      return 0;
    }

    if (cmd_sweep->parsed()) {
      std::vector<ipmm::RunConfig> configs;
      json runs;
      if (sf.o_config->count()) {
        json j = load_json(sf.config);
        if (j.contains("runs")) runs = j["runs"];
      }
      if (runs.is_array() && !runs.empty()) {
        for (const json& r : runs) configs.push_back(apply_json(sf.merge(0.0), r));
      } else {
        if (sweep_dx.empty())
          throw ipmm::Error("sweep needs --dx values or a config with \"runs\"");
        for (double dx : sweep_dx) configs.push_back(sf.merge(dx));
      }
      std::string out_dir = configs.empty() ? "" : configs.front().out;
      for (ipmm::RunConfig& c : configs) c.out.clear(); /* run_sweep assigns */
      std::vector<ipmm::SweepEntry> entries =
          ipmm::run_sweep(configs, out_dir, sweep_workers);
      int bad = 0;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const ipmm::SweepEntry& e = entries[i];
        if (!e.error.empty()) {
          ++bad;
          std::printf("run %zu (%s dx=%g): FAILED: %s\n", i,
                      e.config.benchmark.c_str(), e.config.dx, e.error.c_str());
          continue;
        }
        std::printf("run %zu (%s dx=%g): %d steps, l1 %.6g -> %.6g, drift %.3g, "
                    "wall %.1fs\n",
                    i, e.config.benchmark.c_str(), e.config.dx, e.summary.steps,
                    e.summary.l1_initial, e.summary.l1_final,
                    e.summary.mass_drift_rel, e.summary.wall_s);
      }
      if (!out_dir.empty()) std::printf("wrote %s/sweep.csv\n", out_dir.c_str());
      return bad == 0 ? 0 : 1;
    }

    /* verify */
    long n = trials > 0 ? trials
             : suite == "theorem"      ? 10000
             : suite == "delaunay"     ? 500
             : suite == "preservation" ? 2000
                                       : 1000;
    ipmm::VerifyReport rep = ipmm::verify_suite(suite, n, vseed);
    std::printf("suite %s: %ld trials, %ld failures", rep.suite.c_str(),
                rep.trials, rep.failures);
    if (rep.suite == "conservation")
      std::printf(", max relative drift %.3g", rep.max_drift);
    std::printf(" -> %s\n", rep.passed ? "PASS" : "FAIL");
    if (!rep.detail.empty()) std::printf("  %s\n", rep.detail.c_str());
    return rep.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
