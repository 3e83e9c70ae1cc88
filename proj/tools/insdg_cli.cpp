// SPDX-License-Identifier: MIT
// insdg command line driver: run, convergence, cylinder, roofline.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "insdg/cases.hpp"
#include "insdg/config.hpp"
#include "insdg/perfmodel.hpp"

using namespace insdg;

namespace {

const std::vector<std::string> kKnownKeys = {
    "case",        "degree",     "cells",      "mesh",       "mesh_scale",   "dt",         "cfl",
    "subcycles",   "final_time", "precond",    "velocity_precond", "tol",    "tol_velocity", "tol_pressure",
    "maxit",       "nu",         "order",      "pressure_order", "exact_start", "out_dir",  "kind",
    "cells_list",  "dts",        "substep_list", "inflow",   "probe_x",      "probe_y",    "hardware",
    "buffer_mb",   "reps",       "kernel_cells", "degrees"};

struct Flags {
  std::optional<std::string> config, mesh, degree, dt, cfl, subcycles, final_time, precond, tol, nu, out_dir, hardware;
};

Config gather(const Flags& f) {
  Config c = f.config ? Config::load(*f.config) : Config{};
  auto put = [&c](const char* key, const std::optional<std::string>& v) {
    if (v) c.set(key, *v);
  };
  put("mesh", f.mesh);
  put("degree", f.degree);
  put("dt", f.dt);
  put("cfl", f.cfl);
  put("subcycles", f.subcycles);
  put("final_time", f.final_time);
  put("precond", f.precond);
  put("tol", f.tol);
  put("nu", f.nu);
  put("out_dir", f.out_dir);
  put("hardware", f.hardware);
  c.require_known(kKnownKeys);
  return c;
}

std::string out_dir(const Config& c) {
  const std::string dir = c.get_string("out_dir", "out");
  std::filesystem::create_directories(dir);
  return dir;
}

FlowConfig flow_config(const Config& c) {
  FlowConfig f;
  f.order = c.get_int("order", f.order);
  f.pressure_order = c.get_int("pressure_order", f.pressure_order);
  f.nu = c.get_double("nu", f.nu);
  f.dt = c.get_double("dt", f.dt);
  f.substeps = c.get_int("subcycles", 0);
  f.subcycling = f.substeps > 0;
  if (!f.subcycling) f.substeps = 1;
  const double tol = c.get_double("tol", 1e-8);
  f.tol_velocity = c.get_double("tol_velocity", tol);
  f.tol_pressure = c.get_double("tol_pressure", tol);
  f.maxit = c.get_int("maxit", f.maxit);
  f.pressure_precond = parse_precond(c.get_string("precond", precond_name(f.pressure_precond)));
  f.velocity_precond = parse_precond(c.get_string("velocity_precond", precond_name(f.velocity_precond)));
  return f;
}

VortexConfig vortex_config(const Config& c) {
  VortexConfig v;
  v.nu = c.get_double("nu", v.nu);
  v.final_time = c.get_double("final_time", v.final_time);
  v.N = c.get_int("degree", v.N);
  v.cells = c.get_int("cells", c.get_int("mesh", v.cells));
  v.exact_start = c.get_bool("exact_start", v.exact_start);
  v.flow = flow_config(c);
  return v;
}

CylinderConfig cylinder_config(const Config& c) {
  CylinderConfig y;
  y.N = c.get_int("degree", y.N);
  y.mesh_scale = c.get_double("mesh_scale", y.mesh_scale);
  y.mesh_file = c.get_string("mesh", "");
  y.final_time = c.get_double("final_time", y.final_time);
  y.inflow = c.get_double("inflow", y.inflow);
  y.cfl = c.get_double("cfl", y.cfl);
  y.probe = {c.get_double("probe_x", y.probe.x), c.get_double("probe_y", y.probe.y)};
  y.flow = flow_config(c);
  return y;
}

void report_vortex(const VortexResult& r, const std::string& dir) {
  write_iters_csv(r.reports, dir + "/iters.csv");
  write_timings_csv(r.times, dir + "/timings.csv");
  std::printf("steps %d  err_u %.4e  err_v %.4e  err_p %.4e\n", r.steps, r.err_u, r.err_v, r.err_p);
  std::printf("mean iterations: velocity %.2f  pressure %.2f\n", r.mean_it_velocity, r.mean_it_pressure);
  std::printf("divergence %.3e  wall %.2f s\n", r.max_divergence, r.seconds);
}

int cmd_cylinder(const Config& c) {
  const std::string dir = out_dir(c);
  CylinderConfig y = cylinder_config(c);
  y.snapshot_path = dir + "/snapshot.csv";
  const CylinderResult r = run_cylinder(y);
  write_iters_csv(r.reports, dir + "/iters.csv");
  write_timings_csv(r.times, dir + "/timings.csv");
  std::FILE* f = std::fopen((dir + "/probe.csv").c_str(), "w");
  if (!f) throw Error("cannot write " + dir + "/probe.csv");
  std::fprintf(f, "t,u,v\n");
  for (std::size_t i = 0; i < r.t.size(); ++i) std::fprintf(f, "%.17g,%.17g,%.17g\n", r.t[i], r.probe_u[i], r.probe_v[i]);
  std::fclose(f);
  std::printf("steps %zu  St %.4f  f %.4f  cycles %.1f  %s\n", r.t.size(), r.st.strouhal, r.st.frequency,
              r.st.cycles, r.st.reliable ? "reliable" : "unreliable");
  std::printf("wall %.2f s\n", r.seconds);
  return 0;
}

int cmd_run(const Config& c) {
  const std::string kase = c.get_string("case", "vortex");
  if (kase == "cylinder") return cmd_cylinder(c);
  if (kase != "vortex") throw ConfigError("unknown case '" + kase + "' (expected vortex or cylinder)");
  const std::string dir = out_dir(c);
  VortexConfig v = vortex_config(c);
  v.snapshot_path = dir + "/snapshot.csv";
  report_vortex(run_vortex(v), dir);
  return 0;
}

int cmd_convergence(Config c, const std::string& kind_name) {
  if (!kind_name.empty()) c.set("kind", kind_name);
  const std::string dir = out_dir(c);
  ConvergenceConfig cc;
  cc.kind = parse_convergence_kind(c.get_string("kind", "spatial"));
  cc.base = vortex_config(c);
  if (cc.kind == ConvergenceKind::Subcycle && !cc.base.flow.subcycling) {
    cc.base.flow.subcycling = true;
    cc.base.flow.substeps = 4;
  }
  cc.cells = c.get_int_list("cells_list", cc.cells);
  cc.dts = c.get_double_list("dts", {0.004, 0.002, 0.001, 0.0005});
  const ConvergenceRecord rec = run_convergence(cc);
  write_errors_csv(rec, dir + "/errors.csv");
  for (const auto& r : rec.rows)
    std::printf("h %-9.5g dt %-9.5g N %d Ns %d  err_u %.4e  err_v %.4e  err_p %.4e  %s\n", r.h, r.dt, r.N, r.Ns,
                r.err_u, r.err_v, r.err_p, r.failure.c_str());
  std::printf("slopes: u %.3f  v %.3f  p %.3f\n", rec.slope_u, rec.slope_v, rec.slope_p);

  if (cc.kind == ConvergenceKind::Subcycle) {
    const auto rows = run_subcycle_study(cc.base, c.get_int_list("substep_list", {1, 4, 8, 16}),
                                         c.get_double("cfl", 0.5));
    write_subcycle_csv(rows, dir + "/subcycle.csv");
    for (const auto& r : rows)
      std::printf("Ns %2d  dt %.5g  steps %d  it_velocity %.2f  it_pressure %.2f  speedup %.2f\n", r.Ns, r.dt,
                  r.steps, r.mean_it_velocity, r.mean_it_pressure, r.speedup);
  }
  return 0;
}

int cmd_roofline(const Config& c) {
  const std::string dir = out_dir(c);
  const HardwareDescriptor hw =
      c.has("hardware") ? descriptor_from_config(Config::load(c.get_string("hardware", ""))) : host_descriptor();
  const std::size_t bytes = static_cast<std::size_t>(c.get_double("buffer_mb", 256.0) * (1 << 20));
  const BandwidthMeasurement bw = measure_copy_bandwidth(bytes, std::max(11, c.get_int("reps", 11)));
  const double Bg = bw.bytes_per_second, Bsh = shared_bandwidth(hw);
  std::printf("%s: Bg %.2f GB/s (min %.2f, max %.2f)  Bsh %.2f GB/s\n", hw.name.c_str(), Bg * 1e-9, bw.min * 1e-9,
              bw.max * 1e-9, Bsh * 1e-9);
  const int cells = c.get_int("kernel_cells", c.get_int("mesh", 32));
  std::vector<RooflineRow> all;
  for (int N : c.get_int_list("degrees", {1, 2, 3, 4, 5})) {
    const Discretization d = make_discretization(vortex_mesh(cells), N);
    for (auto& row : benchmark_kernels(d, Bg, Bsh, c.get_int("reps", 11))) {
      std::printf("%-14s N %d  K %d  model %8.2f GFLOP/s  measured %8.2f GFLOP/s  efficiency %.2f\n",
                  kernel_name(row.cost.kernel), row.cost.N, row.cost.K, row.bound.combined * 1e-9,
                  row.measured_gflops, row.efficiency);
      all.push_back(row);
    }
  }
  write_roofline_csv(all, dir + "/roofline.csv");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"insdg: nodal DG incompressible Navier-Stokes"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "key = value configuration file");
  app.add_option("--mesh", f.mesh, "vortex cells per side, or a mesh file for the cylinder");
  app.add_option("--degree", f.degree, "polynomial degree N");
  app.add_option("--dt", f.dt, "time step");
  app.add_option("--cfl", f.cfl, "substep CFL number");
  app.add_option("--subcycles", f.subcycles, "substeps per step (0 disables subcycling)");
  app.add_option("--final-time", f.final_time, "final time");
  app.add_option("--precond", f.precond, "pressure preconditioner: none, jacobi, amg, pmg-amg");
  app.add_option("--tol", f.tol, "relative solver tolerance");
  app.add_option("--nu", f.nu, "kinematic viscosity");
  app.add_option("--out-dir", f.out_dir, "output directory");

  auto* run = app.add_subcommand("run", "single simulation driven by the config (case = vortex | cylinder)");
  std::string kind;
  auto* conv = app.add_subcommand("convergence", "Taylor vortex convergence study");
  conv->add_option("kind", kind, "spatial, temporal or subcycle")->check(CLI::IsMember({"spatial", "temporal", "subcycle"}));
  auto* cyl = app.add_subcommand("cylinder", "flow past a square cylinder");
  auto* roof = app.add_subcommand("roofline", "bandwidth measurement and kernel roofline report");
  roof->add_option("--hardware", f.hardware, "hardware descriptor file (default: this host)");

  CLI11_PARSE(app, argc, argv);
  try {
    const Config c = gather(f);
    if (*run) return cmd_run(c);
    if (*conv) return cmd_convergence(c, kind);
    if (*cyl) return cmd_cylinder(c);
    if (*roof) return cmd_roofline(c);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "insdg: %s\n", e.what());
    return 1;
  }
  return 0;
}
