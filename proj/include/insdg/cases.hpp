// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "insdg/splitting.hpp"

namespace insdg {

using SpaceTimeFn = std::function<double(double x, double y, double t)>;

struct ExactSolution {
  SpaceTimeFn u, v, p;
  std::function<Vec2(double x, double y, double t, double nx, double ny)> dudn;
  double nu = 0.0;
};

// Taylor vortex on [-0.5, 0.5]^2
ExactSolution taylor_exact(double nu);

// exact velocity on inflow faces, exact pressure and normal derivative on outflow faces
FlowBoundary exact_boundary(const ExactSolution& ex);

struct L2Result {
  double value = 0.0;
  bool relative = true;  // false when the exact field has zero norm
};

// relative L2 error by cubature of order 2N+2
L2Result l2_error(const Discretization& d, const ScalarField& f, const std::function<double(double, double)>& exact);

// least-squares slope of log y against log x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// structured Taylor vortex mesh with n x n cells: Inflow left, bottom and top, Outflow right
Mesh vortex_mesh(int n);

struct VortexConfig {
  double nu = 0.01;
  double final_time = 0.5;
  int N = 3;
  int cells = 8;  // per side
  bool exact_start = false;  // seed S+1 exact history levels instead of the low-order ramp
  FlowConfig flow;
  std::string snapshot_path;  // final state as x, y, u, v, p when set
};

struct VortexResult {
  double err_u = 0.0, err_v = 0.0, err_p = 0.0;
  double h = 0.0;
  int steps = 0;
  double mean_it_velocity = 0.0, mean_it_pressure = 0.0;
  double max_divergence = 0.0;  // L2 norm of the discrete divergence at the final time
  StageTimes times;
  int advection_evaluations = 0;
  double seconds = 0.0;
  std::vector<StepReport> reports;
};

// Taylor vortex from exact data at t = 0 to final_time (rounded to whole steps of flow.dt)
VortexResult run_vortex(const VortexConfig& cfg);

enum class ConvergenceKind { Spatial, Temporal, Subcycle };
ConvergenceKind parse_convergence_kind(const std::string& s);
const char* convergence_kind_name(ConvergenceKind k);

struct ConvergenceRow {
  double h = 0.0, dt = 0.0;
  int N = 0, Ns = 0;
  double err_u = 0.0, err_v = 0.0, err_p = 0.0;
  double it_velocity = 0.0, it_pressure = 0.0;
  double seconds = 0.0;
  std::string failure;  // empty when the run succeeded
};

struct ConvergenceRecord {
  ConvergenceKind kind = ConvergenceKind::Spatial;
  double final_time = 0.0;
  std::vector<ConvergenceRow> rows;
  double slope_u = 0.0, slope_v = 0.0, slope_p = 0.0;
  void fit(int finest = 3);  // fit over the finest rows
};

struct ConvergenceConfig {
  ConvergenceKind kind = ConvergenceKind::Spatial;
  VortexConfig base;
  std::vector<int> cells = {4, 8, 16, 32};  // spatial refinement
  std::vector<double> dts;                   // temporal and subcycle refinement
};

ConvergenceRecord run_convergence(const ConvergenceConfig& cfg);

// errors.csv: h, dt, N, Ns, err_u, err_v, err_p with a slope footer
void write_errors_csv(const ConvergenceRecord& rec, const std::string& path);
std::string errors_csv(const ConvergenceRecord& rec);
ConvergenceRecord parse_errors_csv(const std::string& text);

struct StrouhalResult {
  double strouhal = 0.0;
  double frequency = 0.0;
  double cycles = 0.0;  // shedding cycles in the analysed window
  bool reliable = false;
};

// dominant frequency of the second half of a uniformly sampled signal (Hann window, parabolic peak)
StrouhalResult strouhal_number(const std::vector<double>& t, const std::vector<double>& signal, double D = 1.0,
                               double U = 1.0);

// [-16, 25] x [-22, 22] with the unit square cylinder at the origin; `scale` multiplies the line counts
Mesh cylinder_mesh(double scale = 1.0);

struct CylinderConfig {
  int N = 4;
  double mesh_scale = 1.0;
  double final_time = 150.0;
  double inflow = 1.0;
  double cfl = 0.5;
  Vec2 probe = {2.5, 0.5};
  FlowConfig flow;  // dt is overwritten when flow.subcycling and cfl > 0
  std::string mesh_file;  // overrides the generated mesh
  std::string snapshot_path;
};

struct CylinderResult {
  std::vector<double> t, probe_u, probe_v;
  StrouhalResult st;
  StageTimes times;
  std::vector<StepReport> reports;
  double seconds = 0.0;
};

CylinderResult run_cylinder(const CylinderConfig& cfg);

struct SubcycleRow {
  int Ns = 0;
  double dt = 0.0;
  int steps = 0;
  double mean_it_velocity = 0.0, mean_it_pressure = 0.0;
  int advection_evaluations = 0;
  StageTimes times;
  double speedup = 1.0;
};

// vortex runs over Ns at a fixed substep size dt_s = cfl-limited; dt = Ns dt_s
std::vector<SubcycleRow> run_subcycle_study(const VortexConfig& base, const std::vector<int>& Ns, double cfl);

void write_subcycle_csv(const std::vector<SubcycleRow>& rows, const std::string& path);
// iters.csv: step, t, it_velocity_u, it_velocity_v, it_pressure
void write_iters_csv(const std::vector<StepReport>& reports, const std::string& path);
// timings.csv: stage, seconds, fraction
void write_timings_csv(const StageTimes& t, const std::string& path);
// x, y, u, v, p at the nodes
void write_snapshot_csv(const Discretization& d, const VectorField& U, const ScalarField& P, const std::string& path);

}  // namespace insdg
