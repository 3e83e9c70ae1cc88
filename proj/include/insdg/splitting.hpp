// SPDX-License-Identifier: MIT
#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "insdg/dgops.hpp"
#include "insdg/linsolve.hpp"

namespace insdg {

struct SchemeCoefficients {
  int order = 1;
  double gamma = 1.0;
  std::vector<double> beta;   // weights of U^{n-i}
  std::vector<double> alpha;  // extrapolation weights of N(U^{n-i})
};

SchemeCoefficients scheme_coefficients(int S);

// weights of the order-J extrapolation of P^{n+1} from P^n, P^{n-1}, ...
std::vector<double> pressure_extrapolation(int J);

// five-stage fourth-order low-storage Runge-Kutta
struct Lserk {
  static constexpr int stages = 5;
  static const double a[stages];
  static const double b[stages];
  static const double c[stages];
};

inline void zero_like(const ScalarField& y, ScalarField& r) { r = ScalarField(y.size()); }
inline void zero_like(const VectorField& y, VectorField& r) { r = VectorField(y.size()); }

// one LSERK step of y' = rhs(t, y); rhs returns the derivative
template <class State, class Rhs>
void lserk_step(Rhs&& rhs, State& y, double t, double dt) {
  State res;
  zero_like(y, res);
  for (int k = 0; k < Lserk::stages; ++k) {
    const State f = rhs(t + Lserk::c[k] * dt, static_cast<const State&>(y));
    axpby(dt, f, Lserk::a[k], res);
    axpby(Lserk::b[k], res, 1.0, y);
  }
}

// Lagrange interpolant through (times[i], fields[i])
class TimeInterpolant {
 public:
  TimeInterpolant(std::vector<double> times, std::vector<const VectorField*> fields);
  VectorField operator()(double t) const;
  int degree() const { return static_cast<int>(times_.size()) - 1; }

 private:
  std::vector<double> times_;
  std::vector<const VectorField*> fields_;
};

// newest first: U[0] = U^n at t[0]
struct HistoryRing {
  std::deque<VectorField> U;
  std::deque<VectorField> N;  // N(U^{n-i}), only without subcycling
  std::deque<double> t;
  std::deque<ScalarField> P;
  int depth = 3;  // velocity levels kept
  int pressure_depth = 1;

  int levels() const { return static_cast<int>(U.size()); }
  void push(VectorField u, double time, ScalarField p);
};

// Dirichlet velocity traces (inflow data, zero on walls) at time t
struct VelocityTraces {
  std::vector<double> u, v;
};
VelocityTraces inflow_traces(const Discretization& d, const FlowBoundary& bc, double t);

// U^ = sum beta_i U^{n-i} - dt sum alpha_i N^{n-i}
VectorField advect_extrapolate(const HistoryRing& h, const SchemeCoefficients& c, double dt);

struct SubcycleConfig {
  int substeps = 1;
  double dt = 0.0;  // macro step; the substep is dt / substeps
};

// integrates dU~/dt = -N(Ubar(t), U~) from t^{n-i} to t^{n+1} for each history level and returns sum beta_i U~_i
VectorField subcycle_advect(const Discretization& d, const HistoryRing& h, const SchemeCoefficients& c,
                            const SubcycleConfig& cfg, const FlowBoundary& bc, int* evaluations = nullptr);

// largest stable substep: cfl min_e h_e / ((N+1)^2 |u|_max)
double subcycle_dt(const Discretization& d, const VectorField& U, double cfl);

enum class PrecondKind { None, Jacobi, Amg, PmgAmg };
PrecondKind parse_precond(const std::string& name);
const char* precond_name(PrecondKind k);

struct FlowConfig {
  int order = 2;           // S
  int pressure_order = 1;  // J
  double nu = 0.01;
  double dt = 1e-3;
  bool subcycling = false;
  int substeps = 1;
  double tol_velocity = 1e-8;
  double tol_pressure = 1e-8;
  int maxit = 2000;
  PrecondKind velocity_precond = PrecondKind::Jacobi;
  PrecondKind pressure_precond = PrecondKind::PmgAmg;
  MultigridConfig mg;
};

struct StageTimes {
  double advection = 0.0, velocity = 0.0, pressure = 0.0, update = 0.0, total = 0.0;
};

struct StepReport {
  int step = 0;
  double t = 0.0;
  int order = 0;
  int it_velocity_u = 0, it_velocity_v = 0, it_pressure = 0;
  int advection_evaluations = 0;
  StageTimes times;
};

class FlowSolver {
 public:
  FlowSolver(const Discretization& d, FlowConfig cfg, FlowBoundary bc);
  ~FlowSolver();

  void set_initial(VectorField U, ScalarField P, double t0);
  // several levels, newest first; the scheme starts at the order the history supports
  void set_history(std::vector<VectorField> U, std::vector<ScalarField> P, std::vector<double> t);
  StepReport step();

  const VectorField& velocity() const { return hist_.U.front(); }
  const ScalarField& pressure() const { return hist_.P.front(); }
  double time() const { return hist_.t.front(); }
  int steps() const { return steps_; }
  const HistoryRing& history() const { return hist_; }
  const FlowConfig& config() const { return cfg_; }
  const Discretization& disc() const { return *d_; }

  // sigma P^n and its outflow trace for time t^{n+1}
  ScalarField pressure_extrapolant(int J) const;
  std::vector<double> pressure_trace(double t) const;

  // solves (-L + gamma/(nu dt)) U^^ = U^/(nu dt) - G sigmaP / nu with velocity data at t1
  VectorField velocity_stage(const VectorField& Uhat, const ScalarField& sigmaP, std::span<const double> sigmaPD,
                             const SchemeCoefficients& c, double t1, SolveStats* su = nullptr,
                             SolveStats* sv = nullptr);
  // solves -L dP = -(gamma/dt) D.U^^ with outflow data dPD
  ScalarField pressure_stage(const VectorField& Uhh, std::span<const double> dPD, const SchemeCoefficients& c,
                             double t1, SolveStats* sp = nullptr);
  // U^{n+1} = U^^ - (dt/gamma) G dP, P^{n+1} = dP + sigma P^n
  void update_stage(const VectorField& Uhh, const ScalarField& dP, std::span<const double> dPD,
                    const ScalarField& sigmaP, const SchemeCoefficients& c, double t1, VectorField& U1,
                    ScalarField& P1) const;

  // discrete divergence of the current velocity
  ScalarField divergence() const;

 private:
  struct Cache;
  ApplyFn velocity_preconditioner(double lambda);

  const Discretization* d_;
  FlowConfig cfg_;
  FlowBoundary bc_;
  HistoryRing hist_;
  int steps_ = 0;
  std::unique_ptr<Cache> cache_;
};

}  // namespace insdg
