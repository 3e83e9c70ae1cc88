// SPDX-License-Identifier: MIT
#include "insdg/splitting.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <string>

namespace insdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_inflow(BoundaryTag t) { return t == BoundaryTag::Inflow; }
bool is_outflow(BoundaryTag t) { return t == BoundaryTag::Outflow; }

VectorField negate(VectorField f) {
  for (dlong n = 0; n < f.size(); ++n) {
    f.u[n] = -f.u[n];
    f.v[n] = -f.v[n];
  }
  return f;
}

void check_converged(const SolveStats& st, const char* what) {
  if (!st.converged)
    throw SolverError(std::string(what) + " solve did not converge: " + std::to_string(st.iterations) +
                      " iterations, relative residual " + std::to_string(st.relative_residual));
}

}  // namespace

SchemeCoefficients scheme_coefficients(int S) {
  switch (S) {
    case 1: return {1, 1.0, {1.0}, {1.0}};
    case 2: return {2, 1.5, {2.0, -0.5}, {2.0, -1.0}};
    case 3: return {3, 11.0 / 6.0, {3.0, -1.5, 1.0 / 3.0}, {3.0, -3.0, 1.0}};
    default: throw ConfigError("unsupported time integration order " + std::to_string(S));
  }
}

std::vector<double> pressure_extrapolation(int J) {
  switch (J) {
    case 0: return {};
    case 1: return {1.0};
    case 2: return {2.0, -1.0};
    case 3: return {3.0, -3.0, 1.0};
    default: throw ConfigError("unsupported pressure increment order " + std::to_string(J));
  }
}

const double Lserk::a[5] = {0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
                            -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0};
const double Lserk::b[5] = {1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0,
                            1720146321549.0 / 2090206949498.0, 3134564353537.0 / 4481467310338.0,
                            2277821191437.0 / 14882151754819.0};
const double Lserk::c[5] = {0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363183890.0,
                            2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0};

TimeInterpolant::TimeInterpolant(std::vector<double> times, std::vector<const VectorField*> fields)
    : times_(std::move(times)), fields_(std::move(fields)) {
  if (times_.empty() || times_.size() != fields_.size()) throw ShapeError("time interpolant: bad history");
}

VectorField TimeInterpolant::operator()(double t) const {
  const size_t m = times_.size();
  VectorField out(fields_[0]->size());
  for (size_t i = 0; i < m; ++i) {
    double w = 1.0;
    for (size_t j = 0; j < m; ++j)
      if (j != i) w *= (t - times_[j]) / (times_[i] - times_[j]);
    axpby(w, *fields_[i], 1.0, out);
  }
  return out;
}

void HistoryRing::push(VectorField u, double time, ScalarField p) {
  U.push_front(std::move(u));
  t.push_front(time);
  P.push_front(std::move(p));
  while (static_cast<int>(U.size()) > depth) {
    U.pop_back();
    t.pop_back();
  }
  while (static_cast<int>(N.size()) > depth) N.pop_back();
  while (static_cast<int>(P.size()) > std::max(1, pressure_depth)) P.pop_back();
}

VelocityTraces inflow_traces(const Discretization& d, const FlowBoundary& bc, double t) {
  VelocityTraces g;
  if (!bc.velocity) {
    g.u.assign(d.ntrace(), 0.0);
    g.v.assign(d.ntrace(), 0.0);
    return g;
  }
  g.u = boundary_trace(d, [&](double x, double y, double, double) { return bc.velocity(x, y, t).x; }, is_inflow);
  g.v = boundary_trace(d, [&](double x, double y, double, double) { return bc.velocity(x, y, t).y; }, is_inflow);
  return g;
}

VectorField advect_extrapolate(const HistoryRing& h, const SchemeCoefficients& c, double dt) {
  const int S = static_cast<int>(c.beta.size());
  if (h.levels() < S || static_cast<int>(h.N.size()) < S)
    throw ShapeError("advect_extrapolate: history holds fewer levels than the scheme order");
  VectorField out(h.U.front().size());
  for (int i = 0; i < S; ++i) {
    axpby(c.beta[i], h.U[i], 1.0, out);
    axpby(-dt * c.alpha[i], h.N[i], 1.0, out);
  }
  return out;
}

VectorField subcycle_advect(const Discretization& d, const HistoryRing& h, const SchemeCoefficients& c,
                            const SubcycleConfig& cfg, const FlowBoundary& bc, int* evaluations) {
  const int S = static_cast<int>(c.beta.size());
  if (cfg.substeps < 1) throw ConfigError("subcycling needs at least one substep");
  if (!(cfg.dt > 0.0)) throw ConfigError("subcycling needs a positive time step");
  if (h.levels() < S) throw ShapeError("subcycle_advect: history holds fewer levels than the scheme order");

  // degree-S interpolant through the available levels
  const int m = std::min(h.levels(), S + 1);
  std::vector<double> times(h.t.begin(), h.t.begin() + m);
  std::vector<const VectorField*> fields;
  for (int i = 0; i < m; ++i) fields.push_back(&h.U[i]);
  const TimeInterpolant Ubar(times, fields);

  const double dts = cfg.dt / cfg.substeps;
  int count = 0;
  auto rhs = [&](double tau, const VectorField& Ut) {
    const VectorField Ub = Ubar(tau);
    const VelocityTraces g = inflow_traces(d, bc, tau);
    ++count;
    return negate(advection_operator(d, Ub, Ut, g.u, g.v));
  };

  VectorField out(h.U.front().size());
  for (int i = 0; i < S; ++i) {
    VectorField Ut = h.U[i];
    double tau = h.t[i];
    const int nsub = (i + 1) * cfg.substeps;
    for (int k = 0; k < nsub; ++k) {
      lserk_step(rhs, Ut, tau, dts);
      tau = h.t[i] + (k + 1) * dts;
    }
    axpby(c.beta[i], Ut, 1.0, out);
  }
  if (evaluations) *evaluations = count;
  return out;
}

double subcycle_dt(const Discretization& d, const VectorField& U, double cfl) {
  double umax = 0.0;
  for (dlong n = 0; n < U.size(); ++n) umax = std::max(umax, std::hypot(U.u[n], U.v[n]));
  if (umax == 0.0) throw ConfigError("subcycle_dt: velocity field is zero");
  return cfl * d.min_spacing() / umax;
}

PrecondKind parse_precond(const std::string& name) {
  if (name == "none") return PrecondKind::None;
  if (name == "jacobi") return PrecondKind::Jacobi;
  if (name == "amg") return PrecondKind::Amg;
  if (name == "pmg-amg") return PrecondKind::PmgAmg;
  throw ConfigError("unknown preconditioner '" + name + "' (expected none, jacobi, amg or pmg-amg)");
}

const char* precond_name(PrecondKind k) {
  switch (k) {
    case PrecondKind::None: return "none";
    case PrecondKind::Jacobi: return "jacobi";
    case PrecondKind::Amg: return "amg";
    default: return "pmg-amg";
  }
}

struct FlowSolver::Cache {
  std::unique_ptr<EllipticOperator> pressure_op;
  std::unique_ptr<MultigridHierarchy> pressure_mg;
  ApplyFn pressure_precond;
  bool pressure_singular = false;
  std::map<double, std::unique_ptr<EllipticOperator>> velocity_ops;
  std::map<double, std::unique_ptr<MultigridHierarchy>> velocity_mg;
  std::map<double, ApplyFn> velocity_precond;
};

FlowSolver::FlowSolver(const Discretization& d, FlowConfig cfg, FlowBoundary bc)
    : d_(&d), cfg_(std::move(cfg)), bc_(std::move(bc)), cache_(std::make_unique<Cache>()) {
  scheme_coefficients(cfg_.order);
  pressure_extrapolation(cfg_.pressure_order);
  if (!(cfg_.nu > 0.0)) throw ConfigError("viscosity must be positive");
  if (!(cfg_.dt > 0.0)) throw ConfigError("time step must be positive");
  if (cfg_.subcycling && cfg_.substeps < 1) throw ConfigError("subcycling needs at least one substep");
  hist_.depth = cfg_.order + 1;
  hist_.pressure_depth = std::max(1, cfg_.pressure_order);

  const EllipticBC pbc = EllipticBC::pressure();
  auto& c = *cache_;
  c.pressure_op = std::make_unique<EllipticOperator>(d, 0.0, pbc);
  c.pressure_singular = c.pressure_op->singular();
  switch (cfg_.pressure_precond) {
    case PrecondKind::None: break;
    case PrecondKind::Jacobi: {
      std::vector<double> diag = c.pressure_op->diagonal();
      c.pressure_precond = point_jacobi_precond(std::move(diag));
      break;
    }
    case PrecondKind::Amg:
      c.pressure_mg = build_full_amg(d, 0.0, pbc, cfg_.mg);
      c.pressure_precond = c.pressure_mg->as_precond();
      break;
    case PrecondKind::PmgAmg:
      c.pressure_mg = build_pmg_amg(d, 0.0, pbc, cfg_.mg);
      c.pressure_precond = c.pressure_mg->as_precond();
      break;
  }
}

FlowSolver::~FlowSolver() = default;

void FlowSolver::set_initial(VectorField U, ScalarField P, double t0) {
  if (U.size() != d_->ndof() || P.size() != d_->ndof()) throw ShapeError("initial state has the wrong size");
  hist_ = HistoryRing{};
  hist_.depth = cfg_.order + 1;
  hist_.pressure_depth = std::max(1, cfg_.pressure_order);
  hist_.push(std::move(U), t0, std::move(P));
  steps_ = 0;
}

void FlowSolver::set_history(std::vector<VectorField> U, std::vector<ScalarField> P, std::vector<double> t) {
  if (U.empty() || U.size() != P.size() || U.size() != t.size()) throw ShapeError("set_history: bad history");
  for (size_t i = 1; i < t.size(); ++i)
    if (!(t[i] < t[i - 1])) throw ShapeError("set_history: times must decrease");
  hist_ = HistoryRing{};
  hist_.depth = cfg_.order + 1;
  hist_.pressure_depth = std::max(1, cfg_.pressure_order);
  for (size_t k = U.size(); k-- > 0;) {
    if (U[k].size() != d_->ndof() || P[k].size() != d_->ndof()) throw ShapeError("history level has the wrong size");
    if (!cfg_.subcycling && k + 1 < U.size()) {
      const VelocityTraces g = inflow_traces(*d_, bc_, t[k + 1]);
      hist_.N.push_front(advection_operator(*d_, hist_.U.front(), hist_.U.front(), g.u, g.v));
    }
    hist_.push(std::move(U[k]), t[k], std::move(P[k]));
  }
  steps_ = static_cast<int>(hist_.U.size()) - 1;
}

ApplyFn FlowSolver::velocity_preconditioner(double lambda) {
  auto& c = *cache_;
  auto it = c.velocity_precond.find(lambda);
  if (it != c.velocity_precond.end()) return it->second;
  ApplyFn P;
  const EllipticBC vbc = EllipticBC::velocity();
  switch (cfg_.velocity_precond) {
    case PrecondKind::None: break;
    case PrecondKind::Jacobi: P = block_jacobi_precond(*d_, lambda); break;
    case PrecondKind::Amg:
      c.velocity_mg[lambda] = build_full_amg(*d_, lambda, vbc, cfg_.mg);
      P = c.velocity_mg[lambda]->as_precond();
      break;
    case PrecondKind::PmgAmg:
      c.velocity_mg[lambda] = build_pmg_amg(*d_, lambda, vbc, cfg_.mg);
      P = c.velocity_mg[lambda]->as_precond();
      break;
  }
  c.velocity_precond[lambda] = P;
  return P;
}

ScalarField FlowSolver::pressure_extrapolant(int J) const {
  const std::vector<double> w = pressure_extrapolation(std::min(J, static_cast<int>(hist_.P.size())));
  ScalarField out(d_->ndof());
  for (size_t j = 0; j < w.size(); ++j) axpby(w[j], hist_.P[j], 1.0, out);
  return out;
}

std::vector<double> FlowSolver::pressure_trace(double t) const {
  if (!bc_.pressure) return std::vector<double>(d_->ntrace(), 0.0);
  return boundary_trace(*d_, [&](double x, double y, double, double) { return bc_.pressure(x, y, t); },
                        is_outflow);
}

VectorField FlowSolver::velocity_stage(const VectorField& Uhat, const ScalarField& sigmaP,
                                       std::span<const double> sigmaPD, const SchemeCoefficients& c, double t1,
                                       SolveStats* su, SolveStats* sv) {
  const Discretization& d = *d_;
  const double nu = cfg_.nu, dt = cfg_.dt;
  const double lambda = c.gamma / (nu * dt);
  const EllipticBC vbc = EllipticBC::velocity();

  auto& cache = *cache_;
  auto& op = cache.velocity_ops[lambda];
  if (!op) op = std::make_unique<EllipticOperator>(d, lambda, vbc);
  const ApplyFn P = velocity_preconditioner(lambda);
  const ApplyFn A = [o = op.get()](std::span<const double> x, std::span<double> y) { o->apply(x, y); };

  const VectorField G = dg_gradient(d, sigmaP, sigmaPD);
  const VelocityTraces g = inflow_traces(d, bc_, t1);
  std::vector<double> hu(d.ntrace(), 0.0), hv(d.ntrace(), 0.0);
  if (bc_.velocity_normal_derivative) {
    hu = boundary_trace(
        d, [&](double x, double y, double nx, double ny) { return bc_.velocity_normal_derivative(x, y, t1, nx, ny).x; },
        is_outflow);
    hv = boundary_trace(
        d, [&](double x, double y, double nx, double ny) { return bc_.velocity_normal_derivative(x, y, t1, nx, ny).y; },
        is_outflow);
  }

  auto solve = [&](const ScalarField& uh, const ScalarField& gp, const std::vector<double>& gD,
                   const std::vector<double>& hN, SolveStats* st) {
    ScalarField f(d.ndof());
    for (dlong n = 0; n < d.ndof(); ++n) f[n] = uh[n] / (nu * dt) - gp[n] / nu;
    ScalarField b = mass_apply(d, f);
    const ScalarField B = sipdg_boundary_term(d, vbc, gD, hN);
    axpby(-1.0, B, 1.0, b);
    ScalarField x(d.ndof());
    PcgOptions opt;
    opt.tol = cfg_.tol_velocity;
    opt.maxit = cfg_.maxit;
    const SolveStats s = pcg(A, P, b.span(), x.span(), opt);
    check_converged(s, "velocity");
    if (st) *st = s;
    return x;
  };
  VectorField out;
  out.u = solve(Uhat.u, G.u, g.u, hu, su);
  out.v = solve(Uhat.v, G.v, g.v, hv, sv);
  return out;
}

ScalarField FlowSolver::pressure_stage(const VectorField& Uhh, std::span<const double> dPD,
                                       const SchemeCoefficients& c, double t1, SolveStats* sp) {
  const Discretization& d = *d_;
  auto& cache = *cache_;
  const EllipticBC pbc = EllipticBC::pressure();
  const VelocityTraces g = inflow_traces(d, bc_, t1);
  ScalarField div = dg_divergence(d, Uhh, g.u, g.v);
  for (auto& x : div.values) x *= -c.gamma / cfg_.dt;
  ScalarField b = mass_apply(d, div);
  if (!dPD.empty()) {
    const ScalarField B = sipdg_boundary_term(d, pbc, dPD, {});
    axpby(-1.0, B, 1.0, b);
  }
  const EllipticOperator* op = cache.pressure_op.get();
  const ApplyFn A = [op](std::span<const double> x, std::span<double> y) { op->apply(x, y); };
  ScalarField x(d.ndof());
  PcgOptions opt;
  opt.tol = cfg_.tol_pressure;
  opt.maxit = cfg_.maxit;
  opt.project_mean = cache.pressure_singular;
  const SolveStats s = pcg(A, cache.pressure_precond, b.span(), x.span(), opt);
  check_converged(s, "pressure");
  if (sp) *sp = s;
  return x;
}

void FlowSolver::update_stage(const VectorField& Uhh, const ScalarField& dP, std::span<const double> dPD,
                              const ScalarField& sigmaP, const SchemeCoefficients& c, double, VectorField& U1,
                              ScalarField& P1) const {
  const VectorField G = dg_gradient(*d_, dP, dPD);
  U1 = Uhh;
  axpby(-cfg_.dt / c.gamma, G, 1.0, U1);
  P1 = sigmaP;
  axpby(1.0, dP, 1.0, P1);
}

ScalarField FlowSolver::divergence() const {
  const VelocityTraces g = inflow_traces(*d_, bc_, time());
  return dg_divergence(*d_, velocity(), g.u, g.v);
}

StepReport FlowSolver::step() {
  if (hist_.U.empty()) throw ConfigError("flow solver has no initial state");
  const auto t_start = Clock::now();
  const Discretization& d = *d_;
  StepReport rep;
  rep.step = steps_ + 1;
  const int S = std::min(cfg_.order, steps_ + 1);
  rep.order = S;
  const SchemeCoefficients c = scheme_coefficients(S);
  const double tn = time(), dt = cfg_.dt, t1 = tn + dt;

  // advection
  auto t0 = Clock::now();
  VectorField Uhat;
  if (cfg_.subcycling) {
    Uhat = subcycle_advect(d, hist_, c, SubcycleConfig{cfg_.substeps, dt}, bc_, &rep.advection_evaluations);
  } else {
    const VelocityTraces g = inflow_traces(d, bc_, tn);
    hist_.N.push_front(advection_operator(d, hist_.U.front(), hist_.U.front(), g.u, g.v));
    while (static_cast<int>(hist_.N.size()) > hist_.depth) hist_.N.pop_back();
    rep.advection_evaluations = 1;
    Uhat = advect_extrapolate(hist_, c, dt);
  }
  rep.times.advection = seconds_since(t0);

  // velocity
  t0 = Clock::now();
  const int J = std::min(cfg_.pressure_order, static_cast<int>(hist_.P.size()));
  const std::vector<double> w = pressure_extrapolation(J);
  const ScalarField sigmaP = pressure_extrapolant(J);
  std::vector<double> sigmaPD(d.ntrace(), 0.0), dPD = pressure_trace(t1);
  for (size_t j = 0; j < w.size(); ++j) {
    const std::vector<double> pj = pressure_trace(hist_.t[j]);
    for (dlong k = 0; k < d.ntrace(); ++k) sigmaPD[k] += w[j] * pj[k];
  }
  for (dlong k = 0; k < d.ntrace(); ++k) dPD[k] -= sigmaPD[k];
  SolveStats su, sv, sp;
  const VectorField Uhh = velocity_stage(Uhat, sigmaP, sigmaPD, c, t1, &su, &sv);
  rep.it_velocity_u = su.iterations;
  rep.it_velocity_v = sv.iterations;
  rep.times.velocity = seconds_since(t0);

  // pressure
  t0 = Clock::now();
  const ScalarField dP = pressure_stage(Uhh, dPD, c, t1, &sp);
  rep.it_pressure = sp.iterations;
  rep.times.pressure = seconds_since(t0);

  // update
  t0 = Clock::now();
  VectorField U1;
  ScalarField P1;
  update_stage(Uhh, dP, dPD, sigmaP, c, t1, U1, P1);
  hist_.push(std::move(U1), t1, std::move(P1));
  ++steps_;
  rep.times.update = seconds_since(t0);

  rep.t = t1;
  rep.times.total = seconds_since(t_start);
  return rep;
}

}  // namespace insdg
