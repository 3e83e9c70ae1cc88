// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "insdg/cases.hpp"
#include "insdg/splitting.hpp"

using namespace insdg;

namespace {

constexpr double kPi = 3.14159265358979323846;

ScalarField random_field(dlong n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  ScalarField f(n);
  for (auto& v : f.values) v = U(rng);
  return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (dlong i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const ScalarField& a) {
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

// U = (a, phi(x - a t)) solves U_t + div(U (x) U) = 0
struct Shear {
  double a = 1.0;
  double phi(double x) const { return 0.2 * std::sin(kPi * x); }
  Vec2 operator()(double x, double, double t) const { return {a, phi(x - a * t)}; }
};

VectorField shear_field(const Discretization& d, const Shear& s, double t) {
  VectorField U(d.ndof());
  for (dlong n = 0; n < d.ndof(); ++n) {
    const Vec2 w = s(d.x[n], d.y[n], t);
    U.u[n] = w.x;
    U.v[n] = w.y;
  }
  return U;
}

}  // namespace

TEST(Coefficients, LowOrders) {
  const auto c1 = scheme_coefficients(1);
  EXPECT_EQ(c1.gamma, 1.0);
  EXPECT_EQ(c1.beta, std::vector<double>{1.0});
  EXPECT_EQ(c1.alpha, std::vector<double>{1.0});
  const auto c2 = scheme_coefficients(2);
  EXPECT_EQ(c2.gamma, 1.5);
  EXPECT_EQ(c2.beta[0], 2.0);
  EXPECT_EQ(c2.beta[1], -0.5);
  EXPECT_EQ(c2.alpha[0], 2.0);
  EXPECT_EQ(c2.alpha[1], -1.0);
  EXPECT_THROW(scheme_coefficients(0), ConfigError);
  EXPECT_THROW(scheme_coefficients(4), ConfigError);
}

// gamma t1^k - sum beta_i t_{n-i}^k = k t1^{k-1} with t1 = 1, t_{n-i} = -i, dt = 1
TEST(Coefficients, OrderConditions) {
  for (int S = 1; S <= 3; ++S) {
    const auto c = scheme_coefficients(S);
    double sb = 0.0, sa = 0.0;
    for (double b : c.beta) sb += b;
    for (double a : c.alpha) sa += a;
    EXPECT_NEAR(sb, c.gamma, 1e-14);
    EXPECT_NEAR(sa, 1.0, 1e-14);
    for (int k = 1; k <= S; ++k) {
      double lhs = c.gamma;
      for (int i = 0; i < S; ++i) lhs -= c.beta[i] * std::pow(-i, k);
      EXPECT_NEAR(lhs, k, 1e-13) << "S=" << S << " k=" << k;
    }
    for (int k = 0; k < S; ++k) {
      double ext = 0.0;
      for (int i = 0; i < S; ++i) ext += c.alpha[i] * std::pow(-i, k);
      EXPECT_NEAR(ext, 1.0, 1e-13) << "S=" << S << " k=" << k;
    }
  }
}

TEST(Coefficients, PressureExtrapolation) {
  EXPECT_TRUE(pressure_extrapolation(0).empty());
  EXPECT_EQ(pressure_extrapolation(1), std::vector<double>{1.0});
  EXPECT_EQ(pressure_extrapolation(2), (std::vector<double>{2.0, -1.0}));
  EXPECT_THROW(pressure_extrapolation(4), ConfigError);
}

TEST(Lserk, ZeroRhsLeavesStateUnchanged) {
  ScalarField y = random_field(5, 1), y0 = y;
  lserk_step([](double, const ScalarField& s) { return ScalarField(s.size()); }, y, 0.0, 0.3);
  EXPECT_EQ(max_diff(y, y0), 0.0);
}

TEST(Lserk, FourthOrderOnExponential) {
  std::vector<double> dts, errs;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) {
    ScalarField y(std::vector<double>{1.0});
    const int n = static_cast<int>(std::lround(2.0 / dt));
    double t = 0.0;
    for (int k = 0; k < n; ++k, t += dt)
      lserk_step([](double, const ScalarField& s) { return ScalarField(std::vector<double>{-s[0]}); }, y, t, dt);
    dts.push_back(dt);
    errs.push_back(std::abs(y[0] - std::exp(-2.0)));
  }
  EXPECT_NEAR(fit_slope(dts, errs), 4.0, 0.1);
}

TEST(Lserk, LinearSystemSuperposition) {
  auto rhs = [](double, const ScalarField& s) {
    return ScalarField(std::vector<double>{-0.5 * s[0] + 2.0 * s[1], -3.0 * s[0] - 0.1 * s[1]});
  };
  ScalarField a(std::vector<double>{0.3, -1.2}), b(std::vector<double>{2.0, 0.7});
  ScalarField c(std::vector<double>{2.0 * a[0] - 3.0 * b[0], 2.0 * a[1] - 3.0 * b[1]});
  lserk_step(rhs, a, 0.0, 0.1);
  lserk_step(rhs, b, 0.0, 0.1);
  lserk_step(rhs, c, 0.0, 0.1);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(c[i], 2.0 * a[i] - 3.0 * b[i], 1e-13);
}

TEST(AdvectExtrapolate, ConstantHistoryGivesGammaTimesState) {
  for (int S = 1; S <= 3; ++S) {
    const auto c = scheme_coefficients(S);
    HistoryRing h;
    h.depth = S;
    for (int i = 0; i < S; ++i) {
      VectorField U(4);
      for (dlong n = 0; n < 4; ++n) U.u[n] = 1.5, U.v[n] = -2.0;
      h.U.push_back(U);
      h.N.push_back(VectorField(4));
      h.t.push_back(-i * 0.1);
    }
    const VectorField Uh = advect_extrapolate(h, c, 0.1);
    for (dlong n = 0; n < 4; ++n) {
      EXPECT_NEAR(Uh.u[n], 1.5 * c.gamma, 1e-14);
      EXPECT_NEAR(Uh.v[n], -2.0 * c.gamma, 1e-14);
    }
  }
}

TEST(AdvectExtrapolate, FirstOrderIsForwardEuler) {
  HistoryRing h;
  h.U.push_back(VectorField(random_field(6, 1), random_field(6, 2)));
  h.N.push_back(VectorField(random_field(6, 3), random_field(6, 4)));
  h.t.push_back(0.0);
  const double dt = 0.05;
  const VectorField Uh = advect_extrapolate(h, scheme_coefficients(1), dt);
  for (dlong n = 0; n < 6; ++n) EXPECT_NEAR(Uh.u[n], h.U[0].u[n] - dt * h.N[0].u[n], 1e-15);
  EXPECT_THROW(advect_extrapolate(h, scheme_coefficients(2), dt), ShapeError);
}

// U(t) = a + b t, N(t) = c + e t: U^ = gamma U(t1) - dt b - dt N(t1)
TEST(AdvectExtrapolate, LinearHistoryMatchesTaylorExpansion) {
  const auto c = scheme_coefficients(2);
  const double a = 0.7, b = -1.3, cc = 0.4, e = 2.1, dt = 0.1, tn = 1.0, t1 = tn + dt;
  HistoryRing h;
  for (int i = 0; i < 2; ++i) {
    const double t = tn - i * dt;
    VectorField U(1), N(1);
    U.u[0] = U.v[0] = a + b * t;
    N.u[0] = N.v[0] = cc + e * t;
    h.U.push_back(U);
    h.N.push_back(N);
    h.t.push_back(t);
  }
  const VectorField Uh = advect_extrapolate(h, c, dt);
  EXPECT_NEAR(Uh.u[0], c.gamma * (a + b * t1) - dt * b - dt * (cc + e * t1), 1e-13);
}

TEST(TimeInterpolant, ReproducesQuadratics) {
  std::vector<VectorField> F;
  const std::vector<double> ts{1.0, 0.8, 0.5};
  for (double t : ts) {
    VectorField U(1);
    U.u[0] = 1.0 + 2.0 * t - 3.0 * t * t;
    U.v[0] = t * t;
    F.push_back(U);
  }
  const TimeInterpolant I(ts, {&F[0], &F[1], &F[2]});
  EXPECT_EQ(I.degree(), 2);
  const VectorField v = I(1.3);
  EXPECT_NEAR(v.u[0], 1.0 + 2.6 - 3.0 * 1.69, 1e-13);
  EXPECT_NEAR(v.v[0], 1.69, 1e-13);
}

class SubcycleTest : public ::testing::Test {
 protected:
  Discretization d = make_discretization(generate_structured(3, 3, {0, 1, 0, 1}, {}), 4);
};

// a uniform state with matching boundary data is a steady state of pure transport
TEST_F(SubcycleTest, ConstantHistoryGivesGammaTimesState) {
  const auto c = scheme_coefficients(2);
  FlowBoundary bc;
  bc.velocity = [](double, double, double) { return Vec2{0.3, -0.2}; };
  HistoryRing h;
  for (int i = 0; i < 3; ++i) {
    VectorField U(d.ndof());
    for (dlong n = 0; n < d.ndof(); ++n) U.u[n] = 0.3, U.v[n] = -0.2;
    h.U.push_back(U);
    h.t.push_back(-0.1 * i);
  }
  int evals = 0;
  const VectorField Uh = subcycle_advect(d, h, c, {3, 0.1}, bc, &evals);
  for (dlong n = 0; n < d.ndof(); ++n) {
    EXPECT_NEAR(Uh.u[n], 0.3 * c.gamma, 1e-12);
    EXPECT_NEAR(Uh.v[n], -0.2 * c.gamma, 1e-12);
  }
  EXPECT_EQ(evals, 5 * 3 * (1 + 2));
}

TEST_F(SubcycleTest, SingleSubstepFirstOrderIsOneLserkStep) {
  const Shear s;
  FlowBoundary bc;
  bc.velocity = s;
  const double dt = 0.02, tn = 0.3;
  HistoryRing h;
  h.U.push_back(shear_field(d, s, tn));
  h.U.push_back(shear_field(d, s, tn - dt));
  h.t = {tn, tn - dt};
  const VectorField Uh = subcycle_advect(d, h, scheme_coefficients(1), {1, dt}, bc);

  const TimeInterpolant Ubar({tn, tn - dt}, {&h.U[0], &h.U[1]});
  VectorField y = h.U[0];
  lserk_step(
      [&](double tau, const VectorField& Ut) {
        const VelocityTraces g = inflow_traces(d, bc, tau);
        VectorField r = advection_operator(d, Ubar(tau), Ut, g.u, g.v);
        for (dlong n = 0; n < r.size(); ++n) r.u[n] = -r.u[n], r.v[n] = -r.v[n];
        return r;
      },
      y, tn, dt);
  EXPECT_LE(max_diff(Uh.u, y.u), 1e-12);
  EXPECT_LE(max_diff(Uh.v, y.v), 1e-12);
}

TEST_F(SubcycleTest, SuperpositionWithSharedTransport) {
  const Shear s;
  const double tn = 0.2, dt = 0.02;
  const VectorField B0 = shear_field(d, s, tn), B1 = shear_field(d, s, tn - dt);
  const TimeInterpolant Ubar({tn, tn - dt}, {&B0, &B1});
  const std::vector<double> zero(d.ntrace(), 0.0);
  auto rhs = [&](double tau, const VectorField& Ut) {
    VectorField r = advection_operator(d, Ubar(tau), Ut, zero, zero);
    for (dlong n = 0; n < r.size(); ++n) r.u[n] = -r.u[n], r.v[n] = -r.v[n];
    return r;
  };
  VectorField a(random_field(d.ndof(), 1), random_field(d.ndof(), 2));
  VectorField b(random_field(d.ndof(), 3), random_field(d.ndof(), 4));
  VectorField c = a;
  axpby(-3.0, b, 0.5, c);  // c = 0.5 a - 3 b
  for (int k = 0; k < 4; ++k) {
    lserk_step(rhs, a, tn + k * dt / 4, dt / 4);
    lserk_step(rhs, b, tn + k * dt / 4, dt / 4);
    lserk_step(rhs, c, tn + k * dt / 4, dt / 4);
  }
  axpby(-3.0, b, 0.5, a);
  EXPECT_LE(max_diff(a.u, c.u), 1e-12 * (1 + max_abs(c.u)));
  EXPECT_LE(max_diff(a.v, c.v), 1e-12 * (1 + max_abs(c.v)));
}

TEST_F(SubcycleTest, TranslationTracksCharacteristics) {
  const Shear s;
  FlowBoundary bc;
  bc.velocity = s;
  const double dt = 0.02, tn = 0.1;
  HistoryRing h;
  for (int i = 0; i < 3; ++i) {
    h.U.push_back(shear_field(d, s, tn - i * dt));
    h.t.push_back(tn - i * dt);
  }
  const VectorField exact = shear_field(d, s, tn + dt);
  std::vector<double> err;
  for (int Ns : {2, 4}) {
    const VectorField Uh = subcycle_advect(d, h, scheme_coefficients(1), {Ns, dt}, bc);
    err.push_back(std::max(max_diff(Uh.u, exact.u), max_diff(Uh.v, exact.v)));
  }
  EXPECT_LT(err[0], 1e-3);
  EXPECT_LT(std::abs(err[1] - err[0]), 0.1 * err[0]);
}

TEST(Precond, ParseNames) {
  for (auto k : {PrecondKind::None, PrecondKind::Jacobi, PrecondKind::Amg, PrecondKind::PmgAmg})
    EXPECT_EQ(parse_precond(precond_name(k)), k);
  EXPECT_THROW(parse_precond("ilu"), ConfigError);
}

class StageTest : public ::testing::Test {
 protected:
  Discretization d = make_discretization(vortex_mesh(4), 3);

  FlowConfig config(double nu = 0.01) const {
    FlowConfig c;
    c.nu = nu;
    c.dt = 0.01;
    c.tol_velocity = 1e-11;
    c.tol_pressure = 1e-11;
    return c;
  }
};

TEST_F(StageTest, VelocityStageRecoversManufacturedSolution) {
  FlowSolver fs(d, config(), FlowBoundary{});
  const auto c = scheme_coefficients(2);
  const double lambda = c.gamma / (0.01 * 0.01);
  const EllipticOperator A(d, lambda, EllipticBC::velocity());
  const VectorField w(interpolate(d, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); }),
                      interpolate(d, [](double x, double y) { return x * x - y; }));
  VectorField Uhat(d.ndof());
  for (auto [src, dst] : {std::pair{&w.u, &Uhat.u}, std::pair{&w.v, &Uhat.v}}) {
    ScalarField Aw(d.ndof());
    A.apply(src->span(), Aw.span());
    *dst = inv_mass_apply(d, Aw);
    for (auto& v : dst->values) v *= 0.01 * 0.01;
  }
  const ScalarField zero(d.ndof());
  const VectorField x = fs.velocity_stage(Uhat, zero, {}, c, 0.01);
  EXPECT_LE(max_diff(x.u, w.u), 1e-8);
  EXPECT_LE(max_diff(x.v, w.v), 1e-8);
}

// the screened operator is mass dominated for small nu
TEST_F(StageTest, VelocityIterationsGrowWithViscosity) {
  const auto c = scheme_coefficients(2);
  const VectorField Uhat(interpolate(d, [](double x, double y) { return std::sin(5 * x + y); }),
                         interpolate(d, [](double x, double y) { return std::cos(4 * y - x); }));
  std::vector<int> its;
  for (double nu : {1e-2, 1.0, 1e2}) {
    FlowSolver fs(d, config(nu), FlowBoundary{});
    SolveStats su;
    fs.velocity_stage(Uhat, ScalarField(d.ndof()), {}, c, 0.01, &su);
    its.push_back(su.iterations);
  }
  EXPECT_LT(its[0], its[1]);
  EXPECT_LE(its[1], its[2]);
}

TEST_F(StageTest, PressureStageZeroForDivergenceFreeData) {
  FlowSolver fs(d, config(), FlowBoundary{});
  SolveStats sp;
  const ScalarField dP = fs.pressure_stage(VectorField(d.ndof()), {}, scheme_coefficients(2), 0.01, &sp);
  EXPECT_EQ(max_abs(dP), 0.0);
}

TEST_F(StageTest, PressureStageReproducesOutflowConstant) {
  FlowSolver fs(d, config(), FlowBoundary{});
  const std::vector<double> dPD(d.ntrace(), 0.75);
  const ScalarField dP = fs.pressure_stage(VectorField(d.ndof()), dPD, scheme_coefficients(2), 0.01);
  for (double v : dP.values) EXPECT_NEAR(v, 0.75, 1e-8);
}

TEST_F(StageTest, PressureStageSolvesItsLinearSystem) {
  FlowSolver fs(d, config(), FlowBoundary{});
  const auto c = scheme_coefficients(2);
  const VectorField U(interpolate(d, [](double x, double y) { return std::sin(2 * x) * y; }),
                      interpolate(d, [](double x, double y) { return x * std::cos(3 * y); }));
  const ScalarField dP = fs.pressure_stage(U, {}, c, 0.01);
  ScalarField b = mass_apply(d, dg_divergence(d, U, {}, {}));
  for (auto& v : b.values) v *= -c.gamma / 0.01;
  const EllipticOperator A(d, 0.0, EllipticBC::pressure());
  ScalarField r(d.ndof());
  A.apply(dP.span(), r.span());
  axpby(-1.0, b, 1.0, r);
  EXPECT_LE(norm2(r), 1e-9 * norm2(b));
}

TEST_F(StageTest, SingularPressureUsesMeanProjection) {
  const Discretization dw = make_discretization(
      generate_structured(3, 3, {0, 1, 0, 1},
                          {BoundaryTag::Wall, BoundaryTag::Wall, BoundaryTag::Wall, BoundaryTag::Wall}),
      2);
  FlowSolver fs(dw, config(), FlowBoundary{});
  const VectorField U(interpolate(dw, [](double x, double) { return x; }), ScalarField(dw.ndof()));
  EXPECT_NO_THROW(fs.pressure_stage(U, {}, scheme_coefficients(1), 0.01));
}

TEST_F(StageTest, UpdateWithZeroIncrementIsIdentity) {
  FlowSolver fs(d, config(), FlowBoundary{});
  const VectorField Uhh(random_field(d.ndof(), 1), random_field(d.ndof(), 2));
  const ScalarField sigmaP = random_field(d.ndof(), 3);
  VectorField U1;
  ScalarField P1;
  fs.update_stage(Uhh, ScalarField(d.ndof()), {}, sigmaP, scheme_coefficients(2), 0.01, U1, P1);
  EXPECT_EQ(max_diff(U1.u, Uhh.u), 0.0);
  EXPECT_EQ(max_diff(U1.v, Uhh.v), 0.0);
  EXPECT_EQ(max_diff(P1, sigmaP), 0.0);
}

TEST_F(StageTest, ZeroStateIsFixedPoint) {
  FlowSolver fs(d, config(), FlowBoundary{});
  fs.set_initial(VectorField(d.ndof()), ScalarField(d.ndof()), 0.0);
  for (int k = 0; k < 3; ++k) fs.step();
  EXPECT_EQ(max_abs(fs.velocity().u), 0.0);
  EXPECT_EQ(max_abs(fs.velocity().v), 0.0);
  EXPECT_EQ(max_abs(fs.pressure()), 0.0);
  EXPECT_NEAR(fs.time(), 0.03, 1e-15);
}

TEST_F(StageTest, StartupRampAndDeterminism) {
  const ExactSolution ex = taylor_exact(0.01);
  auto run = [&] {
    FlowSolver fs(d, config(), exact_boundary(ex));
    fs.set_initial(VectorField(interpolate(d, [&](double x, double y) { return ex.u(x, y, 0); }),
                               interpolate(d, [&](double x, double y) { return ex.v(x, y, 0); })),
                   interpolate(d, [&](double x, double y) { return ex.p(x, y, 0); }), 0.0);
    std::vector<int> orders;
    for (int k = 0; k < 3; ++k) orders.push_back(fs.step().order);
    EXPECT_EQ(orders, (std::vector<int>{1, 2, 2}));
    return fs.velocity().u.values;
  };
  EXPECT_EQ(run(), run());
}

TEST_F(StageTest, StageTimingsCoverTheStep) {
  const ExactSolution ex = taylor_exact(0.01);
  FlowConfig cfg = config();
  cfg.tol_velocity = cfg.tol_pressure = 1e-8;
  FlowSolver fs(d, cfg, exact_boundary(ex));
  fs.set_initial(VectorField(interpolate(d, [&](double x, double y) { return ex.u(x, y, 0); }),
                             interpolate(d, [&](double x, double y) { return ex.v(x, y, 0); })),
                 interpolate(d, [&](double x, double y) { return ex.p(x, y, 0); }), 0.0);
  double stages = 0.0, total = 0.0;
  for (int k = 0; k < 5; ++k) {
    const StepReport r = fs.step();
    stages += r.times.advection + r.times.velocity + r.times.pressure + r.times.update;
    total += r.times.total;
  }
  EXPECT_GE(stages, 0.95 * total);
}

// Ns = 1 is the plain extrapolated scheme at the substep size
TEST_F(StageTest, SubcyclingCountsAndFewerMacroSteps) {
  const ExactSolution ex = taylor_exact(0.01);
  std::vector<int> steps, evals;
  for (int Ns : {1, 4}) {
    FlowConfig cfg = config();
    cfg.tol_velocity = cfg.tol_pressure = 1e-8;
    cfg.subcycling = Ns > 1;
    cfg.substeps = Ns;
    cfg.dt = 0.005 * Ns;
    FlowSolver fs(d, cfg, exact_boundary(ex));
    fs.set_initial(VectorField(interpolate(d, [&](double x, double y) { return ex.u(x, y, 0); }),
                               interpolate(d, [&](double x, double y) { return ex.v(x, y, 0); })),
                   ScalarField(d.ndof()), 0.0);
    int e = 0, n = 0;
    while (fs.time() < 0.04 - 1e-12) {
      e += fs.step().advection_evaluations;
      ++n;
    }
    steps.push_back(n);
    evals.push_back(e);
  }
  EXPECT_EQ(steps[0], 8);
  EXPECT_EQ(steps[1], 2);
  EXPECT_GT(evals[1], evals[0]);
}
