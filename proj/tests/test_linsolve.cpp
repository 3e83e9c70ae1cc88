// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "insdg/dgops.hpp"
#include "insdg/linsolve.hpp"

using namespace insdg;

namespace {

std::vector<double> random_vec(dlong n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> v(n);
  for (double& x : v) x = U(rng);
  return v;
}

ApplyFn dense_op(const Eigen::MatrixXd& A) {
  return [&A](std::span<const double> x, std::span<double> y) {
    Eigen::Map<Eigen::VectorXd>(y.data(), y.size()) =
        A * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  };
}

SparseMatrix laplacian_1d(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return SparseMatrix::from_triplets(n, t);
}

const SideTags kMixed{BoundaryTag::Inflow, BoundaryTag::Outflow, BoundaryTag::Wall, BoundaryTag::Inflow};

Mesh square(int n, SideTags tags = kMixed) { return generate_structured(n, n, {-1, 1, -1, 1}, tags); }

}  // namespace

TEST(Pcg, IdentityConvergesInOneIteration) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(7, 7);
  const auto b = random_vec(7, 1);
  std::vector<double> x(7, 0.0);
  const SolveStats st = pcg(dense_op(I), {}, b, x, {1e-12, 10, false});
  EXPECT_EQ(st.iterations, 1);
  EXPECT_TRUE(st.converged);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(x[i], b[i], 1e-14);
}

TEST(Pcg, TwoByTwo) {
  Eigen::MatrixXd A(2, 2);
  A << 4, 1, 1, 3;
  std::vector<double> b{1, 2}, x(2, 0.0);
  const SolveStats st = pcg(dense_op(A), {}, b, x, {1e-14, 10, false});
  EXPECT_LE(st.iterations, 2);
  EXPECT_NEAR(x[0], 1.0 / 11.0, 1e-13);
  EXPECT_NEAR(x[1], 7.0 / 11.0, 1e-13);
}

TEST(Pcg, ReportsIndefiniteBreakdown) {
  Eigen::MatrixXd A(2, 2);
  A << 1, 0, 0, -1;
  std::vector<double> b{0, 1}, x(2, 0.0);
  try {
    pcg(dense_op(A), {}, b, x, {1e-12, 10, false});
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 1"), std::string::npos);
  }
}

TEST(Pcg, MonotoneResidualAndFiniteTermination) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> G;
  Eigen::MatrixXd R(40, 40);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) R(i, j) = G(rng);
  const Eigen::MatrixXd A = R * R.transpose() + 40.0 * Eigen::MatrixXd::Identity(40, 40);
  const auto b = random_vec(40, 5);
  std::vector<double> x(40, 0.0);
  const SolveStats st = pcg(dense_op(A), {}, b, x, {1e-12, 40, false});
  EXPECT_TRUE(st.converged);
  EXPECT_LE(st.iterations, 40);
  for (size_t k = 1; k < st.residual_history.size(); ++k)
    EXPECT_LE(st.residual_history[k], 1.1 * st.residual_history[k - 1]);
}

TEST(Pcg, SipdgPoissonMatchesDenseSolve) {
  const Discretization d = make_discretization(generate_structured(4, 4, {0, 1, 0, 1}, {}), 3);  // K = 32
  const EllipticBC bc = EllipticBC::all_dirichlet();
  EllipticOperator op(d, 0.0, bc);
  const SparseMatrix A = assemble_sipdg(d, 0.0, bc);
  const auto b = random_vec(d.ndof(), 7);
  const Eigen::VectorXd xd = A.to_dense().ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  std::vector<double> x(d.ndof(), 0.0);
  const SolveStats st = pcg([&](auto in, auto out) { op.apply(in, out); }, point_jacobi_precond(op.diagonal()), b,
                            x, {1e-10, 5000, false});
  EXPECT_TRUE(st.converged);
  EXPECT_LT((Eigen::Map<Eigen::VectorXd>(x.data(), x.size()) - xd).norm() / xd.norm(), 1e-8);
}

TEST(BlockJacobi, ExactForMassOperatorAndSymmetric) {
  const Discretization d = make_discretization(generate_structured(3, 3, {}, {}), 3);
  const double lambda = 2.5;
  const ApplyFn P = block_jacobi_precond(d, lambda);
  auto A = [&](std::span<const double> x, std::span<double> y) {
    const ScalarField m = mass_apply(d, ScalarField(std::vector<double>(x.begin(), x.end())));
    for (dlong i = 0; i < d.ndof(); ++i) y[i] = lambda * m[i];
  };
  const auto b = random_vec(d.ndof(), 2);
  std::vector<double> x(d.ndof(), 0.0);
  const SolveStats st = pcg(A, P, b, x, {1e-12, 50, false});
  EXPECT_EQ(st.iterations, 1);
  const auto u = random_vec(d.ndof(), 3), v = random_vec(d.ndof(), 4);
  std::vector<double> Pu(d.ndof()), Pv(d.ndof());
  P(u, Pu);
  P(v, Pv);
  EXPECT_NEAR(dot(Pu, v), dot(u, Pv), 1e-12 * norm2(u) * norm2(v));
}

TEST(Assemble, MatchesMatrixFree) {
  const Discretization d = make_discretization(generate_structured(2, 2, {}, kMixed), 2);  // K = 8
  const EllipticBC bc = EllipticBC::velocity();
  EllipticOperator op(d, 0.4, bc);
  const SparseMatrix A = assemble_sipdg(d, 0.4, bc);
  EXPECT_LT(A.symmetry_defect(), 1e-12);
  for (unsigned s = 0; s < 20; ++s) {
    const auto x = random_vec(d.ndof(), 50 + s);
    std::vector<double> y1(d.ndof()), y2(d.ndof());
    op.apply(x, y1);
    A.multiply(x, y2);
    double m = 0.0;
    for (dlong i = 0; i < d.ndof(); ++i) m = std::max(m, std::abs(y1[i] - y2[i]));
    EXPECT_LT(m, 1e-11);
  }
}

TEST(Assemble, NeumannRowSumsVanish) {
  const Discretization d = make_discretization(square(3), 2);
  const SparseMatrix A = assemble_sipdg(d, 0.0, EllipticBC::all_neumann());
  for (dlong i = 0; i < A.n; ++i) {
    double s = 0.0;
    for (dlong k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) s += A.val[k];
    EXPECT_NEAR(s, 0.0, 1e-10);
  }
}

TEST(PTransfer, ConstantAndPolynomialAndTranspose) {
  const Discretization d = make_discretization(square(2), 4);
  const PTransfer T = build_p_transfer(d.K, 4, 2);
  const Discretization dc = make_discretization(square(2), 2);
  std::vector<double> c(dc.ndof(), 3.0), f(d.ndof());
  T.prolong(c, f);
  for (double v : f) EXPECT_NEAR(v, 3.0, 1e-13);
  auto poly = [](double x, double y) { return 1 + x * y - 2 * y * y + x; };
  const ScalarField pc = interpolate(dc, poly);
  T.prolong(pc.values, f);
  for (dlong n = 0; n < d.ndof(); ++n) EXPECT_NEAR(f[n], poly(d.x[n], d.y[n]), 1e-12);
  const auto u = random_vec(dc.ndof(), 1), v = random_vec(d.ndof(), 2);
  std::vector<double> Pu(d.ndof()), Rv(dc.ndof());
  T.prolong(u, Pu);
  T.restrict_(v, Rv);
  EXPECT_NEAR(dot(Pu, v), dot(u, Rv), 1e-11);
  EXPECT_THROW(build_p_transfer(4, 2, 2), ConfigError);
}

TEST(Aggregate, DiagonalMatrixIsIdentityPartition) {
  std::vector<Triplet> t;
  for (int i = 0; i < 10; ++i) t.push_back({i, i, 1.0 + i});
  const Aggregation g = aggregate(SparseMatrix::from_triplets(10, t));
  EXPECT_EQ(g.count, 10);
}

TEST(Aggregate, PathGraphAggregatesOfTwoOrThree) {
  for (int n : {2, 3, 10, 31, 60}) {
    const Aggregation g = aggregate(laplacian_1d(n));
    std::vector<int> sizes(g.count, 0);
    for (int a : g.agg) {
      ASSERT_GE(a, 0);
      ASSERT_LT(a, g.count);
      ++sizes[a];
    }
    // interior aggregates hold 2-3 nodes; a trailing leftover may join the last one
    int big = 0;
    for (int a = 0; a < g.count; ++a) {
      EXPECT_GE(sizes[a], 2);
      EXPECT_LE(sizes[a], 4);
      big += sizes[a] == 4;
    }
    EXPECT_LE(big, 1);
    if (big == 1) {
      EXPECT_EQ(sizes[g.agg[n - 1]], 4);
    }
    EXPECT_LT(g.count, n);
    if (n >= 10) {
      EXPECT_GE(g.count, n / 3);
      EXPECT_LE(g.count, n / 2);
    }
  }
  EXPECT_THROW(aggregate(SparseMatrix{}), SolverError);
}

TEST(Aggregate, GalerkinProductIsRtAP) {
  const Discretization d = make_discretization(square(3), 1);
  const SparseMatrix A = assemble_sipdg(d, 0.0, EllipticBC::velocity());
  const Aggregation g = aggregate(A);
  const SparseMatrix Ac = galerkin_product(A, g);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.n, g.count);
  for (dlong i = 0; i < A.n; ++i) P(i, g.agg[i]) = 1.0;
  const Eigen::MatrixXd ref = P.transpose() * A.to_dense() * P;
  EXPECT_LT((Ac.to_dense() - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(Ac.symmetry_defect(), 1e-12);
  EXPECT_LT(Ac.n, A.n);
}

TEST(Chebyshev, IdentityContracts) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
  ChebyshevSmoother S(dense_op(I), std::vector<double>(5, 1.0), 1.0);
  std::vector<double> b(5, 0.0), x = random_vec(5, 1);
  const double before = norm2(x);
  S.smooth(b, x, false);
  EXPECT_LT(norm2(x), before);
  EXPECT_THROW(ChebyshevSmoother(dense_op(I), std::vector<double>(5, 1.0), 0.0), SolverError);
}

TEST(Chebyshev, DampsHighFrequencyModeOfLaplacian) {
  const int n = 32;
  const SparseMatrix A = laplacian_1d(n);
  const Eigen::MatrixXd D = A.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  auto op = [&](std::span<const double> x, std::span<double> y) { A.multiply(x, y); };
  const std::vector<double> invd(n, 0.5);
  const double eig_true = es.eigenvalues()(n - 1) / 2.0;
  EXPECT_NEAR(estimate_lambda_max(op, invd), eig_true, 0.05);
  ChebyshevSmoother S(op, invd, eig_true);
  std::vector<double> b(n, 0.0), x(n);
  for (int i = 0; i < n; ++i) x[i] = es.eigenvectors()(i, n - 1);
  S.smooth(b, x, false);
  EXPECT_LE(norm2(x), 0.2);
}

TEST(Chebyshev, LinearAndSymmetric) {
  const SparseMatrix A = laplacian_1d(20);
  auto op = [&](std::span<const double> x, std::span<double> y) { A.multiply(x, y); };
  ChebyshevSmoother S(op, std::vector<double>(20, 0.5), 2.0);
  const auto u = random_vec(20, 1), v = random_vec(20, 2);
  std::vector<double> Su(20), Sv(20);
  S.smooth(u, Su, true);
  S.smooth(v, Sv, true);
  EXPECT_NEAR(dot(Su, v), dot(u, Sv), 1e-12);
}

TEST(Multigrid, Schedules) {
  EXPECT_EQ(p_schedule(4), (std::vector<int>{4, 2, 1}));
  EXPECT_EQ(p_schedule(1), (std::vector<int>{1}));
  EXPECT_EQ(p_schedule(7), (std::vector<int>{7, 3, 1}));
  const Discretization d1 = make_discretization(square(4), 1);
  const auto h1 = build_pmg_amg(d1, 1.0, EllipticBC::velocity());
  EXPECT_EQ(h1->degrees(), (std::vector<int>{1}));
  const Discretization d4 = make_discretization(square(8), 4);
  const auto h4 = build_pmg_amg(d4, 0.0, EllipticBC::pressure());
  EXPECT_EQ(h4->degrees(), (std::vector<int>{4, 2, 1}));
  EXPECT_LE(h4->coarse_size(), 200);
  EXPECT_GE(h4->algebraic_levels(), 1);
  EXPECT_EQ(h4->levels[0].cycle, CycleKind::K);
  EXPECT_EQ(h4->levels[1].cycle, CycleKind::K);
  for (std::size_t l = 2; l < h4->levels.size(); ++l) EXPECT_EQ(h4->levels[l].cycle, CycleKind::V);
  for (std::size_t l = 1; l < h4->levels.size(); ++l) EXPECT_LT(h4->levels[l].n, h4->levels[l - 1].n);
}

TEST(Multigrid, ApplyIsLinearSymmetricPositive) {
  const Discretization d = make_discretization(square(8), 3);
  const auto h = build_pmg_amg(d, 0.0, EllipticBC::pressure());
  const dlong n = d.ndof();
  std::vector<double> z(n), z1(n), z2(n), z3(n);
  h->apply(std::vector<double>(n, 0.0), z);
  EXPECT_EQ(norm2(z), 0.0);
  const auto r1 = random_vec(n, 1), r2 = random_vec(n, 2);
  std::vector<double> r3(n);
  for (dlong i = 0; i < n; ++i) r3[i] = 2.0 * r1[i] - 0.5 * r2[i];
  h->apply(r1, z1);
  h->apply(r2, z2);
  h->apply(r3, z3);
  double m = 0.0;
  for (dlong i = 0; i < n; ++i) m = std::max(m, std::abs(z3[i] - (2.0 * z1[i] - 0.5 * z2[i])));
  EXPECT_LT(m, 1e-11 * norm2(z3));
  EXPECT_NEAR(dot(z1, r2), dot(r1, z2), 1e-10 * norm2(z1) * norm2(r2));
  for (unsigned s = 0; s < 100; ++s) {
    const auto r = random_vec(n, 100 + s);
    h->apply(r, z);
    EXPECT_GT(dot(z, r), 0.0);
  }
}

TEST(Multigrid, HybridAndFullAmgAgree) {
  const Discretization d = make_discretization(square(6), 3);
  const EllipticBC bc = EllipticBC::velocity();
  const double lambda = 5.0;
  EllipticOperator op(d, lambda, bc);
  const ApplyFn A = [&](auto x, auto y) { op.apply(x, y); };
  const auto b = random_vec(d.ndof(), 9);
  const double tol = 1e-9;
  const auto hp = build_pmg_amg(d, lambda, bc);
  const auto hf = build_full_amg(d, lambda, bc);
  std::vector<double> x1(d.ndof(), 0.0), x2(d.ndof(), 0.0);
  const SolveStats s1 = pcg(A, hp->as_precond(), b, x1, {tol, 500, false});
  const SolveStats s2 = pcg(A, hf->as_precond(), b, x2, {tol, 500, false});
  EXPECT_TRUE(s1.converged);
  EXPECT_TRUE(s2.converged);
  std::vector<double> diff(d.ndof()), Ad(d.ndof());
  for (dlong i = 0; i < d.ndof(); ++i) diff[i] = x1[i] - x2[i];
  A(diff, Ad);
  EXPECT_LE(norm2(Ad) / norm2(b), 10 * tol);
  EXPECT_LE(norm2(diff) / norm2(x1), 1e-6);
  EXPECT_LT(hp->memory_bytes(), hf->memory_bytes());
}

TEST(Multigrid, SingularPressureSolveConverges) {
  const SideTags walls{BoundaryTag::Wall, BoundaryTag::Wall, BoundaryTag::Wall, BoundaryTag::Wall};
  const Discretization d = make_discretization(square(6, walls), 3);
  const EllipticBC bc = EllipticBC::pressure();
  EllipticOperator op(d, 0.0, bc);
  ASSERT_TRUE(op.singular());
  const auto h = build_pmg_amg(d, 0.0, bc);
  EXPECT_TRUE(h->singular);
  auto b = random_vec(d.ndof(), 3);
  std::vector<double> x(d.ndof(), 0.0);
  const SolveStats st = pcg([&](auto in, auto out) { op.apply(in, out); }, h->as_precond(), b, x,
                            {1e-8, 300, true});
  EXPECT_TRUE(st.converged);
  EXPECT_LT(st.iterations, 60);
}

TEST(Multigrid, IterationsGrowSlowlyUnderRefinement) {
  const EllipticBC bc = EllipticBC::pressure();
  std::vector<int> its;
  for (int n : {4, 8}) {
    const Discretization d = make_discretization(square(n), 3);
    EllipticOperator op(d, 0.0, bc);
    const auto h = build_pmg_amg(d, 0.0, bc);
    ScalarField b = interpolate(d, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
    b = mass_apply(d, b);
    std::vector<double> x(d.ndof(), 0.0);
    const SolveStats st = pcg([&](auto in, auto out) { op.apply(in, out); }, h->as_precond(), b.values, x,
                              {1e-8, 500, false});
    EXPECT_TRUE(st.converged);
    its.push_back(st.iterations);
  }
  EXPECT_LE(its[1], 2 * its[0]);
}
