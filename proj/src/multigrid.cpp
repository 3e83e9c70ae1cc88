// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cmath>
#include <random>

#include "insdg/dgops.hpp"
#include "insdg/fields.hpp"
#include "insdg/linsolve.hpp"

namespace insdg {

namespace {

constexpr dlong kMaxDenseCoarse = 4000;

std::vector<double> inverted(std::vector<double> diag) {
  for (double& v : diag) {
    if (!(v > 0.0)) throw SolverError("multigrid: nonpositive operator diagonal");
    v = 1.0 / v;
  }
  return diag;
}

void finish_level(MgLevel& L, const MultigridConfig& cfg) {
  L.eig_hi = estimate_lambda_max(L.A, L.invdiag);
  L.smoother = ChebyshevSmoother(L.A, L.invdiag, L.eig_hi, cfg.cheb_degree);
}

// aggregation levels below A, then the dense coarsest solve
void add_algebraic_levels(MultigridHierarchy& h, std::shared_ptr<SparseMatrix> A, const MultigridConfig& cfg) {
  auto current = std::move(A);
  while (current->n > cfg.coarse_size) {
    Aggregation agg = aggregate(*current, cfg.theta);
    if (agg.count >= current->n) break;
    auto coarse = std::make_shared<SparseMatrix>(galerkin_product(*current, agg));

    MgLevel L;
    L.n = current->n;
    L.matrix = current;
    L.A = [m = current](std::span<const double> x, std::span<double> y) { m->multiply(x, y); };
    L.invdiag = inverted(current->diagonal());
    L.to_algebraic = true;
    L.agg = std::move(agg);
    finish_level(L, cfg);
    h.levels.push_back(std::move(L));
    current = coarse;
  }
  if (current->n > kMaxDenseCoarse)
    throw SolverError("multigrid: coarsening stalled at " + std::to_string(current->n) + " unknowns");

  const Eigen::MatrixXd Ac = current->to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ac + Ac.transpose()));
  const Eigen::VectorXd lam = es.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam(i)) > 1e-10 * lmax) inv(i) = 1.0 / lam(i);
  h.coarse_inverse = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  h.coarse_matrix = current;
}

void apply_level(const MultigridHierarchy& h, std::size_t l, std::span<const double> x, std::span<double> y) {
  if (l < h.levels.size()) h.levels[l].A(x, y);
  else h.coarse_matrix->multiply(x, y);
}

dlong level_size(const MultigridHierarchy& h, std::size_t l) {
  return l < h.levels.size() ? h.levels[l].n : h.coarse_matrix->n;
}

}  // namespace

void MultigridHierarchy::freeze_kcycles(int count) {
  const int top = std::min<int>(count, static_cast<int>(levels.size()));
  for (int l = top - 1; l >= 0; --l) {
    MgLevel& L = levels[l];
    L.cycle = CycleKind::K;
    if (static_cast<std::size_t>(l) + 1 >= levels.size()) {
      // exact coarse solve below: the second correction vanishes
      L.kc_alpha1 = 1.0;
      L.kc_alpha2 = 0.0;
      continue;
    }
    const std::size_t lc = l + 1;
    const dlong n = level_size(*this, lc);
    std::mt19937_64 rng(12345 + l);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> rc(n), c1(n), c2(n), v1(n), v2(n), rc2(n);
    auto project = [&](std::vector<double>& v) {
      if (!singular) return;
      double m = 0.0;
      for (double x : v) m += x;
      for (double& x : v) x -= m / static_cast<double>(n);
    };
    auto dotv = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    for (double& x : rc) x = U(rng);
    project(rc);
    cycle(lc, rc, c1);
    apply_level(*this, lc, c1, v1);
    for (dlong i = 0; i < n; ++i) rc2[i] = rc[i] - v1[i];
    cycle(lc, rc2, c2);
    apply_level(*this, lc, c2, v2);
    const double G11 = dotv(c1, v1), G12 = dotv(c1, v2), G22 = dotv(c2, v2);
    const double g1 = dotv(c1, rc), g2 = dotv(c2, rc);
    const double det = G11 * G22 - G12 * G12;
    double a1 = 1.0, a2 = 1.0;
    if (std::abs(det) > 1e-14 * std::abs(G11 * G22)) {
      a1 = (g1 * G22 - g2 * G12) / det;
      a2 = (G11 * g2 - G12 * g1) / det;
    }

    // spectral radius of B A on the coarse level
    std::vector<double> x(n), y(n), z(n);
    for (double& v : x) v = U(rng);
    project(x);
    double tmax = 0.0;
    for (int it = 0; it < 15; ++it) {
      const double nx = std::sqrt(dotv(x, x));
      if (nx == 0.0) break;
      for (double& v : x) v /= nx;
      apply_level(*this, lc, x, y);
      cycle(lc, y, z);
      project(z);
      tmax = std::sqrt(dotv(z, z));
      x.swap(z);
    }
    bool safe = a1 + a2 > 0.0 && tmax > 0.0;
    for (int k = 1; safe && k <= 200; ++k) {
      const double t = 1.05 * tmax * k / 200.0;
      const double q = (a1 + a2) * t - a2 * t * t;
      safe = q > 0.0 && q < 2.0;
    }
    if (!safe) a1 = a2 = 1.0;
    L.kc_alpha1 = a1;
    L.kc_alpha2 = a2;
  }
}

std::unique_ptr<MultigridHierarchy> build_pmg_amg(const Discretization& d, double lambda, const EllipticBC& bc,
                                                  const MultigridConfig& cfg) {
  auto h = std::make_unique<MultigridHierarchy>();
  const std::vector<int> sched = p_schedule(d.N);
  const Discretization* cur = &d;
  for (std::size_t i = 0; i + 1 < sched.size(); ++i) {
    const int p = sched[i], q = sched[i + 1];
    h->ops.push_back(std::make_unique<EllipticOperator>(*cur, lambda, bc));
    const EllipticOperator* op = h->ops.back().get();
    if (i == 0) h->singular = op->singular();
    MgLevel L;
    L.degree = p;
    L.n = cur->ndof();
    L.A = [op](std::span<const double> x, std::span<double> y) { op->apply(x, y); };
    L.invdiag = inverted(op->diagonal());
    L.ptransfer = build_p_transfer(d.K, p, q);
    finish_level(L, cfg);
    h->levels.push_back(std::move(L));
    h->discs.push_back(std::make_unique<Discretization>(make_discretization(d.mesh, q, 2 * q)));
    cur = h->discs.back().get();
  }
  if (sched.size() == 1) h->singular = EllipticOperator(d, lambda, bc).singular();
  auto A1 = std::make_shared<SparseMatrix>(assemble_sipdg(*cur, lambda, bc));
  h->assembled_degree = 1;
  add_algebraic_levels(*h, std::move(A1), cfg);
  h->freeze_kcycles(cfg.kcycle_levels);
  return h;
}

std::unique_ptr<MultigridHierarchy> build_full_amg(const Discretization& d, double lambda, const EllipticBC& bc,
                                                   const MultigridConfig& cfg) {
  auto h = std::make_unique<MultigridHierarchy>();
  h->singular = EllipticOperator(d, lambda, bc).singular();
  auto A = std::make_shared<SparseMatrix>(assemble_sipdg(d, lambda, bc));
  h->assembled_degree = d.N;
  add_algebraic_levels(*h, std::move(A), cfg);
  h->freeze_kcycles(cfg.kcycle_levels);
  return h;
}

std::unique_ptr<MultigridHierarchy> build_amg(std::shared_ptr<SparseMatrix> A, const MultigridConfig& cfg) {
  if (!A || A->n == 0) throw SolverError("build_amg: empty matrix");
  auto h = std::make_unique<MultigridHierarchy>();
  const std::vector<double> diag = A->diagonal();
  double dmax = 0.0, rmax = 0.0;
  for (dlong i = 0; i < A->n; ++i) {
    double rs = 0.0;
    for (dlong k = A->rowptr[i]; k < A->rowptr[i + 1]; ++k) rs += A->val[k];
    dmax = std::max(dmax, std::abs(diag[i]));
    rmax = std::max(rmax, std::abs(rs));
  }
  h->singular = rmax <= 1e-10 * dmax;
  add_algebraic_levels(*h, std::move(A), cfg);
  h->freeze_kcycles(cfg.kcycle_levels);
  return h;
}

std::vector<int> p_schedule(int N) {
  if (N < 1) throw ConfigError("p schedule: degree must be >= 1");
  std::vector<int> s{N};
  while (s.back() > 1) s.push_back(std::max(1, s.back() / 2));
  return s;
}

void MultigridHierarchy::apply(std::span<const double> r, std::span<double> z) const {
  if (r.empty()) return;
  cycle(0, r, z);
}

ApplyFn MultigridHierarchy::as_precond() const {
  return [this](std::span<const double> r, std::span<double> z) { apply(r, z); };
}

std::vector<int> MultigridHierarchy::degrees() const {
  std::vector<int> d;
  for (const auto& L : levels)
    if (L.degree > 0) d.push_back(L.degree);
  if (assembled_degree > 0) d.push_back(assembled_degree);
  return d;
}

int MultigridHierarchy::algebraic_levels() const {
  int c = 0;
  for (const auto& L : levels) c += L.to_algebraic ? 1 : 0;
  return c;
}

std::size_t MultigridHierarchy::memory_bytes() const {
  std::size_t b = 0;
  for (const auto& L : levels) {
    b += L.invdiag.size() * sizeof(double);
    b += static_cast<std::size_t>(L.ptransfer.P.size()) * sizeof(double);
    b += L.agg.agg.size() * sizeof(int);
    if (L.matrix) b += L.matrix->bytes();
  }
  if (coarse_matrix) b += coarse_matrix->bytes();
  b += static_cast<std::size_t>(coarse_inverse.size()) * sizeof(double);
  for (const auto& d : discs) {
    b += (d->geom.rx.size() * 5 + d->geom.nx.size() * 6) * sizeof(double);
    b += (d->conn.vmapM.size() + d->conn.vmapP.size()) * sizeof(dlong);
  }
  return b;
}

void MultigridHierarchy::cycle(std::size_t l, std::span<const double> b, std::span<double> x) const {
  if (l == levels.size()) {
    Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    xv.noalias() = coarse_inverse * bv;
    return;
  }
  const MgLevel& L = levels[l];
  if (work_.size() < 8 * levels.size()) work_.resize(8 * levels.size());
  const dlong n = L.n, nc = level_size(*this, l + 1);
  auto buf = [&](int k, dlong size) -> std::vector<double>& {
    auto& v = work_[8 * l + k];
    if (static_cast<dlong>(v.size()) != size) v.assign(size, 0.0);
    return v;
  };
  auto& r = buf(0, n);
  auto& tmp = buf(1, n);
  auto& rc = buf(2, nc);
  auto& ec = buf(3, nc);
  auto& c2 = buf(4, nc);
  auto& rc2 = buf(5, nc);

  L.smoother.smooth(b, x, true);
  L.A(x, r);
  for (dlong i = 0; i < n; ++i) r[i] = b[i] - r[i];

  if (L.to_algebraic) {
    std::fill(rc.begin(), rc.end(), 0.0);
    for (dlong i = 0; i < n; ++i) rc[L.agg.agg[i]] += r[i];
  } else {
    L.ptransfer.restrict_(r, rc);
  }

  cycle(l + 1, rc, ec);
  if (L.cycle == CycleKind::K && L.kc_alpha2 != 0.0) {
    apply_level(*this, l + 1, ec, rc2);
    for (dlong i = 0; i < nc; ++i) rc2[i] = rc[i] - rc2[i];
    cycle(l + 1, rc2, c2);
    for (dlong i = 0; i < nc; ++i) ec[i] = L.kc_alpha1 * ec[i] + L.kc_alpha2 * c2[i];
  }

  if (L.to_algebraic) {
    for (dlong i = 0; i < n; ++i) x[i] += ec[L.agg.agg[i]];
  } else {
    L.ptransfer.prolong(ec, tmp);
    for (dlong i = 0; i < n; ++i) x[i] += tmp[i];
  }
  L.smoother.smooth(b, x, false);
}

}  // namespace insdg
