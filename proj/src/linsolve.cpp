// SPDX-License-Identifier: MIT
#include "insdg/linsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "insdg/dgops.hpp"
#include "insdg/fields.hpp"
#include "insdg/kernels.hpp"

namespace insdg {

namespace {

void remove_mean(std::span<double> x) {
  if (x.empty()) return;
  double s = 0.0;
  for (double v : x) s += v;
  s /= static_cast<double>(x.size());
  for (double& v : x) v -= s;
}

}  // namespace

SolveStats pcg(const ApplyFn& A, const ApplyFn& precond, std::span<const double> b, std::span<double> x,
               const PcgOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const size_t n = b.size();
  if (x.size() != n) throw ShapeError("pcg: solution and right-hand side sizes differ");
  SolveStats st;

  std::vector<double> bb(b.begin(), b.end());
  if (opt.project_mean) {
    remove_mean(bb);
    remove_mean(x);
  }
  const double bnorm = norm2(bb);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    st.converged = true;
    st.residual_history.push_back(0.0);
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
  }

  std::vector<double> r(n), z(n), p(n), Ap(n);
  A(x, Ap);
  for (size_t i = 0; i < n; ++i) r[i] = bb[i] - Ap[i];
  if (opt.project_mean) remove_mean(r);
  double res = norm2(r) / bnorm;
  st.residual_history.push_back(res);
  if (res <= opt.tol) {
    st.converged = true;
    st.relative_residual = res;
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
  }

  auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (precond) {
      precond(in, out);
      ++st.precond_applications;
    } else {
      out = in;
    }
    if (opt.project_mean) remove_mean(out);
  };

  apply_precond(r, z);
  p = z;
  double rz = dot(r, z);
  for (int k = 1; k <= opt.maxit; ++k) {
    A(p, Ap);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0))
      throw SolverError("pcg breakdown: p^T A p = " + std::to_string(pAp) + " at iteration " + std::to_string(k) +
                        " (operator or preconditioner not positive definite)");
    const double alpha = rz / pAp;
    for (size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    res = norm2(r) / bnorm;
    st.residual_history.push_back(res);
    st.iterations = k;
    if (res <= opt.tol) {
      st.converged = true;
      break;
    }
    apply_precond(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (opt.project_mean) remove_mean(x);
  st.relative_residual = res;
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return st;
}

SparseMatrix SparseMatrix::from_triplets(dlong n, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix A;
  A.n = n;
  A.rowptr.assign(n + 1, 0);
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k].row < 0 || t[k].row >= n || t[k].col < 0 || t[k].col >= n)
      throw ShapeError("sparse matrix entry out of range");
    if (!A.col.empty() && k > 0 && t[k].row == t[k - 1].row && t[k].col == t[k - 1].col) {
      A.val.back() += t[k].value;
      continue;
    }
    A.col.push_back(t[k].col);
    A.val.push_back(t[k].value);
    ++A.rowptr[t[k].row + 1];
  }
  for (dlong i = 0; i < n; ++i) A.rowptr[i + 1] += A.rowptr[i];
  return A;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (dlong i = 0; i < n; ++i) {
    double s = 0.0;
    for (dlong k = rowptr[i]; k < rowptr[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (dlong i = 0; i < n; ++i)
    for (dlong k = rowptr[i]; k < rowptr[i + 1]; ++k)
      if (col[k] == i) d[i] = val[k];
  return d;
}

double SparseMatrix::at(dlong i, dlong j) const {
  const auto b = col.begin() + rowptr[i], e = col.begin() + rowptr[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? val[it - col.begin()] : 0.0;
}

double SparseMatrix::symmetry_defect() const {
  double m = 0.0;
  for (dlong i = 0; i < n; ++i)
    for (dlong k = rowptr[i]; k < rowptr[i + 1]; ++k) m = std::max(m, std::abs(val[k] - at(col[k], i)));
  return m;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (dlong i = 0; i < n; ++i)
    for (dlong k = rowptr[i]; k < rowptr[i + 1]; ++k) D(i, col[k]) = val[k];
  return D;
}

std::size_t SparseMatrix::bytes() const {
  return rowptr.size() * sizeof(dlong) + col.size() * sizeof(dlong) + val.size() * sizeof(double);
}

ApplyFn block_jacobi_precond(const Discretization& d, double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("block-Jacobi preconditioner needs lambda > 0");
  const Discretization* dp = &d;
  return [dp, lambda](std::span<const double> x, std::span<double> y) {
    Eigen::Map<RowMatrix> out(y.data(), dp->K, dp->Np);
    out.noalias() = Eigen::Map<const RowMatrix>(x.data(), dp->K, dp->Np) * dp->ref.invM.transpose();
    out.array().colwise() /= lambda * Eigen::Map<const Eigen::VectorXd>(dp->geom.J.data(), dp->K).array();
  };
}

ApplyFn point_jacobi_precond(std::vector<double> diag) {
  for (double& v : diag) {
    if (!(v > 0.0)) throw SolverError("point Jacobi: nonpositive diagonal entry");
    v = 1.0 / v;
  }
  return [inv = std::move(diag)](std::span<const double> x, std::span<double> y) {
    for (size_t i = 0; i < inv.size(); ++i) y[i] = inv[i] * x[i];
  };
}

SparseMatrix assemble_sipdg(const Discretization& d, double lambda, const EllipticBC& bc) {
  const int Np = d.Np;
  const dlong n = d.ndof();
  std::vector<double> u(n, 0.0), ux(n, 0.0), uy(n, 0.0), out(n, 0.0);
  kernels::SipdgScratch<double> w;
  w.resize(Np, 3 * d.Nfp);
  const double* Dr = d.ref.Dr.data();
  const double* Ds = d.ref.Ds.data();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(n) * Np * 4);
  for (int e = 0; e < d.K; ++e) {
    const dlong o = static_cast<dlong>(e) * Np;
    std::vector<int> rows{e};
    for (int f = 0; f < 3; ++f) {
      const int e2 = d.conn.EToE[3 * e + f];
      if (std::find(rows.begin(), rows.end(), e2) == rows.end()) rows.push_back(e2);
    }
    for (int j = 0; j < Np; ++j) {
      u[o + j] = 1.0;
      for (int i = 0; i < Np; ++i) {
        const double ur = Dr[i * Np + j], us = Ds[i * Np + j];
        ux[o + i] = d.geom.rx[e] * ur + d.geom.sx[e] * us;
        uy[o + i] = d.geom.ry[e] * ur + d.geom.sy[e] * us;
      }
      for (int e2 : rows) {
        kernels::sipdg_element(d, bc, lambda, e2, u.data(), ux.data(), uy.data(), out.data(), w);
        const dlong o2 = static_cast<dlong>(e2) * Np;
        for (int i = 0; i < Np; ++i)
          if (out[o2 + i] != 0.0) trip.push_back({o2 + i, o + j, out[o2 + i]});
      }
      u[o + j] = 0.0;
    }
    for (int i = 0; i < Np; ++i) ux[o + i] = uy[o + i] = 0.0;
  }
  return SparseMatrix::from_triplets(n, std::move(trip));
}

Aggregation aggregate(const SparseMatrix& A, double theta) {
  if (A.n == 0) throw SolverError("aggregate: empty matrix");
  const std::vector<double> diag = A.diagonal();
  auto strong = [&](dlong i, dlong k) {
    const dlong j = A.col[k];
    return j != i && std::abs(A.val[k]) > theta * std::sqrt(std::abs(diag[i] * diag[j]));
  };

  Aggregation g;
  g.agg.assign(A.n, -1);
  for (dlong i = 0; i < A.n; ++i) {
    if (g.agg[i] >= 0) continue;
    bool free = true;
    for (dlong k = A.rowptr[i]; k < A.rowptr[i + 1] && free; ++k)
      if (strong(i, k) && g.agg[A.col[k]] >= 0) free = false;
    if (!free) continue;
    const int id = g.count++;
    g.agg[i] = id;
    for (dlong k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k)
      if (strong(i, k)) g.agg[A.col[k]] = id;
  }
  // leftovers join the aggregate of their strongest aggregated neighbor
  std::vector<int> first = g.agg;
  for (dlong i = 0; i < A.n; ++i) {
    if (g.agg[i] >= 0) continue;
    double best = -1.0;
    int id = -1;
    for (dlong k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) {
      if (!strong(i, k) || first[A.col[k]] < 0) continue;
      if (std::abs(A.val[k]) > best) {
        best = std::abs(A.val[k]);
        id = first[A.col[k]];
      }
    }
    g.agg[i] = (id >= 0) ? id : g.count++;
  }
  return g;
}

SparseMatrix galerkin_product(const SparseMatrix& A, const Aggregation& g) {
  std::vector<Triplet> t;
  t.reserve(A.val.size());
  for (dlong i = 0; i < A.n; ++i)
    for (dlong k = A.rowptr[i]; k < A.rowptr[i + 1]; ++k) t.push_back({g.agg[i], g.agg[A.col[k]], A.val[k]});
  return SparseMatrix::from_triplets(g.count, std::move(t));
}

double estimate_lambda_max(const ApplyFn& A, std::span<const double> invdiag, int iterations, unsigned seed) {
  const size_t n = invdiag.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> v(n), w(n);
  for (double& x : v) x = U(rng);
  double nv = norm2(v);
  for (double& x : v) x /= nv;
  double lam = 0.0;
  for (int it = 0; it < iterations; ++it) {
    A(v, w);
    for (size_t i = 0; i < n; ++i) w[i] *= invdiag[i];
    lam = norm2(w);
    if (lam == 0.0) break;
    for (size_t i = 0; i < n; ++i) v[i] = w[i] / lam;
  }
  return lam;
}

ChebyshevSmoother::ChebyshevSmoother(ApplyFn A, std::vector<double> invdiag, double eig_hi, int degree)
    : A_(std::move(A)), invdiag_(std::move(invdiag)), degree_(degree) {
  if (!(eig_hi > 0.0)) throw SolverError("Chebyshev smoother: eig_hi must be positive");
  if (degree < 1) throw ConfigError("Chebyshev smoother: degree must be >= 1");
  lo_ = eig_hi / 10.0;
  hi_ = 1.1 * eig_hi;
  r_.resize(invdiag_.size());
  d_.resize(invdiag_.size());
  Ad_.resize(invdiag_.size());
}

void ChebyshevSmoother::smooth(std::span<const double> b, std::span<double> x, bool x_zero) const {
  const size_t n = invdiag_.size();
  if (x_zero) {
    std::copy(b.begin(), b.end(), r_.begin());
    std::fill(x.begin(), x.end(), 0.0);
  } else {
    A_(x, Ad_);
    for (size_t i = 0; i < n; ++i) r_[i] = b[i] - Ad_[i];
  }
  const double theta = 0.5 * (hi_ + lo_), delta = 0.5 * (hi_ - lo_);
  const double sigma = theta / delta;
  double rho_old = 1.0 / sigma;
  for (size_t i = 0; i < n; ++i) {
    d_[i] = invdiag_[i] * r_[i] / theta;
    x[i] += d_[i];
  }
  for (int k = 1; k < degree_; ++k) {
    A_(d_, Ad_);
    const double rho = 1.0 / (2.0 * sigma - rho_old);
    for (size_t i = 0; i < n; ++i) {
      r_[i] -= Ad_[i];
      d_[i] = rho * rho_old * d_[i] + (2.0 * rho / delta) * invdiag_[i] * r_[i];
      x[i] += d_[i];
    }
    rho_old = rho;
  }
}

void PTransfer::prolong(std::span<const double> xc, std::span<double> xf) const {
  Eigen::Map<RowMatrix>(xf.data(), K, Npf).noalias() = Eigen::Map<const RowMatrix>(xc.data(), K, Npc) * P.transpose();
}

void PTransfer::restrict_(std::span<const double> xf, std::span<double> xc) const {
  Eigen::Map<RowMatrix>(xc.data(), K, Npc).noalias() = Eigen::Map<const RowMatrix>(xf.data(), K, Npf) * P;
}

PTransfer build_p_transfer(int K, int fine_degree, int coarse_degree) {
  if (coarse_degree >= fine_degree) throw ConfigError("p-transfer: coarse degree must be below fine degree");
  PTransfer t;
  t.K = K;
  t.P = interpolation_matrix(coarse_degree, fine_degree);
  t.Npf = static_cast<int>(t.P.rows());
  t.Npc = static_cast<int>(t.P.cols());
  return t;
}

}  // namespace insdg
