// SPDX-License-Identifier: MIT
#include "insdg/dgops.hpp"

#include "insdg/fastkernels.hpp"
#include "insdg/kernels.hpp"

namespace insdg {

namespace {

void check_size(const Discretization& d, const ScalarField& f) {
  if (f.size() != d.ndof())
    throw ShapeError("field has " + std::to_string(f.size()) + " entries, expected K*Np = " +
                     std::to_string(d.ndof()));
}

void check_trace(const Discretization& d, std::span<const double> t) {
  if (!t.empty() && static_cast<dlong>(t.size()) != d.ntrace())
    throw ShapeError("trace data has " + std::to_string(t.size()) + " entries, expected " +
                     std::to_string(d.ntrace()));
}

const double* ptr(std::span<const double> t) { return t.empty() ? nullptr : t.data(); }

}  // namespace

ScalarField mass_apply(const Discretization& d, const ScalarField& f) {
  check_size(d, f);
  ScalarField out(d.ndof());
  fast::element_apply(d, d.ref.M, f.data(), out.data(), true);
  return out;
}

ScalarField inv_mass_apply(const Discretization& d, const ScalarField& f) {
  check_size(d, f);
  ScalarField out(d.ndof());
  fast::element_apply(d, d.ref.invM, f.data(), out.data(), false, true);
  return out;
}

void local_gradient(const Discretization& d, const ScalarField& f, ScalarField& fx, ScalarField& fy) {
  check_size(d, f);
  fx.values.resize(f.values.size());
  fy.values.resize(f.values.size());
  fast::local_gradient(d, f.data(), fx.data(), fy.data());
}

ScalarField sipdg_apply(const Discretization& d, const ScalarField& f, const ScalarField& fx,
                        const ScalarField& fy, double lambda, const EllipticBC& bc) {
  check_size(d, f);
  if (fx.size() != f.size() || fy.size() != f.size()) throw ShapeError("sipdg_apply: missing gradient");
  if (lambda < 0.0) throw ConfigError("sipdg_apply: lambda must be nonnegative");
  ScalarField out(d.ndof());
  fast::sipdg(d, bc, lambda, f.data(), fx.data(), fy.data(), out.data());
  return out;
}

ScalarField sipdg_boundary_term(const Discretization& d, const EllipticBC& bc, std::span<const double> gD,
                                std::span<const double> hN) {
  check_trace(d, gD);
  check_trace(d, hN);
  const ScalarField zero(d.ndof());
  ScalarField out(d.ndof());
  fast::sipdg(d, bc, 0.0, zero.data(), zero.data(), zero.data(), out.data(), ptr(gD), ptr(hN));
  return out;
}

std::vector<double> boundary_trace(const Discretization& d,
                                   const std::function<double(double, double, double, double)>& fn,
                                   const std::function<bool(BoundaryTag)>& select) {
  std::vector<double> t(d.ntrace(), 0.0);
  for (int ef : d.boundary_faces) {
    if (!select(d.conn.bc[ef])) continue;
    const double nx = d.geom.nx[ef], ny = d.geom.ny[ef];
    for (int j = 0; j < d.Nfp; ++j) {
      const dlong idx = static_cast<dlong>(ef) * d.Nfp + j;
      const dlong m = d.conn.vmapM[idx];
      t[idx] = fn(d.x[m], d.y[m], nx, ny);
    }
  }
  return t;
}

VectorField dg_gradient(const Discretization& d, const ScalarField& p, std::span<const double> pD) {
  check_size(d, p);
  check_trace(d, pD);
  VectorField G(d.ndof());
  fast::local_gradient(d, p.data(), G.u.data(), G.v.data());
  const int Np = d.Np, Nfp = d.Nfp, NfNfp = 3 * Nfp;
  const double* LIFT = d.ref.LIFT.data();
  std::vector<double> qx(NfNfp), qy(NfNfp);
  for (int e = 0; e < d.K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const BoundaryTag tag = d.conn.bc[ef];
      const double sJ = d.geom.sJ_over_J[ef];
      for (int j = 0; j < Nfp; ++j) {
        const dlong idx = static_cast<dlong>(ef) * Nfp + j;
        const double pM = p[d.conn.vmapM[idx]];
        double flux = 0.0;
        if (tag == BoundaryTag::None) flux = 0.5 * (p[d.conn.vmapP[idx]] - pM);
        else if (tag == BoundaryTag::Outflow) flux = (pD.empty() ? 0.0 : pD[idx]) - pM;
        qx[f * Nfp + j] = sJ * d.geom.nx[ef] * flux;
        qy[f * Nfp + j] = sJ * d.geom.ny[ef] * flux;
      }
    }
    const dlong o = static_cast<dlong>(e) * Np;
    for (int i = 0; i < Np; ++i) {
      double ax = 0.0, ay = 0.0;
      for (int k = 0; k < NfNfp; ++k) {
        ax += LIFT[i * NfNfp + k] * qx[k];
        ay += LIFT[i * NfNfp + k] * qy[k];
      }
      G.u[o + i] += ax;
      G.v[o + i] += ay;
    }
  }
  return G;
}

ScalarField dg_divergence(const Discretization& d, const VectorField& U, std::span<const double> gu,
                          std::span<const double> gv) {
  check_size(d, U.u);
  check_size(d, U.v);
  check_trace(d, gu);
  check_trace(d, gv);
  ScalarField ux(d.ndof()), uy(d.ndof()), vx(d.ndof()), vy(d.ndof());
  fast::local_gradient(d, U.u.data(), ux.data(), uy.data());
  fast::local_gradient(d, U.v.data(), vx.data(), vy.data());
  ScalarField D(d.ndof());
  for (dlong n = 0; n < d.ndof(); ++n) D[n] = ux[n] + vy[n];

  const int Np = d.Np, Nfp = d.Nfp, NfNfp = 3 * Nfp;
  const double* LIFT = d.ref.LIFT.data();
  std::vector<double> q(NfNfp);
  for (int e = 0; e < d.K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const BoundaryTag tag = d.conn.bc[ef];
      const double sJ = d.geom.sJ_over_J[ef], nx = d.geom.nx[ef], ny = d.geom.ny[ef];
      for (int j = 0; j < Nfp; ++j) {
        const dlong idx = static_cast<dlong>(ef) * Nfp + j;
        const dlong m = d.conn.vmapM[idx];
        double du = 0.0, dv = 0.0;
        if (tag == BoundaryTag::None) {
          const dlong p = d.conn.vmapP[idx];
          du = 0.5 * (U.u[p] - U.u[m]);
          dv = 0.5 * (U.v[p] - U.v[m]);
        } else if (tag != BoundaryTag::Outflow) {
          const bool inflow = tag == BoundaryTag::Inflow;
          du = ((inflow && !gu.empty()) ? gu[idx] : 0.0) - U.u[m];
          dv = ((inflow && !gv.empty()) ? gv[idx] : 0.0) - U.v[m];
        }
        q[f * Nfp + j] = sJ * (nx * du + ny * dv);
      }
    }
    const dlong o = static_cast<dlong>(e) * Np;
    for (int i = 0; i < Np; ++i) {
      double a = 0.0;
      for (int k = 0; k < NfNfp; ++k) a += LIFT[i * NfNfp + k] * q[k];
      D[o + i] += a;
    }
  }
  return D;
}

VectorField advection_volume(const Discretization& d, const VectorField& Ubar, const VectorField& Utilde) {
  check_size(d, Ubar.u);
  check_size(d, Ubar.v);
  check_size(d, Utilde.u);
  check_size(d, Utilde.v);
  if (d.ref.cub.order < 3 * d.N)
    throw ConfigError("advection requires cubature order >= 3N, have " + std::to_string(d.ref.cub.order));
  VectorField out(d.ndof());
  fast::adv_volume(d, Ubar.u.data(), Ubar.v.data(), Utilde.u.data(), Utilde.v.data(), out.u.data(),
                      out.v.data());
  return out;
}

void advection_surface(const Discretization& d, const VectorField& Ubar, const VectorField& Utilde,
                       std::span<const double> gu, std::span<const double> gv, VectorField& acc) {
  check_size(d, Ubar.u);
  check_size(d, Utilde.u);
  check_size(d, acc.u);
  check_trace(d, gu);
  check_trace(d, gv);
  fast::adv_surface(d, Ubar.u.data(), Ubar.v.data(), Utilde.u.data(), Utilde.v.data(), ptr(gu), ptr(gv),
                       acc.u.data(), acc.v.data());
}

VectorField advection_operator(const Discretization& d, const VectorField& Ubar, const VectorField& Utilde,
                               std::span<const double> gu, std::span<const double> gv) {
  VectorField acc = advection_volume(d, Ubar, Utilde);
  advection_surface(d, Ubar, Utilde, gu, gv, acc);
  for (dlong n = 0; n < acc.size(); ++n) {
    acc.u[n] = -acc.u[n];
    acc.v[n] = -acc.v[n];
  }
  return acc;
}

ScalarField interpolate(const Discretization& d, const std::function<double(double, double)>& fn) {
  ScalarField f(d.ndof());
  for (dlong n = 0; n < d.ndof(); ++n) f[n] = fn(d.x[n], d.y[n]);
  return f;
}

EllipticOperator::EllipticOperator(const Discretization& d, double lambda, EllipticBC bc)
    : d_(&d), lambda_(lambda), bc_(bc), ux_(d.ndof()), uy_(d.ndof()) {
  if (lambda < 0.0) throw ConfigError("elliptic operator: lambda must be nonnegative");
}

void EllipticOperator::apply(std::span<const double> x, std::span<double> y) const {
  fast::local_gradient(*d_, x.data(), ux_.data(), uy_.data());
  fast::sipdg(*d_, bc_, lambda_, x.data(), ux_.data(), uy_.data(), y.data());
}

bool EllipticOperator::singular() const {
  if (lambda_ > 0.0) return false;
  for (int ef : d_->boundary_faces)
    if (bc_.kind(d_->conn.bc[ef]) == EllipticKind::Dirichlet) return false;
  return true;
}

std::vector<double> EllipticOperator::diagonal() const {
  const Discretization& d = *d_;
  const int Np = d.Np;
  std::vector<double> u(d.ndof(), 0.0), ux(d.ndof(), 0.0), uy(d.ndof(), 0.0), out(d.ndof(), 0.0);
  std::vector<double> diag(d.ndof());
  kernels::SipdgScratch<double> w;
  w.resize(Np, 3 * d.Nfp);
  const double* Dr = d.ref.Dr.data();
  const double* Ds = d.ref.Ds.data();
  for (int e = 0; e < d.K; ++e) {
    const dlong o = static_cast<dlong>(e) * Np;
    for (int j = 0; j < Np; ++j) {
      u[o + j] = 1.0;
      for (int i = 0; i < Np; ++i) {
        const double ur = Dr[i * Np + j], us = Ds[i * Np + j];
        ux[o + i] = d.geom.rx[e] * ur + d.geom.sx[e] * us;
        uy[o + i] = d.geom.ry[e] * ur + d.geom.sy[e] * us;
      }
      kernels::sipdg_element(d, bc_, lambda_, e, u.data(), ux.data(), uy.data(), out.data(), w);
      diag[o + j] = out[o + j];
      u[o + j] = 0.0;
    }
    for (int i = 0; i < Np; ++i) ux[o + i] = uy[o + i] = 0.0;
  }
  return diag;
}

}  // namespace insdg
