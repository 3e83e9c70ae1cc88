// SPDX-License-Identifier: MIT
#include "insdg/fastkernels.hpp"

#include <algorithm>
#include <cmath>

namespace insdg::fast {

namespace {

using CMap = Eigen::Map<const RowMatrix>;
using MMap = Eigen::Map<RowMatrix>;
using VMap = Eigen::Map<const Eigen::VectorXd>;

struct Scratch {
  RowMatrix a, b, c, qx, qy, du, dux, duy, sf, lx, ly;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

void local_gradient(const Discretization& d, const double* u, double* ux, double* uy) {
  const int K = d.K, Np = d.Np;
  CMap U(u, K, Np);
  Scratch& s = scratch();
  s.a.noalias() = U * d.ref.Dr.transpose();
  s.b.noalias() = U * d.ref.Ds.transpose();
  VMap rx(d.geom.rx.data(), K), sx(d.geom.sx.data(), K), ry(d.geom.ry.data(), K), sy(d.geom.sy.data(), K);
  MMap(ux, K, Np) = s.a.array().colwise() * rx.array() + s.b.array().colwise() * sx.array();
  MMap(uy, K, Np) = s.a.array().colwise() * ry.array() + s.b.array().colwise() * sy.array();
}

void sipdg(const Discretization& d, const EllipticBC& bc, double lambda, const double* u, const double* ux,
           const double* uy, double* Au, const double* gD, const double* hN) {
  const int K = d.K, Np = d.Np, Nfp = d.Nfp, NfNfp = 3 * Nfp;
  Scratch& s = scratch();
  s.du.resize(K, NfNfp);
  s.dux.resize(K, NfNfp);
  s.duy.resize(K, NfNfp);
  s.qx.resize(K, NfNfp);
  s.qy.resize(K, NfNfp);
  for (int e = 0; e < K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const BoundaryTag tag = d.conn.bc[ef];
      const double nx = d.geom.nx[ef], ny = d.geom.ny[ef], sJ = d.geom.sJ_over_J[ef];
      const double cx = 0.5 * nx * sJ, cy = 0.5 * ny * sJ;
      const bool interior = tag == BoundaryTag::None;
      const bool dirichlet = !interior && bc.kind(tag) == EllipticKind::Dirichlet;
      for (int j = 0; j < Nfp; ++j) {
        const dlong idx = static_cast<dlong>(ef) * Nfp + j;
        const dlong m = d.conn.vmapM[idx];
        const double uM = u[m], uxM = ux[m], uyM = uy[m];
        double uP, uxP, uyP;
        if (interior) {
          const dlong p = d.conn.vmapP[idx];
          uP = u[p];
          uxP = ux[p];
          uyP = uy[p];
        } else if (dirichlet) {
          uP = -uM;
          uxP = uxM;
          uyP = uyM;
          if (gD) uP += 2.0 * gD[idx];
        } else {
          uP = uM;
          uxP = -uxM;
          uyP = -uyM;
          if (hN) {
            uxP += 2.0 * hN[idx] * nx;
            uyP += 2.0 * hN[idx] * ny;
          }
        }
        const int k = f * Nfp + j;
        const double jump = uP - uM;
        s.du(e, k) = jump;
        s.dux(e, k) = uxP - uxM;
        s.duy(e, k) = uyP - uyM;
        s.qx(e, k) = cx * jump;
        s.qy(e, k) = cy * jump;
      }
    }
  }
  s.lx.noalias() = s.qx * d.ref.LIFT.transpose();
  s.ly.noalias() = s.qy * d.ref.LIFT.transpose();

  VMap rx(d.geom.rx.data(), K), sx(d.geom.sx.data(), K), ry(d.geom.ry.data(), K), sy(d.geom.sy.data(), K);
  CMap Ux(ux, K, Np), Uy(uy, K, Np);
  s.a = Ux + s.lx;  // wx
  s.b = Uy + s.ly;  // wy
  s.c = s.a.array().colwise() * sx.array() + s.b.array().colwise() * sy.array();        // fs
  s.a = s.a.array().colwise() * rx.array() + s.b.array().colwise() * ry.array();         // fr
  s.b.noalias() = -(s.a * d.ref.Dr.transpose());
  s.b.noalias() -= s.c * d.ref.Ds.transpose();

  s.sf.resize(K, NfNfp);
  for (int e = 0; e < K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const double nx = d.geom.nx[ef], ny = d.geom.ny[ef], sJ = d.geom.sJ_over_J[ef], tau = d.geom.tau[ef];
      const auto& fm = d.ref.fmask(f);
      for (int j = 0; j < Nfp; ++j) {
        const int k = f * Nfp + j;
        s.sf(e, k) = sJ * (0.5 * (nx * s.dux(e, k) + ny * s.duy(e, k)) + tau * s.du(e, k) -
                           (nx * s.lx(e, fm[j]) + ny * s.ly(e, fm[j])));
      }
    }
  }
  s.b.noalias() -= s.sf * d.ref.LIFT.transpose();
  if (lambda != 0.0) s.b += lambda * CMap(u, K, Np);
  MMap out(Au, K, Np);
  out.noalias() = s.b * d.ref.M.transpose();
  out.array().colwise() *= VMap(d.geom.J.data(), K).array();
}

void adv_volume(const Discretization& d, const double* ub, const double* vb, const double* ut, const double* vt,
                double* nu, double* nv) {
  const int K = d.K, Np = d.Np, Nc = d.ref.Nc;
  Scratch& s = scratch();
  const auto It = d.ref.Icub.transpose();
  s.a.noalias() = CMap(ub, K, Np) * It;
  s.b.noalias() = CMap(vb, K, Np) * It;
  s.qx.noalias() = CMap(ut, K, Np) * It;
  s.qy.noalias() = CMap(vt, K, Np) * It;
  // rows [F0; F1; F2; F3] = [a p; b p; a q; b q]
  s.c.resize(4 * K, Nc);
  s.c.topRows(K) = s.a.cwiseProduct(s.qx);
  s.c.middleRows(K, K) = s.b.cwiseProduct(s.qx);
  s.c.middleRows(2 * K, K) = s.a.cwiseProduct(s.qy);
  s.c.bottomRows(K) = s.b.cwiseProduct(s.qy);
  s.lx.noalias() = s.c * d.ref.Pr.transpose();
  s.ly.noalias() = s.c * d.ref.Ps.transpose();
  VMap rx(d.geom.rx.data(), K), sx(d.geom.sx.data(), K), ry(d.geom.ry.data(), K), sy(d.geom.sy.data(), K);
  const auto R = [&](int i) { return s.lx.middleRows(i * K, K).array(); };
  const auto S = [&](int i) { return s.ly.middleRows(i * K, K).array(); };
  MMap(nu, K, Np) = R(0).colwise() * rx.array() + S(0).colwise() * sx.array() + R(1).colwise() * ry.array() +
                    S(1).colwise() * sy.array();
  MMap(nv, K, Np) = R(2).colwise() * rx.array() + S(2).colwise() * sx.array() + R(3).colwise() * ry.array() +
                    S(3).colwise() * sy.array();
}

void adv_surface(const Discretization& d, const double* ub, const double* vb, const double* ut, const double* vt,
                 const double* gu, const double* gv, double* nu, double* nv) {
  const int K = d.K, Nfp = d.Nfp, Nfc = d.ref.Nfc, NfNfp = 3 * Nfp, NfNfc = 3 * Nfc;
  Scratch& s = scratch();
  // rows t K + e of s.a hold trace t of element e
  s.a.resize(8 * K, NfNfp);
  for (int e = 0; e < K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const BoundaryTag tag = d.conn.bc[ef];
      const bool copy = tag == BoundaryTag::None || tag == BoundaryTag::Outflow;
      const bool inflow = tag == BoundaryTag::Inflow;
      for (int j = 0; j < Nfp; ++j) {
        const dlong idx = static_cast<dlong>(ef) * Nfp + j;
        const dlong m = d.conn.vmapM[idx], p = d.conn.vmapP[idx];
        const int k = f * Nfp + j;
        s.a(e, k) = ub[m];
        s.a(K + e, k) = vb[m];
        s.a(2 * K + e, k) = ut[m];
        s.a(3 * K + e, k) = vt[m];
        if (copy) {
          s.a(4 * K + e, k) = ub[p];
          s.a(5 * K + e, k) = vb[p];
          s.a(6 * K + e, k) = ut[p];
          s.a(7 * K + e, k) = vt[p];
        } else {
          const double a = (inflow && gu) ? gu[idx] : 0.0;
          const double b = (inflow && gv) ? gv[idx] : 0.0;
          s.a(4 * K + e, k) = a;
          s.a(5 * K + e, k) = b;
          s.a(6 * K + e, k) = a;
          s.a(7 * K + e, k) = b;
        }
      }
    }
  }
  RowMatrix B = RowMatrix::Zero(NfNfp, NfNfc);
  for (int f = 0; f < 3; ++f)
    B.block(f * Nfp, f * Nfc, Nfp, Nfc) = d.ref.Ifcub.middleRows(f * Nfc, Nfc).transpose();
  s.b.noalias() = s.a * B;
  s.qx.resize(K, NfNfc);
  s.qy.resize(K, NfNfc);
  for (int e = 0; e < K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const double nx = d.geom.nx[ef], ny = d.geom.ny[ef];
      const double alpha = 0.5 * d.geom.sJ_over_J[ef];
      for (int c = 0; c < Nfc; ++c) {
        const int k = f * Nfc + c;
        double q[8];
        for (int t = 0; t < 8; ++t) q[t] = s.b(t * K + e, k);
        const double unM = nx * q[0] + ny * q[1];
        const double unP = nx * q[4] + ny * q[5];
        const double lam = std::max(std::abs(unM), std::abs(unP));
        s.qx(e, k) = alpha * ((unM * q[2] + unP * q[6]) + lam * (q[2] - q[6]));
        s.qy(e, k) = alpha * ((unM * q[3] + unP * q[7]) + lam * (q[3] - q[7]));
      }
    }
  }
  MMap(nu, K, d.Np).noalias() -= s.qx * d.ref.Lcub.transpose();
  MMap(nv, K, d.Np).noalias() -= s.qy * d.ref.Lcub.transpose();
}

void element_apply(const Discretization& d, const RowMatrix& A, const double* f, double* out, bool scale_by_J,
                   bool divide_by_J) {
  const int K = d.K, Np = d.Np;
  MMap o(out, K, Np);
  o.noalias() = CMap(f, K, Np) * A.transpose();
  if (scale_by_J) o.array().colwise() *= VMap(d.geom.J.data(), K).array();
  if (divide_by_J) o.array().colwise() /= VMap(d.geom.J.data(), K).array();
}

}  // namespace insdg::fast
