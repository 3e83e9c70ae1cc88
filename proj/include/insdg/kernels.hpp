// SPDX-License-Identifier: MIT
// Elemental kernels, templated on the scalar type so the same code runs with
// double and with the counting wrapper. Layout: element-major, node-minor;
// traces indexed (3 e + f) Nfp + j.
#pragma once

#include <algorithm>
#include <vector>

#include "insdg/bc.hpp"
#include "insdg/discretization.hpp"
#include "insdg/flop_counter.hpp"

namespace insdg::kernels {

using std::abs;
using std::max;

// ux = rx Dr u + sx Ds u, uy = ry Dr u + sy Ds u
template <class T>
void local_gradient(const Discretization& d, const T* u, T* ux, T* uy) {
  const int Np = d.Np;
  const double* Dr = d.ref.Dr.data();
  const double* Ds = d.ref.Ds.data();
  for (int e = 0; e < d.K; ++e) {
    const T* ue = u + static_cast<dlong>(e) * Np;
    const double rx = d.geom.rx[e], sx = d.geom.sx[e], ry = d.geom.ry[e], sy = d.geom.sy[e];
    for (int i = 0; i < Np; ++i) {
      T ur(0.0), us(0.0);
      for (int j = 0; j < Np; ++j) {
        ur += Dr[i * Np + j] * ue[j];
        us += Ds[i * Np + j] * ue[j];
      }
      const dlong n = static_cast<dlong>(e) * Np + i;
      ux[n] = rx * ur + sx * us;
      uy[n] = ry * ur + sy * us;
    }
  }
}

template <class T>
struct SipdgScratch {
  std::vector<T> du, dux, duy, qx, qy, sflux, Lx, Ly, fr, fs, Au, v;
  void resize(int Np, int NfNfp) {
    for (auto* a : {&du, &dux, &duy, &qx, &qy, &sflux}) a->assign(NfNfp, T(0.0));
    for (auto* a : {&Lx, &Ly, &fr, &fs, &Au, &v}) a->assign(Np, T(0.0));
  }
};

// One element of the SIPDG operator
//   J M ( -D.[Du + 1/2 n L[u]] - L s ) + lambda J M u
// gD / hN optionally carry Dirichlet values and Neumann normal derivatives on boundary traces.
template <class T>
void sipdg_element(const Discretization& d, const EllipticBC& bc, double lambda, int e, const T* u,
                   const T* ux, const T* uy, T* out, SipdgScratch<T>& w, const double* gD = nullptr,
                   const double* hN = nullptr) {
  const int Np = d.Np, Nfp = d.Nfp, NfNfp = 3 * Nfp;
  const double* LIFT = d.ref.LIFT.data();
  const double* Dr = d.ref.Dr.data();
  const double* Ds = d.ref.Ds.data();
  const double* M = d.ref.M.data();
  const dlong eNp = static_cast<dlong>(e) * Np;

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
      const T uM = u[m], uxM = ux[m], uyM = uy[m];
      T uP, uxP, uyP;
      if (interior) {
        const dlong p = d.conn.vmapP[idx];
        uP = u[p];
        uxP = ux[p];
        uyP = uy[p];
      } else if (dirichlet) {
        uP = -uM;
        uxP = uxM;
        uyP = uyM;
        if (gD) uP = uP + 2.0 * gD[idx];
      } else {
        uP = uM;
        uxP = -uxM;
        uyP = -uyM;
        if (hN) {
          uxP = uxP + 2.0 * hN[idx] * nx;
          uyP = uyP + 2.0 * hN[idx] * ny;
        }
      }
      const int k = f * Nfp + j;
      w.du[k] = uP - uM;
      w.dux[k] = uxP - uxM;
      w.duy[k] = uyP - uyM;
      w.qx[k] = cx * w.du[k];
      w.qy[k] = cy * w.du[k];
    }
  }

  // lifted jumps, already carrying the 1/2 factor
  for (int i = 0; i < Np; ++i) {
    T lx(0.0), ly(0.0);
    for (int k = 0; k < NfNfp; ++k) {
      lx += LIFT[i * NfNfp + k] * w.qx[k];
      ly += LIFT[i * NfNfp + k] * w.qy[k];
    }
    w.Lx[i] = lx;
    w.Ly[i] = ly;
  }

  const double rx = d.geom.rx[e], sx = d.geom.sx[e], ry = d.geom.ry[e], sy = d.geom.sy[e];
  for (int i = 0; i < Np; ++i) {
    const T wx = ux[eNp + i] + w.Lx[i];
    const T wy = uy[eNp + i] + w.Ly[i];
    w.fr[i] = rx * wx + ry * wy;
    w.fs[i] = sx * wx + sy * wy;
  }
  for (int i = 0; i < Np; ++i) {
    T acc(0.0);
    for (int j = 0; j < Np; ++j) {
      acc += Dr[i * Np + j] * w.fr[j];
      acc += Ds[i * Np + j] * w.fs[j];
    }
    w.Au[i] = -acc;
  }

  for (int f = 0; f < 3; ++f) {
    const int ef = 3 * e + f;
    const double nx = d.geom.nx[ef], ny = d.geom.ny[ef], sJ = d.geom.sJ_over_J[ef], tau = d.geom.tau[ef];
    const auto& fm = d.ref.fmask(f);
    for (int j = 0; j < Nfp; ++j) {
      const int k = f * Nfp + j;
      const int mloc = fm[j];
      w.sflux[k] = sJ * (0.5 * (nx * w.dux[k] + ny * w.duy[k]) + tau * w.du[k] -
                         (nx * w.Lx[mloc] + ny * w.Ly[mloc]));
    }
  }
  for (int i = 0; i < Np; ++i) {
    T acc = w.Au[i];
    for (int k = 0; k < NfNfp; ++k) acc -= LIFT[i * NfNfp + k] * w.sflux[k];
    w.v[i] = acc + lambda * u[eNp + i];
  }

  const double J = d.geom.J[e];
  for (int i = 0; i < Np; ++i) {
    T acc(0.0);
    for (int j = 0; j < Np; ++j) acc += M[i * Np + j] * w.v[j];
    out[eNp + i] = J * acc;
  }
}

template <class T>
void sipdg(const Discretization& d, const EllipticBC& bc, double lambda, const T* u, const T* ux,
           const T* uy, T* Au, const double* gD = nullptr, const double* hN = nullptr) {
  SipdgScratch<T> w;
  w.resize(d.Np, 3 * d.Nfp);
  for (int e = 0; e < d.K; ++e) sipdg_element(d, bc, lambda, e, u, ux, uy, Au, w, gD, hN);
}

// Volume part of the cubature advection operator. Returns +P F, the negated
// volume contribution of N(Ubar, Utilde) = div(Ubar (x) Utilde).
template <class T>
void adv_volume(const Discretization& d, const T* ub, const T* vb, const T* ut, const T* vt, T* nu, T* nv) {
  const int Np = d.Np, Nc = d.ref.Nc;
  const double* I = d.ref.Icub.data();
  const double* Pr = d.ref.Pr.data();
  const double* Ps = d.ref.Ps.data();
  std::vector<T> F0(Nc), F1(Nc), F2(Nc), F3(Nc);
  for (int e = 0; e < d.K; ++e) {
    const dlong eNp = static_cast<dlong>(e) * Np;
    for (int c = 0; c < Nc; ++c) {
      T a(0.0), b(0.0), p(0.0), q(0.0);
      for (int j = 0; j < Np; ++j) {
        const double Icj = I[c * Np + j];
        a += Icj * ub[eNp + j];
        b += Icj * vb[eNp + j];
        p += Icj * ut[eNp + j];
        q += Icj * vt[eNp + j];
      }
      F0[c] = a * p;
      F1[c] = b * p;
      F2[c] = a * q;
      F3[c] = b * q;
    }
    const double rx = d.geom.rx[e], sx = d.geom.sx[e], ry = d.geom.ry[e], sy = d.geom.sy[e];
    for (int i = 0; i < Np; ++i) {
      T r0(0.0), s0(0.0), r1(0.0), s1(0.0), r2(0.0), s2(0.0), r3(0.0), s3(0.0);
      for (int c = 0; c < Nc; ++c) {
        const double pr = Pr[i * Nc + c], ps = Ps[i * Nc + c];
        r0 += pr * F0[c];
        s0 += ps * F0[c];
        r1 += pr * F1[c];
        s1 += ps * F1[c];
        r2 += pr * F2[c];
        s2 += ps * F2[c];
        r3 += pr * F3[c];
        s3 += ps * F3[c];
      }
      nu[eNp + i] = rx * r0 + sx * s0 + ry * r1 + sy * s1;
      nv[eNp + i] = rx * r2 + sx * s2 + ry * r3 + sy * s3;
    }
  }
}

// Lax-Friedrichs surface part of the cubature advection operator, subtracted from the accumulators.
// gu, gv hold exterior Dirichlet velocity on inflow traces (nullptr = zero); walls are zero,
// outflow copies interior traces.
template <class T>
void adv_surface(const Discretization& d, const T* ub, const T* vb, const T* ut, const T* vt,
                 const double* gu, const double* gv, T* nu, T* nv) {
  const int Np = d.Np, Nfp = d.Nfp, Nfc = d.ref.Nfc, NfNfc = 3 * Nfc;
  const double* If = d.ref.Ifcub.data();
  const double* L = d.ref.Lcub.data();
  std::vector<T> fu(NfNfc), fv(NfNfc);
  std::vector<T> tr(8 * Nfp);
  for (int e = 0; e < d.K; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int ef = 3 * e + f;
      const BoundaryTag tag = d.conn.bc[ef];
      for (int j = 0; j < Nfp; ++j) {
        const dlong idx = static_cast<dlong>(ef) * Nfp + j;
        const dlong m = d.conn.vmapM[idx], p = d.conn.vmapP[idx];
        tr[0 * Nfp + j] = ub[m];
        tr[1 * Nfp + j] = vb[m];
        tr[2 * Nfp + j] = ut[m];
        tr[3 * Nfp + j] = vt[m];
        if (tag == BoundaryTag::None || tag == BoundaryTag::Outflow) {
          tr[4 * Nfp + j] = ub[p];
          tr[5 * Nfp + j] = vb[p];
          tr[6 * Nfp + j] = ut[p];
          tr[7 * Nfp + j] = vt[p];
        } else {
          const double a = (tag == BoundaryTag::Inflow && gu) ? gu[idx] : 0.0;
          const double b = (tag == BoundaryTag::Inflow && gv) ? gv[idx] : 0.0;
          tr[4 * Nfp + j] = a;
          tr[5 * Nfp + j] = b;
          tr[6 * Nfp + j] = a;
          tr[7 * Nfp + j] = b;
        }
      }
      const double nx = d.geom.nx[ef], ny = d.geom.ny[ef];
      const double alpha = 0.5 * d.geom.sJ_over_J[ef];
      for (int c = 0; c < Nfc; ++c) {
        const double* Ic = If + (f * Nfc + c) * Nfp;
        T q[8];
        for (int t = 0; t < 8; ++t) {
          T acc(0.0);
          for (int j = 0; j < Nfp; ++j) acc += Ic[j] * tr[t * Nfp + j];
          q[t] = acc;
        }
        const T unM = nx * q[0] + ny * q[1];
        const T unP = nx * q[4] + ny * q[5];
        const T lam = max(abs(unM), abs(unP));
        fu[f * Nfc + c] = alpha * ((unM * q[2] + unP * q[6]) + lam * (q[2] - q[6]));
        fv[f * Nfc + c] = alpha * ((unM * q[3] + unP * q[7]) + lam * (q[3] - q[7]));
      }
    }
    const dlong eNp = static_cast<dlong>(e) * Np;
    for (int i = 0; i < Np; ++i) {
      T au = nu[eNp + i], av = nv[eNp + i];
      for (int k = 0; k < NfNfc; ++k) {
        au -= L[i * NfNfc + k] * fu[k];
        av -= L[i * NfNfc + k] * fv[k];
      }
      nu[eNp + i] = au;
      nv[eNp + i] = av;
    }
  }
}

}  // namespace insdg::kernels
