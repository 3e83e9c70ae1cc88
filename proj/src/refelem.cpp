// SPDX-License-Identifier: MIT
#include "insdg/refelem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace insdg {

namespace {

constexpr int kMaxDegree = 10;
constexpr int kMaxCubatureOrder = 60;

double gamma_fn(double x) { return std::tgamma(x); }

}  // namespace

Vector jacobi_p(const Vector& x, double alpha, double beta, int n) {
  const Eigen::Index nx = x.size();
  std::vector<Vector> PL(n + 1, Vector::Zero(nx));

  const double gamma0 = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                        gamma_fn(alpha + 1.0) * gamma_fn(beta + 1.0) / gamma_fn(alpha + beta + 1.0);
  PL[0].setConstant(1.0 / std::sqrt(gamma0));
  if (n == 0) return PL[0];

  const double gamma1 = (alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0) * gamma0;
  PL[1] = (((alpha + beta + 2.0) * x.array() / 2.0 + (alpha - beta) / 2.0) / std::sqrt(gamma1)).matrix();
  if (n == 1) return PL[1];

  double aold = 2.0 / (2.0 + alpha + beta) *
                std::sqrt((alpha + 1.0) * (beta + 1.0) / (alpha + beta + 3.0));
  for (int i = 1; i < n; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    const double anew = 2.0 / (h1 + 2.0) *
                        std::sqrt((i + 1.0) * (i + 1.0 + alpha + beta) * (i + 1.0 + alpha) *
                                  (i + 1.0 + beta) / (h1 + 1.0) / (h1 + 3.0));
    const double bnew = -(alpha * alpha - beta * beta) / h1 / (h1 + 2.0);
    PL[i + 1] = (1.0 / anew) * (-aold * PL[i - 1].array() + (x.array() - bnew) * PL[i].array()).matrix();
    aold = anew;
  }
  return PL[n];
}

Vector grad_jacobi_p(const Vector& x, double alpha, double beta, int n) {
  if (n == 0) return Vector::Zero(x.size());
  return std::sqrt(n * (n + alpha + beta + 1.0)) * jacobi_p(x, alpha + 1.0, beta + 1.0, n - 1);
}

LineRule gauss_jacobi(int n, double alpha, double beta) {
  LineRule rule;
  if (n < 1) throw ConfigError("gauss_jacobi: need at least one point");
  if (n == 1) {
    rule.x = {(alpha - beta) / (alpha + beta + 2.0)};
    rule.w = {std::pow(2.0, alpha + beta + 1.0) * gamma_fn(alpha + 1.0) * gamma_fn(beta + 1.0) /
              gamma_fn(alpha + beta + 2.0)};
    return rule;
  }
  const int N = n - 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i <= N; ++i) {
    const double h1 = 2.0 * i + alpha + beta;
    J(i, i) = -(alpha * alpha - beta * beta) / (h1 + 2.0) / h1;
    if (i < N) {
      const double k = i + 1.0;
      const double off = 2.0 / (h1 + 2.0) *
                         std::sqrt(k * (k + alpha + beta) * (k + alpha) * (k + beta) / (h1 + 1.0) / (h1 + 3.0));
      J(i, i + 1) = off;
      J(i + 1, i) = off;
    }
  }
  if (alpha + beta < 10.0 * std::numeric_limits<double>::epsilon()) J(0, 0) = 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double scale = std::pow(2.0, alpha + beta + 1.0) / (alpha + beta + 1.0) *
                       gamma_fn(alpha + 1.0) * gamma_fn(beta + 1.0) / gamma_fn(alpha + beta + 1.0);
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.w[i] = v0 * v0 * scale;
  }
  return rule;
}

LineRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

std::vector<double> gauss_lobatto_points(int N) {
  if (N == 1) return {-1.0, 1.0};
  std::vector<double> x{-1.0};
  const LineRule inner = gauss_jacobi(N - 1, 1.0, 1.0);
  x.insert(x.end(), inner.x.begin(), inner.x.end());
  x.push_back(1.0);
  return x;
}

namespace {

void rs_to_ab(double r, double s, double& a, double& b) {
  a = (std::abs(s - 1.0) > 1e-14) ? 2.0 * (1.0 + r) / (1.0 - s) - 1.0 : -1.0;
  b = s;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

RowMatrix vandermonde_2d(int N, const std::vector<double>& r, const std::vector<double>& s) {
  const int n = static_cast<int>(r.size());
  const int Np = (N + 1) * (N + 2) / 2;
  Vector a(n), b(n);
  for (int k = 0; k < n; ++k) rs_to_ab(r[k], s[k], a(k), b(k));

  RowMatrix V(n, Np);
  int col = 0;
  for (int i = 0; i <= N; ++i) {
    const Vector h1 = jacobi_p(a, 0.0, 0.0, i);
    for (int j = 0; j <= N - i; ++j) {
      const Vector h2 = jacobi_p(b, 2.0 * i + 1.0, 0.0, j);
      for (int k = 0; k < n; ++k)
        V(k, col) = std::sqrt(2.0) * h1(k) * h2(k) * std::pow(1.0 - b(k), i);
      ++col;
    }
  }
  return V;
}

void grad_vandermonde_2d(int N, const std::vector<double>& r, const std::vector<double>& s,
                         RowMatrix& Vr, RowMatrix& Vs) {
  const int n = static_cast<int>(r.size());
  const int Np = (N + 1) * (N + 2) / 2;
  Vector a(n), b(n);
  for (int k = 0; k < n; ++k) rs_to_ab(r[k], s[k], a(k), b(k));

  Vr.resize(n, Np);
  Vs.resize(n, Np);
  int col = 0;
  for (int id = 0; id <= N; ++id) {
    const Vector fa = jacobi_p(a, 0.0, 0.0, id);
    const Vector dfa = grad_jacobi_p(a, 0.0, 0.0, id);
    for (int jd = 0; jd <= N - id; ++jd) {
      const Vector gb = jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
      const Vector dgb = grad_jacobi_p(b, 2.0 * id + 1.0, 0.0, jd);
      for (int k = 0; k < n; ++k) {
        const double hb = 0.5 * (1.0 - b(k));
        double dr = dfa(k) * gb(k);
        if (id > 0) dr *= std::pow(hb, id - 1);
        double ds = dfa(k) * (gb(k) * (0.5 * (1.0 + a(k))));
        if (id > 0) ds *= std::pow(hb, id - 1);
        double tmp = dgb(k) * std::pow(hb, id);
        if (id > 0) tmp -= 0.5 * id * gb(k) * std::pow(hb, id - 1);
        ds += fa(k) * tmp;
        const double scale = std::pow(2.0, id + 0.5);
        Vr(k, col) = dr * scale;
        Vs(k, col) = ds * scale;
      }
      ++col;
    }
  }
}

RowMatrix vandermonde_1d(int N, const std::vector<double>& t) {
  const Vector x = to_vector(t);
  RowMatrix V(x.size(), N + 1);
  for (int j = 0; j <= N; ++j) V.col(j) = jacobi_p(x, 0.0, 0.0, j);
  return V;
}

namespace {

Vector warp_factor(int N, const Vector& rout) {
  const std::vector<double> lgl = gauss_lobatto_points(N);
  std::vector<double> req(N + 1);
  for (int i = 0; i <= N; ++i) req[i] = -1.0 + 2.0 * i / N;

  const RowMatrix Veq = vandermonde_1d(N, req);
  const Eigen::Index nr = rout.size();
  Eigen::MatrixXd Pmat(N + 1, nr);
  for (int i = 0; i <= N; ++i) Pmat.row(i) = jacobi_p(rout, 0.0, 0.0, i).transpose();
  const Eigen::MatrixXd Lmat = Veq.transpose().partialPivLu().solve(Pmat);

  Vector diff(N + 1);
  for (int i = 0; i <= N; ++i) diff(i) = lgl[i] - req[i];
  Vector warp = Lmat.transpose() * diff;
  for (Eigen::Index k = 0; k < nr; ++k) {
    const double zerof = (std::abs(rout(k)) < 1.0 - 1e-10) ? 1.0 : 0.0;
    const double sf = 1.0 - (zerof * rout(k)) * (zerof * rout(k));
    warp(k) = warp(k) / sf + warp(k) * (zerof - 1.0);
  }
  return warp;
}

void snap(double& v, double target) {
  if (std::abs(v - target) < 1e-13) v = target;
}

}  // namespace

NodeSet build_node_set(int N) {
  if (N < 1 || N > kMaxDegree)
    throw ConfigError("polynomial degree must satisfy 1 <= N <= " + std::to_string(kMaxDegree) +
                      ", got " + std::to_string(N));
  static const double alpopt[] = {0.0000, 0.0000, 1.4152, 0.1001, 0.2751, 0.9800, 1.0999, 1.2832,
                                  1.3648, 1.4773, 1.4959, 1.5743, 1.5770, 1.6223, 1.6258};
  const double alpha = (N < 16) ? alpopt[N - 1] : 5.0 / 3.0;
  const int Np = (N + 1) * (N + 2) / 2;

  Vector L1(Np), L2(Np), L3(Np);
  int sk = 0;
  for (int n = 1; n <= N + 1; ++n) {
    for (int m = 1; m <= N + 2 - n; ++m) {
      L1(sk) = (n - 1.0) / N;
      L3(sk) = (m - 1.0) / N;
      L2(sk) = 1.0 - L1(sk) - L3(sk);
      ++sk;
    }
  }
  Vector x = -L2 + L3;
  Vector y = (-L2 - L3 + 2.0 * L1) / std::sqrt(3.0);

  const Vector blend1 = 4.0 * L2.cwiseProduct(L3);
  const Vector blend2 = 4.0 * L1.cwiseProduct(L3);
  const Vector blend3 = 4.0 * L1.cwiseProduct(L2);
  const Vector warpf1 = warp_factor(N, L3 - L2);
  const Vector warpf2 = warp_factor(N, L1 - L3);
  const Vector warpf3 = warp_factor(N, L2 - L1);

  const double pi = std::acos(-1.0);
  for (int k = 0; k < Np; ++k) {
    const double w1 = blend1(k) * warpf1(k) * (1.0 + (alpha * L1(k)) * (alpha * L1(k)));
    const double w2 = blend2(k) * warpf2(k) * (1.0 + (alpha * L2(k)) * (alpha * L2(k)));
    const double w3 = blend3(k) * warpf3(k) * (1.0 + (alpha * L3(k)) * (alpha * L3(k)));
    x(k) += w1 + std::cos(2.0 * pi / 3.0) * w2 + std::cos(4.0 * pi / 3.0) * w3;
    y(k) += std::sin(2.0 * pi / 3.0) * w2 + std::sin(4.0 * pi / 3.0) * w3;
  }

  NodeSet ns;
  ns.degree = N;
  ns.r.resize(Np);
  ns.s.resize(Np);
  for (int k = 0; k < Np; ++k) {
    const double l1 = (std::sqrt(3.0) * y(k) + 1.0) / 3.0;
    const double l2 = (-3.0 * x(k) - std::sqrt(3.0) * y(k) + 2.0) / 6.0;
    const double l3 = (3.0 * x(k) - std::sqrt(3.0) * y(k) + 2.0) / 6.0;
    double r = -l2 + l3 - l1;
    double s = -l2 - l3 + l1;
    snap(r, -1.0);
    snap(s, -1.0);
    snap(r, 1.0);
    snap(s, 1.0);
    if (std::abs(r + s) < 1e-13) s = -r;
    ns.r[k] = r;
    ns.s[k] = s;
  }

  for (int f = 0; f < kNfaces; ++f) {
    std::vector<int> ids;
    for (int k = 0; k < Np; ++k) {
      const double d = (f == 0) ? ns.s[k] + 1.0 : (f == 1) ? ns.r[k] + ns.s[k] : ns.r[k] + 1.0;
      if (std::abs(d) < 1e-10) ids.push_back(k);
    }
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
      return face_parameter(f, ns.r[a], ns.s[a]) < face_parameter(f, ns.r[b], ns.s[b]);
    });
    if (static_cast<int>(ids.size()) != N + 1)
      throw Error("node set construction found " + std::to_string(ids.size()) + " nodes on face " +
                  std::to_string(f));
    ns.face_indices[f] = ids;
  }
  return ns;
}

Vec2 face_point(int f, double t) {
  switch (f) {
    case 0: return {t, -1.0};
    case 1: return {-t, t};
    default: return {-1.0, -t};
  }
}

double face_parameter(int f, double r, double s) {
  switch (f) {
    case 0: return r;
    case 1: return s;
    default: return -s;
  }
}

namespace {

void add_point(CubatureRule& c, double l1, double l2, double l3, double w) {
  c.r.push_back(-l1 + l2 - l3);
  c.s.push_back(-l1 - l2 + l3);
  c.w.push_back(w);
}

void add_orbit3(CubatureRule& c, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  add_point(c, a, a, b, w);
  add_point(c, a, b, a, w);
  add_point(c, b, a, a, w);
}

}  // namespace

CubatureRule build_cubature(int order) {
  if (order < 1) throw ConfigError("cubature order must be >= 1");
  if (order > kMaxCubatureOrder)
    throw ConfigError("cubature order " + std::to_string(order) + " exceeds supported maximum " +
                      std::to_string(kMaxCubatureOrder));
  CubatureRule c;
  c.order = order;
  if (order <= 1) {
    add_point(c, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, kRefArea);
  } else if (order == 2) {
    add_orbit3(c, 1.0 / 6.0, kRefArea / 3.0);
  } else if (order <= 5) {
    const double sq15 = std::sqrt(15.0);
    add_point(c, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, kRefArea * 9.0 / 40.0);
    add_orbit3(c, (6.0 - sq15) / 21.0, kRefArea * (155.0 - sq15) / 1200.0);
    add_orbit3(c, (6.0 + sq15) / 21.0, kRefArea * (155.0 + sq15) / 1200.0);
  } else {
    const int q = (order + 2) / 2;
    const LineRule ga = gauss_jacobi(q, 0.0, 0.0);
    const LineRule gb = gauss_jacobi(q, 1.0, 0.0);
    for (int j = 0; j < q; ++j) {
      for (int i = 0; i < q; ++i) {
        const double a = ga.x[i];
        const double b = gb.x[j];
        c.r.push_back(0.5 * (1.0 + a) * (1.0 - b) - 1.0);
        c.s.push_back(b);
        c.w.push_back(0.5 * ga.w[i] * gb.w[j]);
      }
    }
  }
  return c;
}

ReferenceElement build_reference_element(int N, int cubature_order) {
  ReferenceElement ref;
  ref.nodes = build_node_set(N);
  if (cubature_order < 2 * N)
    throw ConfigError("cubature order " + std::to_string(cubature_order) + " below 2N = " +
                      std::to_string(2 * N));
  ref.N = N;
  ref.Np = ref.nodes.count();
  ref.Nfp = N + 1;
  ref.cub = build_cubature(cubature_order);
  ref.Nc = ref.cub.count();
  ref.Nfc = (cubature_order + 2) / 2;
  ref.face_cub = gauss_legendre(ref.Nfc);

  const int Np = ref.Np, Nfp = ref.Nfp, Nc = ref.Nc, Nfc = ref.Nfc;

  ref.V = vandermonde_2d(N, ref.nodes.r, ref.nodes.s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ref.V);
  const double cond = svd.singularValues()(0) / svd.singularValues()(Np - 1);
  if (!std::isfinite(cond) || cond > 1e12)
    throw Error("reference element: Vandermonde matrix singular (condition " + std::to_string(cond) + ")");
  ref.invV = ref.V.inverse();
  ref.invM = ref.V * ref.V.transpose();
  ref.M = ref.invM.inverse();
  ref.M = 0.5 * (ref.M + ref.M.transpose()).eval();

  RowMatrix Vr, Vs;
  grad_vandermonde_2d(N, ref.nodes.r, ref.nodes.s, Vr, Vs);
  ref.Dr = Vr * ref.invV;
  ref.Ds = Vs * ref.invV;

  // lift from 1D face mass matrices
  ref.LIFT = RowMatrix::Zero(Np, kNfaces * Nfp);
  RowMatrix E = RowMatrix::Zero(Np, kNfaces * Nfp);
  for (int f = 0; f < kNfaces; ++f) {
    std::vector<double> t(Nfp);
    for (int j = 0; j < Nfp; ++j) {
      const int n = ref.fmask(f)[j];
      t[j] = face_parameter(f, ref.nodes.r[n], ref.nodes.s[n]);
    }
    const RowMatrix V1 = vandermonde_1d(N, t);
    const RowMatrix Mf = (V1 * V1.transpose()).inverse();
    if (f == 0) ref.Mface = Mf;
    for (int i = 0; i < Nfp; ++i)
      for (int j = 0; j < Nfp; ++j) E(ref.fmask(f)[i], f * Nfp + j) = Mf(i, j);

    // face cubature interpolation
    if (f == 0) ref.Ifcub.resize(kNfaces * Nfc, Nfp);
    const RowMatrix Vc = vandermonde_1d(N, ref.face_cub.x);
    ref.Ifcub.block(f * Nfc, 0, Nfc, Nfp) = Vc * V1.inverse();
  }
  ref.LIFT = ref.invM * E;

  // volume cubature operators
  ref.Icub = vandermonde_2d(N, ref.cub.r, ref.cub.s) * ref.invV;
  RowMatrix Vrc, Vsc;
  grad_vandermonde_2d(N, ref.cub.r, ref.cub.s, Vrc, Vsc);
  const RowMatrix Drc = Vrc * ref.invV;
  const RowMatrix Dsc = Vsc * ref.invV;
  const Eigen::Map<const Vector> w(ref.cub.w.data(), Nc);
  ref.Pr = ref.invM * (Drc.transpose() * w.asDiagonal());
  ref.Ps = ref.invM * (Dsc.transpose() * w.asDiagonal());

  // face cubature lift
  ref.Lcub.resize(Np, kNfaces * Nfc);
  for (int f = 0; f < kNfaces; ++f) {
    std::vector<double> r(Nfc), s(Nfc);
    for (int j = 0; j < Nfc; ++j) {
      const Vec2 p = face_point(f, ref.face_cub.x[j]);
      r[j] = p.x;
      s[j] = p.y;
    }
    const RowMatrix Lf = vandermonde_2d(N, r, s) * ref.invV;  // Nfc x Np
    const Eigen::Map<const Vector> wf(ref.face_cub.w.data(), Nfc);
    ref.Lcub.block(0, f * Nfc, Np, Nfc) = ref.invM * (Lf.transpose() * wf.asDiagonal());
  }
  return ref;
}

RowMatrix interpolation_matrix(int coarse, int fine) {
  const NodeSet cn = build_node_set(coarse);
  const NodeSet fn = build_node_set(fine);
  const RowMatrix Vc = vandermonde_2d(coarse, cn.r, cn.s);
  const RowMatrix Vf = vandermonde_2d(coarse, fn.r, fn.s);
  return Vf * Vc.inverse();
}

}  // namespace insdg
