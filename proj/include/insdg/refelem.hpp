// SPDX-License-Identifier: MIT
#pragma once

#include "insdg/common.hpp"

namespace insdg {

// Bi-unit reference triangle: vertices (-1,-1), (1,-1), (-1,1).
// Faces: 0 = v0->v1 (s=-1), 1 = v1->v2 (r+s=0), 2 = v2->v0 (r=-1).
inline constexpr int kNfaces = 3;
inline constexpr double kRefArea = 2.0;

struct NodeSet {
  int degree = 0;
  std::vector<double> r, s;
  std::array<std::vector<int>, kNfaces> face_indices;

  int count() const { return static_cast<int>(r.size()); }
};

struct CubatureRule {
  int order = 0;
  std::vector<double> r, s, w;

  int count() const { return static_cast<int>(w.size()); }
};

struct LineRule {
  std::vector<double> x, w;
};

// 1D Gauss rules and Jacobi polynomials
LineRule gauss_jacobi(int n, double alpha, double beta);
LineRule gauss_legendre(int n);
std::vector<double> gauss_lobatto_points(int N);
Vector jacobi_p(const Vector& x, double alpha, double beta, int n);
Vector grad_jacobi_p(const Vector& x, double alpha, double beta, int n);

// orthonormal triangle basis, modes ordered (i, j) with i + j <= N
RowMatrix vandermonde_2d(int N, const std::vector<double>& r, const std::vector<double>& s);
void grad_vandermonde_2d(int N, const std::vector<double>& r, const std::vector<double>& s,
                         RowMatrix& Vr, RowMatrix& Vs);
RowMatrix vandermonde_1d(int N, const std::vector<double>& t);

NodeSet build_node_set(int N);
CubatureRule build_cubature(int order);

// coordinates of reference face f at parameter t in [-1, 1]
Vec2 face_point(int f, double t);
double face_parameter(int f, double r, double s);

struct ReferenceElement {
  int N = 0;
  int Np = 0;
  int Nfp = 0;
  int Nc = 0;
  int Nfc = 0;
  NodeSet nodes;
  CubatureRule cub;
  LineRule face_cub;

  RowMatrix V, invV;
  RowMatrix M, invM;
  RowMatrix Dr, Ds;
  RowMatrix LIFT;    // Np x 3 Nfp
  RowMatrix Icub;    // Nc x Np
  RowMatrix Pr, Ps;  // Np x Nc
  RowMatrix Ifcub;   // 3 Nfc x Nfp, block f rows map face f nodes to its cubature points
  RowMatrix Lcub;    // Np x 3 Nfc
  RowMatrix Mface;   // Nfp x Nfp 1D face mass on [-1,1]

  const std::vector<int>& fmask(int f) const { return nodes.face_indices[f]; }
};

ReferenceElement build_reference_element(int N, int cubature_order);

// nodal interpolation matrix from degree Nc nodes to degree Nf nodes (Np_f x Np_c)
RowMatrix interpolation_matrix(int coarse, int fine);

}  // namespace insdg
