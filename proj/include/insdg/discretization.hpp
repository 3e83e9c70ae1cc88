// SPDX-License-Identifier: MIT
#pragma once

#include "insdg/mesh.hpp"
#include "insdg/refelem.hpp"

namespace insdg {

// everything an elemental operator reads: mesh, degree-N tables, traces and geometric factors
struct Discretization {
  int N = 0, K = 0, Np = 0, Nfp = 0;
  Mesh mesh;
  ReferenceElement ref;
  Connectivity conn;
  Geometry geom;
  std::vector<double> x, y;         // node coordinates, K x Np
  std::vector<int> boundary_faces;  // 3 e + f for every boundary face

  dlong ndof() const { return static_cast<dlong>(K) * Np; }
  dlong ntrace() const { return static_cast<dlong>(K) * 3 * Nfp; }
  bool has_tag(BoundaryTag t) const;
  // smallest h_ef / (N+1)^2 over all faces
  double min_spacing() const;
};

// cubature_order <= 0 selects the advection default 3N
Discretization make_discretization(const Mesh& mesh, int N, int cubature_order = 0);

// locate the element containing (x, y); -1 when outside the mesh
int find_element(const Discretization& d, double x, double y);

// evaluate a nodal field at a physical point (throws when outside the mesh)
double evaluate_at(const Discretization& d, const std::vector<double>& f, double x, double y);

}  // namespace insdg
