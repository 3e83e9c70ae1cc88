// SPDX-License-Identifier: MIT
#include "insdg/discretization.hpp"

#include <algorithm>
#include <cmath>

namespace insdg {

bool Discretization::has_tag(BoundaryTag t) const {
  for (int ef : boundary_faces)
    if (conn.bc[ef] == t) return true;
  return false;
}

double Discretization::min_spacing() const {
  double h = std::numeric_limits<double>::max();
  for (double v : geom.h) h = std::min(h, v);
  return h / ((N + 1.0) * (N + 1.0));
}

Discretization make_discretization(const Mesh& mesh, int N, int cubature_order) {
  Discretization d;
  d.mesh = mesh;
  validate_mesh(d.mesh);
  d.N = N;
  d.ref = build_reference_element(N, cubature_order > 0 ? cubature_order : std::max(3 * N, 2 * N + 1));
  d.K = mesh.K();
  d.Np = d.ref.Np;
  d.Nfp = d.ref.Nfp;
  d.conn = build_connectivity(d.mesh, d.ref);
  d.geom = compute_geometry(d.mesh, d.ref, N);
  node_coordinates(d.mesh, d.ref, d.x, d.y);
  for (int ef = 0; ef < 3 * d.K; ++ef)
    if (d.conn.bc[ef] != BoundaryTag::None) d.boundary_faces.push_back(ef);
  return d;
}

namespace {

// reference coordinates of (x, y) in element e
void to_reference(const Discretization& d, int e, double x, double y, double& r, double& s) {
  const auto& t = d.mesh.triangles[e];
  const Vec2 a = d.mesh.vertices[t[0]];
  const double dx = x - a.x, dy = y - a.y;
  // (r+1, s+1) = 2 * inverse Jacobian applied to (dx, dy) / 2
  r = -1.0 + d.geom.rx[e] * dx + d.geom.ry[e] * dy;
  s = -1.0 + d.geom.sx[e] * dx + d.geom.sy[e] * dy;
}

}  // namespace

int find_element(const Discretization& d, double x, double y) {
  for (int e = 0; e < d.K; ++e) {
    double r, s;
    to_reference(d, e, x, y, r, s);
    const double tol = 1e-12;
    if (r >= -1.0 - tol && s >= -1.0 - tol && r + s <= tol) return e;
  }
  return -1;
}

double evaluate_at(const Discretization& d, const std::vector<double>& f, double x, double y) {
  const int e = find_element(d, x, y);
  if (e < 0) throw Error("evaluate_at: point (" + std::to_string(x) + ", " + std::to_string(y) + ") outside mesh");
  double r, s;
  to_reference(d, e, x, y, r, s);
  const RowMatrix phi = vandermonde_2d(d.N, {r}, {s}) * d.ref.invV;
  double v = 0.0;
  for (int n = 0; n < d.Np; ++n) v += phi(0, n) * f[static_cast<size_t>(e) * d.Np + n];
  return v;
}

}  // namespace insdg
