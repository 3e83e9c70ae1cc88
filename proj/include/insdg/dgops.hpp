// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <span>

#include "insdg/bc.hpp"
#include "insdg/discretization.hpp"
#include "insdg/fields.hpp"

namespace insdg {

// J M f and (1/J) M^-1 f per element
ScalarField mass_apply(const Discretization& d, const ScalarField& f);
ScalarField inv_mass_apply(const Discretization& d, const ScalarField& f);

void local_gradient(const Discretization& d, const ScalarField& f, ScalarField& fx, ScalarField& fy);

// A f for the screened Poisson operator -Lap + lambda (positive form), homogeneous boundary conditions
ScalarField sipdg_apply(const Discretization& d, const ScalarField& f, const ScalarField& fx,
                        const ScalarField& fy, double lambda, const EllipticBC& bc);

// boundary data contribution: the operator applied to zero with Dirichlet values gD and Neumann
// normal derivatives hN on boundary traces (either may be empty). Solve A u = b - B.
ScalarField sipdg_boundary_term(const Discretization& d, const EllipticBC& bc,
                                std::span<const double> gD, std::span<const double> hN);

// trace-sized array (K x 3 x Nfp) holding fn on boundary traces of the selected tags, zero elsewhere
std::vector<double> boundary_trace(const Discretization& d,
                                   const std::function<double(double x, double y, double nx, double ny)>& fn,
                                   const std::function<bool(BoundaryTag)>& select);

// central-flux DG gradient; pD optionally holds the pressure on Neumann-velocity (outflow) traces
VectorField dg_gradient(const Discretization& d, const ScalarField& p, std::span<const double> pD = {});

// central-flux DG divergence; gu, gv hold Dirichlet velocity on inflow traces (walls are zero)
ScalarField dg_divergence(const Discretization& d, const VectorField& U, std::span<const double> gu = {},
                          std::span<const double> gv = {});

// +P F for the cubature advection operator (the negated volume part of N)
VectorField advection_volume(const Discretization& d, const VectorField& Ubar, const VectorField& Utilde);

// subtracts the lifted Lax-Friedrichs flux from acc
void advection_surface(const Discretization& d, const VectorField& Ubar, const VectorField& Utilde,
                       std::span<const double> gu, std::span<const double> gv, VectorField& acc);

// N(Ubar, Utilde) = div(Ubar (x) Utilde) in weak DG form
VectorField advection_operator(const Discretization& d, const VectorField& Ubar, const VectorField& Utilde,
                               std::span<const double> gu = {}, std::span<const double> gv = {});

// interpolate a function of (x, y) at the nodes
ScalarField interpolate(const Discretization& d, const std::function<double(double, double)>& fn);

// matrix-free SIPDG operator with scratch gradient storage
class EllipticOperator {
 public:
  EllipticOperator(const Discretization& d, double lambda, EllipticBC bc);
  void apply(std::span<const double> x, std::span<double> y) const;
  dlong size() const { return d_->ndof(); }
  double lambda() const { return lambda_; }
  const EllipticBC& bc() const { return bc_; }
  const Discretization& disc() const { return *d_; }
  // true when no boundary face is Dirichlet (constants in the null space)
  bool singular() const;
  // operator diagonal by element-local unit vectors
  std::vector<double> diagonal() const;

 private:
  const Discretization* d_;
  double lambda_;
  EllipticBC bc_;
  mutable std::vector<double> ux_, uy_;
};

}  // namespace insdg
