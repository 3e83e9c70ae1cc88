// SPDX-License-Identifier: MIT
// Batched double-precision versions of the elemental kernels. Same results as
// insdg::kernels up to rounding; elements are stacked as rows of K x Np matrices.
#pragma once

#include "insdg/bc.hpp"
#include "insdg/discretization.hpp"

namespace insdg::fast {

void local_gradient(const Discretization& d, const double* u, double* ux, double* uy);

void sipdg(const Discretization& d, const EllipticBC& bc, double lambda, const double* u, const double* ux,
           const double* uy, double* Au, const double* gD = nullptr, const double* hN = nullptr);

void adv_volume(const Discretization& d, const double* ub, const double* vb, const double* ut, const double* vt,
                double* nu, double* nv);

void adv_surface(const Discretization& d, const double* ub, const double* vb, const double* ut, const double* vt,
                 const double* gu, const double* gv, double* nu, double* nv);

// out_e = J_e A f_e for every element (A is Np x Np)
void element_apply(const Discretization& d, const RowMatrix& A, const double* f, double* out, bool scale_by_J,
                   bool divide_by_J = false);

}  // namespace insdg::fast
