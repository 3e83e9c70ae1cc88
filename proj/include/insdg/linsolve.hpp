// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <memory>
#include <span>

#include "insdg/bc.hpp"
#include "insdg/discretization.hpp"

namespace insdg {

class EllipticOperator;

using ApplyFn = std::function<void(std::span<const double> x, std::span<double> y)>;

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;  // relative residual per iteration, entry 0 = initial
  int precond_applications = 0;
  double seconds = 0.0;
  bool converged = false;
};

struct PcgOptions {
  double tol = 1e-8;
  int maxit = 1000;
  bool project_mean = false;  // remove the constant component (singular all-Neumann systems)
};

// preconditioned CG; x holds the initial guess on entry. An empty precond means identity.
SolveStats pcg(const ApplyFn& A, const ApplyFn& precond, std::span<const double> b, std::span<double> x,
               const PcgOptions& opt);

struct Triplet {
  dlong row, col;
  double value;
};

struct SparseMatrix {
  dlong n = 0;
  std::vector<dlong> rowptr;
  std::vector<dlong> col;
  std::vector<double> val;

  static SparseMatrix from_triplets(dlong n, std::vector<Triplet> t);
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  double at(dlong i, dlong j) const;
  dlong nnz() const { return static_cast<dlong>(val.size()); }
  double symmetry_defect() const;  // max |a_ij - a_ji|
  Eigen::MatrixXd to_dense() const;
  std::size_t bytes() const;
};

// per-element (lambda J M)^-1
ApplyFn block_jacobi_precond(const Discretization& d, double lambda);
ApplyFn point_jacobi_precond(std::vector<double> diag);

// explicit matrix of the matrix-free operator, built from element-local unit vectors
SparseMatrix assemble_sipdg(const Discretization& d, double lambda, const EllipticBC& bc);

struct Aggregation {
  std::vector<int> agg;  // aggregate id of each fine index
  int count = 0;
};

Aggregation aggregate(const SparseMatrix& A, double theta = 0.08);
SparseMatrix galerkin_product(const SparseMatrix& A, const Aggregation& agg);

// largest eigenvalue of D^-1 A by power iteration from a seeded random start
double estimate_lambda_max(const ApplyFn& A, std::span<const double> invdiag, int iterations = 20,
                           unsigned seed = 12345);

// fixed degree-2 (default) Chebyshev smoother with D^-1 scaling on [eig_hi/10, 1.1 eig_hi]
class ChebyshevSmoother {
 public:
  ChebyshevSmoother() = default;
  ChebyshevSmoother(ApplyFn A, std::vector<double> invdiag, double eig_hi, int degree = 2);
  // x <- x + smoothing correction for A x = b; x_zero skips the initial residual
  void smooth(std::span<const double> b, std::span<double> x, bool x_zero) const;
  double lower() const { return lo_; }
  double upper() const { return hi_; }

 private:
  ApplyFn A_;
  std::vector<double> invdiag_;
  double lo_ = 0.0, hi_ = 0.0;
  int degree_ = 2;
  mutable std::vector<double> r_, d_, Ad_;
};

// p-prolongation: per element nodal interpolation from the coarse to the fine degree
struct PTransfer {
  int K = 0, Npf = 0, Npc = 0;
  RowMatrix P;  // Npf x Npc
  void prolong(std::span<const double> xc, std::span<double> xf) const;
  void restrict_(std::span<const double> xf, std::span<double> xc) const;
};

PTransfer build_p_transfer(int K, int fine_degree, int coarse_degree);

enum class CycleKind { V, K };

struct MultigridConfig {
  double theta = 0.08;
  int coarse_size = 200;
  int kcycle_levels = 2;
  int cheb_degree = 2;
};

struct MgLevel {
  int degree = 0;  // 0 on algebraic levels
  dlong n = 0;
  ApplyFn A;
  std::vector<double> invdiag;
  double eig_hi = 0.0;
  ChebyshevSmoother smoother;
  CycleKind cycle = CycleKind::V;
  double kc_alpha1 = 1.0, kc_alpha2 = 1.0;  // frozen K-cycle combination
  bool to_algebraic = false;                // transfer to next level by aggregation
  PTransfer ptransfer;
  Aggregation agg;
  std::shared_ptr<SparseMatrix> matrix;  // algebraic levels
};

class MultigridHierarchy {
 public:
  std::vector<MgLevel> levels;       // smoothed levels, finest first
  Eigen::MatrixXd coarse_inverse;    // pseudo-inverse on the coarsest level
  std::shared_ptr<SparseMatrix> coarse_matrix;
  bool singular = false;
  int assembled_degree = 0;          // degree of the assembled matrix (0 for a plain matrix)

  // one cycle applied to r
  void apply(std::span<const double> r, std::span<double> z) const;
  ApplyFn as_precond() const;
  std::vector<int> degrees() const;
  int algebraic_levels() const;
  dlong coarse_size() const { return coarse_inverse.rows(); }
  std::size_t memory_bytes() const;
  // one cycle whose finest level is l (l == levels.size() is the direct coarse solve)
  void cycle_at(std::size_t l, std::span<const double> b, std::span<double> x) const { cycle(l, b, x); }
  // fixes the K-cycle combination on the first `count` levels, coarsest first
  void freeze_kcycles(int count);

  // owned coarse discretizations and operators for the p-levels
  std::vector<std::unique_ptr<Discretization>> discs;
  std::vector<std::unique_ptr<EllipticOperator>> ops;

 private:
  void cycle(std::size_t l, std::span<const double> b, std::span<double> x) const;
  mutable std::vector<std::vector<double>> work_;
};

// p-degree schedule N, N/2, ..., 1
std::vector<int> p_schedule(int N);

// hybrid p-multigrid / aggregation AMG for the SIPDG operator on d
std::unique_ptr<MultigridHierarchy> build_pmg_amg(const Discretization& d, double lambda, const EllipticBC& bc,
                                                  const MultigridConfig& cfg = {});

// aggregation AMG on the assembled degree-N matrix
std::unique_ptr<MultigridHierarchy> build_full_amg(const Discretization& d, double lambda, const EllipticBC& bc,
                                                   const MultigridConfig& cfg = {});

// aggregation AMG for an explicit matrix
std::unique_ptr<MultigridHierarchy> build_amg(std::shared_ptr<SparseMatrix> A, const MultigridConfig& cfg = {});

}  // namespace insdg
