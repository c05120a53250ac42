#pragma once

#include <array>
#include <span>
#include <vector>

#include "mftd/geometry.hpp"
#include "mftd/kernels.hpp"

namespace mftd::fem {

using kernels::Csr;
using kernels::Exec;

// Plane-stress constitutive matrix, row-major 3x3.
std::array<double, 9> constitutive(double E, double nu);

// Bilinear quad, plane stress, 2x2 Gauss, unit Young's modulus. Row-major 8x8
// over dofs (u1,v1,...,u4,v4) in the grid's n00,n10,n11,n01 node order.
// Independent of element_size for square elements.
std::array<double, 64> element_stiffness_unit(double element_size, double nu);

// Strain-displacement matrix at the element centroid, row-major 3x8.
std::array<double, 24> centroid_b_matrix(double element_size);

double von_mises(double sx, double sy, double txy);

// SIMP-modified modulus per active cell: Emin + rho^p (E0 - Emin).
std::vector<double> simp_modulus(std::span<const double> rho_filtered, const MaterialModel& mat,
                                 Exec exec = Exec::Parallel);

// Sparse SPD system over free dofs with fixed dofs eliminated by reduction.
// The pattern and the per-slot element contributions are precomputed once, so
// re-assembly for a new density is a parallel fill over disjoint slots.
class LinearSystem {
 public:
  LinearSystem(const StructuredGrid& grid, std::span<const std::int32_t> fixed_dofs, double nu);

  // K = sum_e e_modulus[e] * K_unit, scattered to free dofs.
  void assemble(std::span<const double> e_modulus, Exec exec = Exec::Parallel);

  std::vector<double> load_vector(const BCSet& bc) const;

  // Gathers per-dof values (e.g. adjoint right-hand sides) to free dofs.
  std::vector<double> restrict_to_free(std::span<const double> full) const;
  // Expands a free-dof vector to 2*n_nodes, zeros on fixed dofs.
  std::vector<double> expand(std::span<const double> u_free) const;

  const Csr& matrix() const { return K_; }
  int n_free() const { return n_free_; }
  int dof_index(int dof) const { return dof_index_[dof]; }
  const std::array<double, 64>& ke_unit() const { return ke_unit_; }

 private:
  const StructuredGrid* grid_;
  std::array<double, 64> ke_unit_{};
  std::vector<std::int32_t> dof_index_;  // 2*n_nodes -> free id or -1
  int n_free_ = 0;
  Csr K_;
  // Per-nnz-slot contributions: (active cell, 8x8 entry).
  std::vector<int> slot_begin_;
  std::vector<std::pair<std::int32_t, std::int32_t>> contribs_;
};

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients. x is the initial guess on entry
// and the solution on exit. Throws on non-convergence, carrying the final
// residual in the message.
SolveReport pcg_solve(const Csr& K, std::span<const double> b, std::span<double> x,
                      double tol = 1e-10, int max_iter = 20000, Exec exec = Exec::Parallel);

struct StressField {
  std::vector<double> sx, sy, txy, vm;  // per active cell, centroid values
};

// Centroid stresses from the full displacement vector (2*n_nodes), computed
// with the solid modulus; relaxation is applied by the caller.
StressField element_stresses(const StructuredGrid& grid, std::span<const double> u_full,
                             double E0, double nu, Exec exec = Exec::Parallel);

}  // namespace mftd::fem
