#include "mftd/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mftd::fem {

std::array<double, 9> constitutive(double E, double nu) {
  const double f = E / (1.0 - nu * nu);
  return {f, f * nu, 0.0, f * nu, f, 0.0, 0.0, 0.0, f * (1.0 - nu) / 2.0};
}

namespace {

// dN/dxi and dN/deta for nodes (n00,n10,n11,n01) at (xi,eta) in [-1,1]^2.
void shape_derivs(double xi, double eta, double dxi[4], double deta[4]) {
  dxi[0] = -(1 - eta) / 4;
  dxi[1] = (1 - eta) / 4;
  dxi[2] = (1 + eta) / 4;
  dxi[3] = -(1 + eta) / 4;
  deta[0] = -(1 - xi) / 4;
  deta[1] = -(1 + xi) / 4;
  deta[2] = (1 + xi) / 4;
  deta[3] = (1 - xi) / 4;
}

std::array<double, 24> b_matrix_at(double xi, double eta, double element_size) {
  double dxi[4], deta[4];
  shape_derivs(xi, eta, dxi, deta);
  const double scale = 2.0 / element_size;  // d(xi)/dx for a square element
  std::array<double, 24> B{};
  for (int a = 0; a < 4; ++a) {
    const double dx = dxi[a] * scale, dy = deta[a] * scale;
    B[0 * 8 + 2 * a] = dx;
    B[1 * 8 + 2 * a + 1] = dy;
    B[2 * 8 + 2 * a] = dy;
    B[2 * 8 + 2 * a + 1] = dx;
  }
  return B;
}

}  // namespace

std::array<double, 64> element_stiffness_unit(double element_size, double nu) {
  if (!(nu > 0 && nu < 0.5)) throw std::invalid_argument("element_stiffness_unit: nu in (0,0.5)");
  const auto D = constitutive(1.0, nu);
  const double gp = 1.0 / std::sqrt(3.0);
  const double detJ = element_size * element_size / 4.0;
  std::array<double, 64> K{};
  for (const double xi : {-gp, gp}) {
    for (const double eta : {-gp, gp}) {
      const auto B = b_matrix_at(xi, eta, element_size);
      double DB[24];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 8; ++c)
          DB[r * 8 + c] = D[r * 3] * B[c] + D[r * 3 + 1] * B[8 + c] + D[r * 3 + 2] * B[16 + c];
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
          double s = 0;
          for (int k = 0; k < 3; ++k) s += B[k * 8 + r] * DB[k * 8 + c];
          K[r * 8 + c] += s * detJ;
        }
    }
  }
  return K;
}

std::array<double, 24> centroid_b_matrix(double element_size) {
  return b_matrix_at(0.0, 0.0, element_size);
}

double von_mises(double sx, double sy, double txy) {
  return std::sqrt(std::max(0.0, sx * sx - sx * sy + sy * sy + 3.0 * txy * txy));
}

std::vector<double> simp_modulus(std::span<const double> rho_filtered, const MaterialModel& mat,
                                 Exec exec) {
  std::vector<double> e(rho_filtered.size());
  const long long n = static_cast<long long>(e.size());
  const double dE = mat.E0 - mat.Emin;
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) e[i] = mat.Emin + std::pow(rho_filtered[i], mat.p) * dE;
  } else {
    for (long long i = 0; i < n; ++i) e[i] = mat.Emin + std::pow(rho_filtered[i], mat.p) * dE;
  }
  return e;
}

LinearSystem::LinearSystem(const StructuredGrid& grid, std::span<const std::int32_t> fixed_dofs,
                           double nu)
    : grid_(&grid) {
  ke_unit_ = element_stiffness_unit(grid.element_size, nu);

  const int n_dofs = 2 * grid.n_nodes();
  dof_index_.assign(n_dofs, 0);
  for (const int d : fixed_dofs) dof_index_[d] = -1;
  for (int d = 0; d < n_dofs; ++d)
    if (dof_index_[d] == 0) dof_index_[d] = n_free_++;
    else dof_index_[d] = -1;

  // Collect (row, col, cell, k-entry) tuples, then bucket them into CSR slots.
  struct Entry {
    std::int32_t row, col, cell, kidx;
  };
  std::vector<Entry> entries;
  entries.reserve(grid.conn.size() * 64);
  for (std::size_t e = 0; e < grid.conn.size(); ++e) {
    std::int32_t dofs[8];
    for (int a = 0; a < 4; ++a) {
      dofs[2 * a] = 2 * grid.conn[e][a];
      dofs[2 * a + 1] = 2 * grid.conn[e][a] + 1;
    }
    for (int i = 0; i < 8; ++i) {
      const int r = dof_index_[dofs[i]];
      if (r < 0) continue;
      for (int j = 0; j < 8; ++j) {
        const int c = dof_index_[dofs[j]];
        if (c < 0) continue;
        entries.push_back({r, c, static_cast<std::int32_t>(e),
                           static_cast<std::int32_t>(8 * i + j)});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.cell < b.cell;
  });

  K_.n = n_free_;
  K_.rowptr.assign(n_free_ + 1, 0);
  contribs_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].row == entries[i].row &&
           entries[j].col == entries[i].col)
      ++j;
    K_.col.push_back(entries[i].col);
    K_.rowptr[entries[i].row + 1]++;
    slot_begin_.push_back(static_cast<int>(contribs_.size()));
    for (std::size_t k = i; k < j; ++k) contribs_.push_back({entries[k].cell, entries[k].kidx});
    i = j;
  }
  slot_begin_.push_back(static_cast<int>(contribs_.size()));
  for (int r = 0; r < n_free_; ++r) K_.rowptr[r + 1] += K_.rowptr[r];
  K_.val.assign(K_.col.size(), 0.0);
}

void LinearSystem::assemble(std::span<const double> e_modulus, Exec exec) {
  const long long n_slots = static_cast<long long>(K_.col.size());
  auto body = [&](long long s) {
    double v = 0.0;
    for (int k = slot_begin_[s]; k < slot_begin_[s + 1]; ++k)
      v += e_modulus[contribs_[k].first] * ke_unit_[contribs_[k].second];
    K_.val[s] = v;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < n_slots; ++s) body(s);
  } else {
    for (long long s = 0; s < n_slots; ++s) body(s);
  }
}

std::vector<double> LinearSystem::load_vector(const BCSet& bc) const {
  std::vector<double> f(n_free_, 0.0);
  for (const auto& [dof, value] : bc.loads) {
    const int r = dof_index_[dof];
    if (r >= 0) f[r] += value;
  }
  return f;
}

std::vector<double> LinearSystem::restrict_to_free(std::span<const double> full) const {
  std::vector<double> out(n_free_, 0.0);
  for (std::size_t d = 0; d < dof_index_.size(); ++d)
    if (dof_index_[d] >= 0) out[dof_index_[d]] = full[d];
  return out;
}

std::vector<double> LinearSystem::expand(std::span<const double> u_free) const {
  std::vector<double> full(dof_index_.size(), 0.0);
  for (std::size_t d = 0; d < dof_index_.size(); ++d)
    if (dof_index_[d] >= 0) full[d] = u_free[dof_index_[d]];
  return full;
}

SolveReport pcg_solve(const Csr& K, std::span<const double> b, std::span<double> x, double tol,
                      int max_iter, Exec exec) {
  using namespace kernels;
  const int n = K.n;
  std::vector<double> inv_diag(n, 1.0);
  for (int r = 0; r < n; ++r)
    for (int k = K.rowptr[r]; k < K.rowptr[r + 1]; ++k)
      if (K.col[k] == r && K.val[k] != 0.0) inv_diag[r] = 1.0 / K.val[k];

  const double bnorm = std::sqrt(dot(b, b, exec));
  if (bnorm == 0.0) {
    fill(x, 0.0, exec);
    return {0, 0.0};
  }

  std::vector<double> r(n), z(n), p(n), Ap(n);
  spmv(K, x, Ap, exec);
  for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  hadamard(r, inv_diag, z, exec);
  copy(z, p, exec);
  double rz = dot(r, z, exec);
  double rnorm = std::sqrt(dot(r, r, exec));

  for (int it = 0; it < max_iter; ++it) {
    if (rnorm <= tol * bnorm) return {it, rnorm / bnorm};
    spmv(K, p, Ap, exec);
    const double pAp = dot(p, Ap, exec);
    if (!(pAp > 0))
      throw std::runtime_error("pcg_solve: matrix not positive definite (pAp = " +
                               std::to_string(pAp) + ")");
    const double alpha = rz / pAp;
    axpy(alpha, p, x, exec);
    axpy(-alpha, Ap, r, exec);
    rnorm = std::sqrt(dot(r, r, exec));
    hadamard(r, inv_diag, z, exec);
    const double rz_new = dot(r, z, exec);
    xpay(z, rz_new / rz, p, exec);
    rz = rz_new;
  }
  if (rnorm <= tol * bnorm) return {max_iter, rnorm / bnorm};
  throw std::runtime_error("pcg_solve: no convergence in " + std::to_string(max_iter) +
                           " iterations, relative residual " + std::to_string(rnorm / bnorm));
}

StressField element_stresses(const StructuredGrid& grid, std::span<const double> u_full,
                             double E0, double nu, Exec exec) {
  const auto D = constitutive(E0, nu);
  const auto B = centroid_b_matrix(grid.element_size);
  const long long ne = grid.n_active();
  StressField s;
  s.sx.resize(ne);
  s.sy.resize(ne);
  s.txy.resize(ne);
  s.vm.resize(ne);
  auto body = [&](long long e) {
    double ue[8];
    for (int a = 0; a < 4; ++a) {
      ue[2 * a] = u_full[2 * grid.conn[e][a]];
      ue[2 * a + 1] = u_full[2 * grid.conn[e][a] + 1];
    }
    double eps[3];
    for (int r = 0; r < 3; ++r) {
      double v = 0;
      for (int c = 0; c < 8; ++c) v += B[r * 8 + c] * ue[c];
      eps[r] = v;
    }
    const double sx = D[0] * eps[0] + D[1] * eps[1];
    const double sy = D[3] * eps[0] + D[4] * eps[1];
    const double txy = D[8] * eps[2];
    s.sx[e] = sx;
    s.sy[e] = sy;
    s.txy[e] = txy;
    s.vm[e] = von_mises(sx, sy, txy);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long e = 0; e < ne; ++e) body(e);
  } else {
    for (long long e = 0; e < ne; ++e) body(e);
  }
  return s;
}

}  // namespace mftd::fem
