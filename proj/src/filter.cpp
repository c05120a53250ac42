#include "mftd/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace mftd {

FilterOperator::FilterOperator(const StructuredGrid& grid, double radius)
    : grid_(&grid), radius_(radius) {
  if (!(radius > 0)) throw std::invalid_argument("filter: radius must be positive");
  const double es = grid.element_size;
  const int reach = static_cast<int>(std::ceil(radius / es));
  const int n = grid.n_active();
  rowptr_.assign(n + 1, 0);
  for (int a = 0; a < n; ++a) {
    const int flat = grid.active_cells[a];
    const int ix = flat % grid.nx, iy = flat / grid.nx;
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx >= grid.nx || jy < 0 || jy >= grid.ny) continue;
        const int aj = grid.cell_to_active[jx + grid.nx * jy];
        if (aj < 0) continue;
        const double r = es * std::sqrt(double(dx) * dx + double(dy) * dy);
        if (r >= radius) continue;
        col_.push_back(aj);
        w_.push_back((radius - r) / radius);
        rowptr_[a + 1]++;
      }
    }
  }
  for (int a = 0; a < n; ++a) rowptr_[a + 1] += rowptr_[a];
  row_sum_.assign(n, 0.0);
  for (int a = 0; a < n; ++a) {
    double s = 0.0;
    for (int k = rowptr_[a]; k < rowptr_[a + 1]; ++k) s += w_[k];
    row_sum_[a] = s;
  }
}

void FilterOperator::apply(std::span<const double> rho, std::span<double> rho_tilde,
                           kernels::Exec exec, bool pin) const {
  const long long n = grid_->n_active();
  auto body = [&](long long a) {
    double s = 0.0;
    for (int k = rowptr_[a]; k < rowptr_[a + 1]; ++k) s += w_[k] * rho[col_[k]];
    rho_tilde[a] = s / row_sum_[a];
  };
  if (exec == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long a = 0; a < n; ++a) body(a);
  } else {
    for (long long a = 0; a < n; ++a) body(a);
  }
  if (pin) pin_nondesign(*grid_, rho_tilde);
}

void FilterOperator::apply_transpose(std::span<const double> g, std::span<double> out,
                                     kernels::Exec exec) const {
  const long long n = grid_->n_active();
  // Same CSR walk as apply: symmetry of the weight pattern gives
  // out_j = sum_{i in Omega_j} w_ji * (g_i / rowsum_i).
  auto body = [&](long long j) {
    double s = 0.0;
    for (int k = rowptr_[j]; k < rowptr_[j + 1]; ++k) {
      const int i = col_[k];
      s += w_[k] * (g[i] / row_sum_[i]);
    }
    out[j] = s;
  };
  if (exec == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < n; ++j) body(j);
  } else {
    for (long long j = 0; j < n; ++j) body(j);
  }
}

}  // namespace mftd
