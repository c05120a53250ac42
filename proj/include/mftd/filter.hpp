#pragma once

#include <span>
#include <vector>

#include "mftd/geometry.hpp"
#include "mftd/kernels.hpp"

namespace mftd {

// Linear hat-weight density filter over active cells: weights (r0 - r)/r0 for
// center distances r < r0, normalized per row. The weight pattern is
// symmetric, which apply_transpose exploits for the sensitivity chain rule.
class FilterOperator {
 public:
  FilterOperator(const StructuredGrid& grid, double radius);

  // rho_tilde_i = sum_j w_ij rho_j / sum_j w_ij; non-design cells re-pinned
  // to 1 afterwards unless pin == false.
  void apply(std::span<const double> rho, std::span<double> rho_tilde,
             kernels::Exec exec = kernels::Exec::Parallel, bool pin = true) const;

  // out_j = sum_i (g_i / rowsum_i) w_ij; the caller zeroes entries of g whose
  // filtered value is pinned.
  void apply_transpose(std::span<const double> g, std::span<double> out,
                       kernels::Exec exec = kernels::Exec::Parallel) const;

  double radius() const { return radius_; }
  int neighbor_count(int active_id) const {
    return rowptr_[active_id + 1] - rowptr_[active_id];
  }

 private:
  const StructuredGrid* grid_;
  double radius_;
  std::vector<int> rowptr_;
  std::vector<int> col_;
  std::vector<double> w_;
  std::vector<double> row_sum_;
};

}  // namespace mftd
