#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mftd {

// L-shaped bracket: the outer_size x outer_size square minus the open
// upper-right (outer_size - leg_width)^2 square. The load is carried by a
// frozen strip of depth nondesign_depth under the top edge of the horizontal
// leg, over the rightmost load_strip_length.
struct LBracketGeometry {
  double outer_size = 2.0;
  double leg_width = 0.8;
  double load_strip_length = 0.2;
  double nondesign_depth = 0.04;

  void validate() const;
  double area() const;  // L^2 - (L-w)^2
};

struct MaterialModel {
  double E0 = 1.0;
  double Emin = 1e-9;
  double nu = 0.3;
  double p = 3.0;   // stiffness penalization
  double q = 0.5;   // stress relaxation exponent

  void validate() const;
};

// Structured quad discretization of the bracket's bounding square. Cells
// inside the L-shape are "active"; active cells outside the frozen load strip
// are "design". Immutable after construction.
struct StructuredGrid {
  LBracketGeometry geom;
  double element_size = 0.0;
  int nx = 0, ny = 0;  // cells across the bounding square

  std::vector<std::int32_t> cell_to_active;  // nx*ny, -1 outside the L
  std::vector<std::int32_t> active_cells;    // active id -> ix + nx*iy
  std::vector<std::uint8_t> is_design;       // per active id
  std::vector<std::int32_t> design_cells;    // design id -> active id
  std::vector<std::int32_t> active_to_design;  // -1 for non-design

  // Compact node numbering over nodes touched by at least one active cell.
  std::vector<std::int32_t> node_index;  // (nx+1)*(ny+1) -> compact id or -1
  std::vector<std::int32_t> nodes;       // compact id -> ix + (nx+1)*iy
  std::vector<std::array<std::int32_t, 4>> conn;  // per active cell: n00,n10,n11,n01

  int n_active() const { return static_cast<int>(active_cells.size()); }
  int n_design() const { return static_cast<int>(design_cells.size()); }
  int n_nodes() const { return static_cast<int>(nodes.size()); }

  std::pair<double, double> cell_center(int active_id) const;
  std::pair<double, double> node_coord(int compact_id) const;
  double cell_area() const { return element_size * element_size; }
};

// Throws std::invalid_argument naming the offending dimension when
// element_size does not divide it.
StructuredGrid build_lbracket(const LBracketGeometry& geom, double element_size);

// Dirichlet/Neumann data on the structured grid, in compact node ids.
struct BCSet {
  std::vector<std::int32_t> fixed_dofs;               // 2*node + comp
  std::vector<std::pair<std::int32_t, double>> loads; // (2*node + comp, value)
  int load_node_count = 0;
  double total_force = 1.0;
};

// Clamps the top edge of the vertical leg and applies a uniform downward
// traction (total F) along the top of the non-design strip, consistently
// lumped to nodes. Throws if the load node set is empty.
BCSet boundary_conditions(const StructuredGrid& grid, double total_force = 1.0);

// Per-element pseudo-densities over the active cells; non-design entries are
// pinned to one.
struct DensityField {
  std::vector<double> rho;
};

void pin_nondesign(const StructuredGrid& grid, std::span<double> rho);
// Throws when a value leaves [0,1] or a non-design cell was modified.
void validate_density(const StructuredGrid& grid, std::span<const double> rho,
                      double tol = 1e-12);

DensityField homogeneous_field(const StructuredGrid& grid, double value);

// Expands a design-cell vector into a full active vector (non-design = 1).
std::vector<double> design_to_active(const StructuredGrid& grid, std::span<const double> x);
std::vector<double> active_to_design_vec(const StructuredGrid& grid, std::span<const double> rho);

}  // namespace mftd
