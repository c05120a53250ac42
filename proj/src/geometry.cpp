#include "mftd/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mftd {

namespace {

// dim/element_size as an exact integer, or -1.
int exact_div(double dim, double element_size) {
  const double ratio = dim / element_size;
  const long long n = std::llround(ratio);
  if (n <= 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    return -1;
  return static_cast<int>(n);
}

}  // namespace

void LBracketGeometry::validate() const {
  if (!(outer_size > 0)) throw std::invalid_argument("geometry: outer_size must be positive");
  if (!(leg_width > 0 && leg_width <= outer_size))
    throw std::invalid_argument("geometry: leg_width must be in (0, outer_size]");
  if (!(load_strip_length > 0 && load_strip_length < outer_size))
    throw std::invalid_argument("geometry: load_strip_length must be in (0, outer_size)");
  if (!(nondesign_depth > 0 && nondesign_depth < leg_width))
    throw std::invalid_argument("geometry: nondesign_depth must be in (0, leg_width)");
}

double LBracketGeometry::area() const {
  const double notch = outer_size - leg_width;
  return outer_size * outer_size - notch * notch;
}

void MaterialModel::validate() const {
  if (!(Emin > 0 && Emin < E0)) throw std::invalid_argument("material: need 0 < Emin < E0");
  if (!(nu > 0 && nu < 0.5)) throw std::invalid_argument("material: need 0 < nu < 0.5");
  if (!(p >= 1)) throw std::invalid_argument("material: need p >= 1");
  if (!(q > 0 && q <= 1)) throw std::invalid_argument("material: need 0 < q <= 1");
}

std::pair<double, double> StructuredGrid::cell_center(int active_id) const {
  const int flat = active_cells[active_id];
  const int ix = flat % nx, iy = flat / nx;
  return {(ix + 0.5) * element_size, (iy + 0.5) * element_size};
}

std::pair<double, double> StructuredGrid::node_coord(int compact_id) const {
  const int flat = nodes[compact_id];
  const int ix = flat % (nx + 1), iy = flat / (nx + 1);
  return {ix * element_size, iy * element_size};
}

StructuredGrid build_lbracket(const LBracketGeometry& geom, double element_size) {
  geom.validate();
  if (!(element_size > 0)) throw std::invalid_argument("element_size must be positive");

  struct Dim {
    const char* name;
    double value;
  };
  const Dim dims[] = {{"outer_size", geom.outer_size},
                      {"leg_width", geom.leg_width},
                      {"load_strip_length", geom.load_strip_length},
                      {"nondesign_depth", geom.nondesign_depth}};
  for (const auto& d : dims) {
    if (exact_div(d.value, element_size) < 0)
      throw std::invalid_argument(std::string("element_size does not divide ") + d.name + " = " +
                                  std::to_string(d.value));
  }

  StructuredGrid g;
  g.geom = geom;
  g.element_size = element_size;
  g.nx = g.ny = exact_div(geom.outer_size, element_size);

  const double L = geom.outer_size, w = geom.leg_width;
  const double l = geom.load_strip_length, h = geom.nondesign_depth;

  g.cell_to_active.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const double cx = (ix + 0.5) * element_size;
      const double cy = (iy + 0.5) * element_size;
      const bool active = cx < w || cy < w;  // outside the open upper-right notch
      if (!active) continue;
      const int flat = ix + g.nx * iy;
      g.cell_to_active[flat] = static_cast<std::int32_t>(g.active_cells.size());
      g.active_cells.push_back(flat);
      const bool nondesign = cx > L - l && cy > w - h && cy < w;
      g.is_design.push_back(nondesign ? 0 : 1);
    }
  }

  g.active_to_design.assign(g.active_cells.size(), -1);
  for (std::size_t a = 0; a < g.active_cells.size(); ++a) {
    if (g.is_design[a]) {
      g.active_to_design[a] = static_cast<std::int32_t>(g.design_cells.size());
      g.design_cells.push_back(static_cast<std::int32_t>(a));
    }
  }

  const int nnx = g.nx + 1;
  g.node_index.assign(static_cast<std::size_t>(nnx) * (g.ny + 1), -1);
  auto touch = [&](int ix, int iy) {
    const int flat = ix + nnx * iy;
    if (g.node_index[flat] < 0) {
      g.node_index[flat] = static_cast<std::int32_t>(g.nodes.size());
      g.nodes.push_back(flat);
    }
    return g.node_index[flat];
  };
  g.conn.reserve(g.active_cells.size());
  for (const int flat : g.active_cells) {
    const int ix = flat % g.nx, iy = flat / g.nx;
    g.conn.push_back({touch(ix, iy), touch(ix + 1, iy), touch(ix + 1, iy + 1), touch(ix, iy + 1)});
  }
  return g;
}

BCSet boundary_conditions(const StructuredGrid& grid, double total_force) {
  BCSet bc;
  bc.total_force = total_force;
  const double L = grid.geom.outer_size, w = grid.geom.leg_width;
  const double l = grid.geom.load_strip_length;
  const double es = grid.element_size;
  const int nnx = grid.nx + 1;

  // Clamp y = L over the vertical leg (x in [0, w]).
  const int iy_top = grid.ny;
  const int ix_fix_end = static_cast<int>(std::llround(w / es));
  for (int ix = 0; ix <= ix_fix_end; ++ix) {
    const int ni = grid.node_index[ix + nnx * iy_top];
    if (ni < 0) continue;
    bc.fixed_dofs.push_back(2 * ni);
    bc.fixed_dofs.push_back(2 * ni + 1);
  }

  // Uniform downward traction on y = w, x in [L-l, L]: interior nodes carry a
  // full edge share, the two end nodes half each.
  const int iy_load = static_cast<int>(std::llround(w / es));
  const int ix_begin = static_cast<int>(std::llround((L - l) / es));
  const int ix_end = grid.nx;
  const int n_edges = ix_end - ix_begin;
  if (n_edges <= 0) throw std::invalid_argument("boundary_conditions: empty load edge set");
  const double per_edge = total_force / n_edges;
  for (int ix = ix_begin; ix <= ix_end; ++ix) {
    const int ni = grid.node_index[ix + nnx * iy_load];
    if (ni < 0) throw std::invalid_argument("boundary_conditions: load node missing from grid");
    const bool end = (ix == ix_begin || ix == ix_end);
    bc.loads.push_back({2 * ni + 1, -(end ? 0.5 : 1.0) * per_edge});
  }
  bc.load_node_count = ix_end - ix_begin + 1;
  return bc;
}

void pin_nondesign(const StructuredGrid& grid, std::span<double> rho) {
  for (std::size_t a = 0; a < grid.is_design.size(); ++a)
    if (!grid.is_design[a]) rho[a] = 1.0;
}

void validate_density(const StructuredGrid& grid, std::span<const double> rho, double tol) {
  if (rho.size() != grid.is_design.size())
    throw std::invalid_argument("density: wrong length");
  for (std::size_t a = 0; a < rho.size(); ++a) {
    if (!(rho[a] >= -tol && rho[a] <= 1.0 + tol))
      throw std::invalid_argument("density: value outside [0,1] at active cell " +
                                  std::to_string(a));
    if (!grid.is_design[a] && std::abs(rho[a] - 1.0) > tol)
      throw std::invalid_argument("density: non-design cell " + std::to_string(a) +
                                  " not pinned to 1");
  }
}

DensityField homogeneous_field(const StructuredGrid& grid, double value) {
  DensityField f;
  f.rho.assign(grid.n_active(), value);
  pin_nondesign(grid, f.rho);
  return f;
}

std::vector<double> design_to_active(const StructuredGrid& grid, std::span<const double> x) {
  std::vector<double> rho(grid.n_active(), 1.0);
  for (int d = 0; d < grid.n_design(); ++d) rho[grid.design_cells[d]] = x[d];
  return rho;
}

std::vector<double> active_to_design_vec(const StructuredGrid& grid, std::span<const double> rho) {
  std::vector<double> x(grid.n_design());
  for (int d = 0; d < grid.n_design(); ++d) x[d] = rho[grid.design_cells[d]];
  return x;
}

}  // namespace mftd
