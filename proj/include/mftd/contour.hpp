#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mftd/geometry.hpp"

namespace mftd {

// 0/1 cell field over the active cells; non-design cells forced solid.
struct BinaryShape {
  std::vector<std::uint8_t> solid;  // per active cell
};

BinaryShape binarize(const StructuredGrid& grid, std::span<const double> rho, double threshold);

// True iff a 4-connected solid path joins the load-strip cells to the cells
// on the clamped top edge of the vertical leg.
bool check_connectivity(const StructuredGrid& grid, const BinaryShape& shape);

// Clears solid components that do not touch the clamped edge; they carry no
// load path and would make the stiffness singular. Returns the number of
// cells removed.
int prune_unanchored(const StructuredGrid& grid, BinaryShape& shape);

enum class SegTag : std::uint8_t { Interior, Outline, Dirichlet, Neumann };

// Closed polyline, material on the left (outer loops CCW, holes CW).
struct Contour {
  std::vector<double> x, y;
  std::vector<SegTag> tag;  // segment i runs pts[i] -> pts[(i+1) % size]
  double signed_area() const;
};

struct ContourSet {
  std::vector<Contour> loops;
  std::vector<std::string> warnings;
};

// Boundary of the solid set along cell faces. Saddle corners (diagonally
// touching solid cells) are resolved toward void connectivity and chamfered
// by element_size/4 so distinct loops never share a vertex. Faces on the
// domain outline are tagged (Dirichlet on the clamp edge, Neumann on the
// load strip, Outline elsewhere). Throws when the solid set is empty.
ContourSet extract_contours(const StructuredGrid& grid, const BinaryShape& shape);

// Damped Laplacian smoothing of untagged vertices: v += damping * (midpoint
// of neighbors - v). Vertices incident to a tagged segment stay put. If a
// pass introduces an intersection the damping is halved and the pass retried;
// throws when no damping level works.
ContourSet smooth_contours(const ContourSet& contours, int iterations, double damping = 0.5);

// Any segment pair (within or across loops) closer than exact touching.
bool contours_intersect(const ContourSet& contours);

// Drops loops with |area| below min_area into warnings. Holes inside a
// dropped loop are dropped with it.
ContourSet drop_slivers(const ContourSet& contours, double min_area);

}  // namespace mftd
