#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mftd/contour.hpp"

namespace mftd {

// Conforming triangulation of the material region bounded by the contour
// loops. Constraint segments (split as needed) appear as boundary edges and
// keep their tags.
struct TriMesh {
  std::vector<double> px, py;
  std::vector<std::array<int, 3>> tris;  // CCW
  struct BoundaryEdge {
    int a = 0, b = 0;
    SegTag tag = SegTag::Interior;
  };
  std::vector<BoundaryEdge> boundary_edges;

  double area() const;
  double min_angle_deg() const;
  int node_count() const { return static_cast<int>(px.size()); }
  int tri_count() const { return static_cast<int>(tris.size()); }
};

// Constrained Delaunay triangulation with Ruppert-style refinement: boundary
// segments pre-split to the target edge length, encroached subsegments
// bisected, skinny or oversized interior triangles refined by circumcenter
// insertion. Quality target: minimum interior angle 15 degrees. Throws
// std::runtime_error on failure (degenerate input, refinement cap).
TriMesh triangulate(const ContourSet& contours, double target_edge_length);

}  // namespace mftd
