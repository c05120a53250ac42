#pragma once

#include <limits>
#include <span>
#include <vector>

namespace mftd {

// Bi-objective point (both minimized). Invalid candidates carry +inf in both
// components so they sink to the last front.
struct ObjectivePoint {
  double sigma_max = std::numeric_limits<double>::infinity();
  double volume_fraction = std::numeric_limits<double>::infinity();

  bool valid() const {
    return sigma_max < std::numeric_limits<double>::infinity() &&
           volume_fraction < std::numeric_limits<double>::infinity();
  }
};

// a dominates b: <= in both, < in at least one.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

// Fast non-dominated sort; fronts hold indices into points.
std::vector<std::vector<int>> non_dominated_sort(std::span<const ObjectivePoint> points);

// Crowding distances for one front (indices into points). Boundary points in
// each objective get +inf, interior points normalized neighbor-gap sums.
std::vector<double> crowding_distance(std::span<const ObjectivePoint> points,
                                      std::span<const int> front);

// NSGA-II truncation: fill by ascending rank, split the boundary front by
// descending crowding distance, ties broken by ascending id. ids are external
// labels parallel to points and are used only for tie-breaking.
std::vector<int> select_elites(std::span<const ObjectivePoint> points,
                               std::span<const int> ids, int capacity);

struct HypervolumeRef {
  double sigma_max = 0;
  double volume_fraction = 0;
};

// Dominated area between the non-dominated subset of front and the reference
// point; points not strictly dominating the reference contribute nothing.
double hypervolume_2d(std::span<const ObjectivePoint> front, const HypervolumeRef& ref);

}  // namespace mftd
