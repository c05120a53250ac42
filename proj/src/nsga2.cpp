#include "mftd/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mftd {

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  const bool le = a.sigma_max <= b.sigma_max && a.volume_fraction <= b.volume_fraction;
  const bool lt = a.sigma_max < b.sigma_max || a.volume_fraction < b.volume_fraction;
  return le && lt;
}

std::vector<std::vector<int>> non_dominated_sort(std::span<const ObjectivePoint> points) {
  const int n = static_cast<int>(points.size());
  std::vector<std::vector<int>> fronts;
  if (n == 0) return fronts;

  std::vector<int> domination_count(n, 0);
  std::vector<std::vector<int>> dominated_by(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominated_by[i].push_back(j);
        domination_count[j]++;
      } else if (dominates(points[j], points[i])) {
        dominated_by[j].push_back(i);
        domination_count[i]++;
      }
    }
  }
  std::vector<int> current;
  for (int i = 0; i < n; ++i)
    if (domination_count[i] == 0) current.push_back(i);
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<int> next;
    for (const int i : current)
      for (const int j : dominated_by[i])
        if (--domination_count[j] == 0) next.push_back(j);
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectivePoint> points,
                                      std::span<const int> front) {
  const int m = static_cast<int>(front.size());
  if (m == 0) throw std::invalid_argument("crowding_distance: empty front");
  std::vector<double> dist(m, 0.0);
  const double inf = std::numeric_limits<double>::infinity();
  if (m <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  auto objective = [&](int idx, int k) {
    return k == 0 ? points[front[idx]].sigma_max : points[front[idx]].volume_fraction;
  };
  std::vector<int> order(m);
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (objective(a, k) != objective(b, k)) return objective(a, k) < objective(b, k);
      return front[a] < front[b];
    });
    const double lo = objective(order.front(), k), hi = objective(order.back(), k);
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    if (!(hi > lo) || !std::isfinite(hi - lo)) continue;
    for (int i = 1; i + 1 < m; ++i)
      dist[order[i]] += (objective(order[i + 1], k) - objective(order[i - 1], k)) / (hi - lo);
  }
  return dist;
}

std::vector<int> select_elites(std::span<const ObjectivePoint> points, std::span<const int> ids,
                               int capacity) {
  if (capacity < 1) throw std::invalid_argument("select_elites: capacity must be >= 1");
  if (points.size() != ids.size())
    throw std::invalid_argument("select_elites: ids length mismatch");
  const int n = static_cast<int>(points.size());
  if (n <= capacity) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  const auto fronts = non_dominated_sort(points);
  std::vector<int> selected;
  selected.reserve(capacity);
  for (const auto& front : fronts) {
    if (static_cast<int>(selected.size() + front.size()) <= capacity) {
      selected.insert(selected.end(), front.begin(), front.end());
      if (static_cast<int>(selected.size()) == capacity) break;
      continue;
    }
    const auto dist = crowding_distance(points, front);
    std::vector<int> order(front.size());
    for (std::size_t i = 0; i < front.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (dist[a] != dist[b]) return dist[a] > dist[b];
      return ids[front[a]] < ids[front[b]];
    });
    const int need = capacity - static_cast<int>(selected.size());
    for (int i = 0; i < need; ++i) selected.push_back(front[order[i]]);
    break;
  }
  return selected;
}

double hypervolume_2d(std::span<const ObjectivePoint> front, const HypervolumeRef& ref) {
  // keep only valid points strictly dominating the reference
  std::vector<ObjectivePoint> pts;
  for (const auto& p : front)
    if (p.valid() && p.sigma_max < ref.sigma_max && p.volume_fraction < ref.volume_fraction)
      pts.push_back(p);
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const ObjectivePoint& a, const ObjectivePoint& b) {
    if (a.sigma_max != b.sigma_max) return a.sigma_max < b.sigma_max;
    return a.volume_fraction < b.volume_fraction;
  });
  // sweep the non-dominated staircase left to right
  double hv = 0.0;
  double best_v = std::numeric_limits<double>::infinity();
  std::vector<ObjectivePoint> stair;
  for (const auto& p : pts) {
    if (p.volume_fraction < best_v) {
      stair.push_back(p);
      best_v = p.volume_fraction;
    }
  }
  for (std::size_t i = 0; i < stair.size(); ++i) {
    const double right = (i + 1 < stair.size()) ? stair[i + 1].sigma_max : ref.sigma_max;
    hv += (right - stair[i].sigma_max) * (ref.volume_fraction - stair[i].volume_fraction);
  }
  return hv;
}

}  // namespace mftd
