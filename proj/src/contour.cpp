#include "mftd/contour.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace mftd {

namespace {

struct CellLookup {
  const StructuredGrid* grid;
  const BinaryShape* shape;

  bool solid(int ix, int iy) const {
    if (ix < 0 || ix >= grid->nx || iy < 0 || iy >= grid->ny) return false;
    const int a = grid->cell_to_active[ix + grid->nx * iy];
    return a >= 0 && (*shape).solid[a] != 0;
  }
  bool inside_domain(int ix, int iy) const {
    if (ix < 0 || ix >= grid->nx || iy < 0 || iy >= grid->ny) return false;
    return grid->cell_to_active[ix + grid->nx * iy] >= 0;
  }
};

}  // namespace

BinaryShape binarize(const StructuredGrid& grid, std::span<const double> rho, double threshold) {
  if (!(threshold > 0 && threshold < 1))
    throw std::invalid_argument("binarize: threshold must be in (0,1)");
  if (rho.size() != static_cast<std::size_t>(grid.n_active()))
    throw std::invalid_argument("binarize: density length mismatch");
  BinaryShape shape;
  shape.solid.resize(grid.n_active());
  for (int a = 0; a < grid.n_active(); ++a)
    shape.solid[a] = (!grid.is_design[a] || rho[a] >= threshold) ? 1 : 0;
  return shape;
}

bool check_connectivity(const StructuredGrid& grid, const BinaryShape& shape) {
  const CellLookup look{&grid, &shape};
  std::vector<std::uint8_t> visited(grid.n_active(), 0);
  std::queue<int> frontier;
  for (int a = 0; a < grid.n_active(); ++a) {
    if (!grid.is_design[a] && shape.solid[a]) {
      visited[a] = 1;
      frontier.push(a);
    }
  }
  if (frontier.empty()) return false;
  const int top_row = grid.ny - 1;
  while (!frontier.empty()) {
    const int a = frontier.front();
    frontier.pop();
    const int flat = grid.active_cells[a];
    const int ix = flat % grid.nx, iy = flat / grid.nx;
    if (iy == top_row) return true;
    const int nbr[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
    for (const auto& nb : nbr) {
      if (!look.solid(nb[0], nb[1])) continue;
      const int an = grid.cell_to_active[nb[0] + grid.nx * nb[1]];
      if (!visited[an]) {
        visited[an] = 1;
        frontier.push(an);
      }
    }
  }
  return false;
}

int prune_unanchored(const StructuredGrid& grid, BinaryShape& shape) {
  const CellLookup look{&grid, &shape};
  std::vector<std::uint8_t> keep(grid.n_active(), 0);
  std::queue<int> frontier;
  const int top_row = grid.ny - 1;
  for (int a = 0; a < grid.n_active(); ++a) {
    const int iy = grid.active_cells[a] / grid.nx;
    if (iy == top_row && shape.solid[a]) {
      keep[a] = 1;
      frontier.push(a);
    }
  }
  while (!frontier.empty()) {
    const int a = frontier.front();
    frontier.pop();
    const int flat = grid.active_cells[a];
    const int ix = flat % grid.nx, iy = flat / grid.nx;
    const int nbr[4][2] = {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}};
    for (const auto& nb : nbr) {
      if (!look.solid(nb[0], nb[1])) continue;
      const int an = grid.cell_to_active[nb[0] + grid.nx * nb[1]];
      if (!keep[an]) {
        keep[an] = 1;
        frontier.push(an);
      }
    }
  }
  int removed = 0;
  for (int a = 0; a < grid.n_active(); ++a) {
    if (shape.solid[a] && !keep[a]) {
      shape.solid[a] = 0;
      ++removed;
    }
  }
  return removed;
}

double Contour::signed_area() const {
  double acc = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    acc += x[i] * y[j] - x[j] * y[i];
  }
  return 0.5 * acc;
}

ContourSet extract_contours(const StructuredGrid& grid, const BinaryShape& shape) {
  const CellLookup look{&grid, &shape};
  const double es = grid.element_size;
  const int nnx = grid.nx + 1;
  const double L = grid.geom.outer_size, w = grid.geom.leg_width;
  const double strip_x0 = L - grid.geom.load_strip_length;

  bool any_solid = false;
  for (const auto s : shape.solid) any_solid |= (s != 0);
  if (!any_solid) throw std::runtime_error("extract_contours: empty solid set");

  // Directed boundary edges on lattice nodes, material on the left.
  struct Edge {
    int from, to;  // lattice node ids
    int dx, dy;    // direction
    SegTag tag;
  };
  std::vector<Edge> edges;
  auto node = [&](int ix, int iy) { return ix + nnx * iy; };

  auto outline_tag = [&](double fx0, double fy0, double fx1, double fy1) {
    // horizontal clamped edge at y = L
    if (fy0 == fy1 && std::abs(fy0 - L) < 1e-12) return SegTag::Dirichlet;
    // load strip top at y = w, x >= L - l
    if (fy0 == fy1 && std::abs(fy0 - w) < 1e-12 && std::min(fx0, fx1) >= strip_x0 - 1e-12)
      return SegTag::Neumann;
    return SegTag::Outline;
  };

  for (int a = 0; a < grid.n_active(); ++a) {
    if (!shape.solid[a]) continue;
    const int flat = grid.active_cells[a];
    const int ix = flat % grid.nx, iy = flat / grid.nx;
    const double x0 = ix * es, y0 = iy * es, x1 = x0 + es, y1 = y0 + es;

    if (!look.solid(ix, iy - 1)) {  // bottom face, heading +x
      const SegTag t =
          look.inside_domain(ix, iy - 1) ? SegTag::Interior : outline_tag(x0, y0, x1, y0);
      edges.push_back({node(ix, iy), node(ix + 1, iy), 1, 0, t});
    }
    if (!look.solid(ix + 1, iy)) {  // right face, heading +y
      const SegTag t =
          look.inside_domain(ix + 1, iy) ? SegTag::Interior : outline_tag(x1, y0, x1, y1);
      edges.push_back({node(ix + 1, iy), node(ix + 1, iy + 1), 0, 1, t});
    }
    if (!look.solid(ix, iy + 1)) {  // top face, heading -x
      const SegTag t =
          look.inside_domain(ix, iy + 1) ? SegTag::Interior : outline_tag(x1, y1, x0, y1);
      edges.push_back({node(ix + 1, iy + 1), node(ix, iy + 1), -1, 0, t});
    }
    if (!look.solid(ix - 1, iy)) {  // left face, heading -y
      const SegTag t =
          look.inside_domain(ix - 1, iy) ? SegTag::Interior : outline_tag(x0, y1, x0, y0);
      edges.push_back({node(ix, iy + 1), node(ix, iy), 0, -1, t});
    }
  }

  // Outgoing-edge map; nodes have one outgoing edge, saddles two.
  std::vector<std::vector<int>> outgoing(static_cast<std::size_t>(nnx) * (grid.ny + 1));
  for (std::size_t e = 0; e < edges.size(); ++e) outgoing[edges[e].from].push_back(static_cast<int>(e));

  // Unique successor: the leftmost turn keeps the trace on its own material
  // at ambiguous (diagonal-solid) corners, preferring void connectivity.
  auto successor = [&](int e) {
    const auto& cands = outgoing[edges[e].to];
    if (cands.size() == 1) return cands[0];
    int best = -1;
    int best_cross = -2;
    for (const int c : cands) {
      const int cross = edges[e].dx * edges[c].dy - edges[e].dy * edges[c].dx;
      if (cross > best_cross) {
        best_cross = cross;
        best = c;
      }
    }
    if (best < 0) throw std::runtime_error("extract_contours: open boundary chain");
    return best;
  };

  const double delta = es / 4.0;  // chamfer half-width at saddle corners
  ContourSet out;
  std::vector<std::uint8_t> used(edges.size(), 0);
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (used[start]) continue;
    Contour loop;
    int e = static_cast<int>(start);
    do {
      used[e] = 1;
      const Edge& cur = edges[e];
      const int nxt = successor(e);
      const double px = (cur.from % nnx) * es, py = (cur.from / nnx) * es;
      const bool from_saddle = outgoing[cur.from].size() > 1;
      if (from_saddle) {
        // vertex was already replaced by the chamfer of the previous edge;
        // emit the post-corner point on this edge instead
        loop.x.push_back(px + delta * cur.dx);
        loop.y.push_back(py + delta * cur.dy);
        loop.tag.push_back(cur.tag);
      } else {
        loop.x.push_back(px);
        loop.y.push_back(py);
        loop.tag.push_back(cur.tag);
      }
      const bool to_saddle = outgoing[cur.to].size() > 1;
      if (to_saddle) {
        // cut the corner: end this edge delta early and bridge to the
        // successor with an interior chamfer segment
        const double qx = (cur.to % nnx) * es, qy = (cur.to / nnx) * es;
        loop.x.push_back(qx - delta * cur.dx);
        loop.y.push_back(qy - delta * cur.dy);
        loop.tag.push_back(SegTag::Interior);
      }
      e = nxt;
    } while (e != static_cast<int>(start));
    out.loops.push_back(std::move(loop));
  }
  return out;
}

namespace {

bool on_segment(double px, double py, double qx, double qy, double rx, double ry) {
  return std::min(px, rx) <= qx && qx <= std::max(px, rx) && std::min(py, ry) <= qy &&
         qy <= std::max(py, ry);
}

int orientation(double px, double py, double qx, double qy, double rx, double ry) {
  const double v = (qy - py) * (rx - qx) - (qx - px) * (ry - qy);
  if (v == 0.0) return 0;
  return v > 0 ? 1 : 2;
}

bool segments_intersect(double p1x, double p1y, double q1x, double q1y, double p2x, double p2y,
                        double q2x, double q2y) {
  const int o1 = orientation(p1x, p1y, q1x, q1y, p2x, p2y);
  const int o2 = orientation(p1x, p1y, q1x, q1y, q2x, q2y);
  const int o3 = orientation(p2x, p2y, q2x, q2y, p1x, p1y);
  const int o4 = orientation(p2x, p2y, q2x, q2y, q1x, q1y);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1x, p1y, p2x, p2y, q1x, q1y)) return true;
  if (o2 == 0 && on_segment(p1x, p1y, q2x, q2y, q1x, q1y)) return true;
  if (o3 == 0 && on_segment(p2x, p2y, p1x, p1y, q2x, q2y)) return true;
  if (o4 == 0 && on_segment(p2x, p2y, q1x, q1y, q2x, q2y)) return true;
  return false;
}

}  // namespace

bool contours_intersect(const ContourSet& contours) {
  struct Seg {
    double ax, ay, bx, by;
    int loop;
    int index;
    int count;  // segments in its loop
  };
  std::vector<Seg> segs;
  for (std::size_t li = 0; li < contours.loops.size(); ++li) {
    const auto& c = contours.loops[li];
    const int n = static_cast<int>(c.x.size());
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      segs.push_back({c.x[i], c.y[i], c.x[j], c.y[j], static_cast<int>(li), i, n});
    }
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Seg& a = segs[i];
      const Seg& b = segs[j];
      if (a.loop == b.loop) {
        const int d = std::abs(a.index - b.index);
        if (d == 1 || d == a.count - 1) continue;  // consecutive, share a vertex
      }
      if (std::max(a.ax, a.bx) < std::min(b.ax, b.bx) ||
          std::max(b.ax, b.bx) < std::min(a.ax, a.bx) ||
          std::max(a.ay, a.by) < std::min(b.ay, b.by) ||
          std::max(b.ay, b.by) < std::min(a.ay, a.by))
        continue;
      if (segments_intersect(a.ax, a.ay, a.bx, a.by, b.ax, b.ay, b.bx, b.by)) return true;
    }
  }
  return false;
}

ContourSet smooth_contours(const ContourSet& contours, int iterations, double damping) {
  if (iterations < 0) throw std::invalid_argument("smooth_contours: negative iteration count");
  if (iterations == 0) return contours;

  for (int attempt = 0; attempt < 7; ++attempt) {
    ContourSet smoothed = contours;
    for (auto& loop : smoothed.loops) {
      const int n = static_cast<int>(loop.x.size());
      if (n < 3) continue;
      std::vector<std::uint8_t> mobile(n, 1);
      for (int i = 0; i < n; ++i) {
        const int prev = (i + n - 1) % n;
        if (loop.tag[prev] != SegTag::Interior || loop.tag[i] != SegTag::Interior) mobile[i] = 0;
      }
      std::vector<double> nx(n), ny(n);
      for (int it = 0; it < iterations; ++it) {
        for (int i = 0; i < n; ++i) {
          if (!mobile[i]) {
            nx[i] = loop.x[i];
            ny[i] = loop.y[i];
            continue;
          }
          const int a = (i + n - 1) % n, b = (i + 1) % n;
          nx[i] = loop.x[i] + damping * (0.5 * (loop.x[a] + loop.x[b]) - loop.x[i]);
          ny[i] = loop.y[i] + damping * (0.5 * (loop.y[a] + loop.y[b]) - loop.y[i]);
        }
        loop.x = nx;
        loop.y = ny;
      }
    }
    if (!contours_intersect(smoothed)) return smoothed;
    damping *= 0.5;
  }
  throw std::runtime_error("smooth_contours: smoothing keeps self-intersecting");
}

namespace {

bool point_in_loop(const Contour& loop, double px, double py) {
  bool inside = false;
  const std::size_t n = loop.x.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((loop.y[i] > py) != (loop.y[j] > py)) {
      const double t = (py - loop.y[i]) / (loop.y[j] - loop.y[i]);
      if (px < loop.x[i] + t * (loop.x[j] - loop.x[i])) inside = !inside;
    }
  }
  return inside;
}

}  // namespace

ContourSet drop_slivers(const ContourSet& contours, double min_area) {
  ContourSet out;
  out.warnings = contours.warnings;
  std::vector<double> areas;
  std::vector<char> keep(contours.loops.size(), 1);
  for (std::size_t i = 0; i < contours.loops.size(); ++i) {
    areas.push_back(contours.loops[i].signed_area());
    if (std::abs(areas.back()) < min_area) {
      keep[i] = 0;
      out.warnings.push_back("dropped sliver loop with area " + std::to_string(areas.back()));
    }
  }
  // a hole whose innermost containing outer loop was dropped goes with it
  for (std::size_t i = 0; i < contours.loops.size(); ++i) {
    if (!keep[i] || areas[i] >= 0) continue;
    const double px = contours.loops[i].x[0], py = contours.loops[i].y[0];
    int owner = -1;
    double owner_area = HUGE_VAL;
    for (std::size_t j = 0; j < contours.loops.size(); ++j) {
      if (areas[j] <= 0 || i == j) continue;
      if (point_in_loop(contours.loops[j], px, py) && areas[j] < owner_area) {
        owner = static_cast<int>(j);
        owner_area = areas[j];
      }
    }
    if (owner < 0 || !keep[owner]) {
      keep[i] = 0;
      out.warnings.push_back("dropped orphaned hole with area " + std::to_string(areas[i]));
    }
  }
  for (std::size_t i = 0; i < contours.loops.size(); ++i)
    if (keep[i]) out.loops.push_back(contours.loops[i]);
  return out;
}

}  // namespace mftd
