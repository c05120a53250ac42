#include "mftd/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mftd {

double TriMesh::area() const {
  double acc = 0.0;
  for (const auto& t : tris) {
    const double ax = px[t[0]], ay = py[t[0]];
    const double bx = px[t[1]], by = py[t[1]];
    const double cx = px[t[2]], cy = py[t[2]];
    acc += 0.5 * ((bx - ax) * (cy - ay) - (cx - ax) * (by - ay));
  }
  return acc;
}

double TriMesh::min_angle_deg() const {
  double worst = 180.0;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3], c = t[(i + 2) % 3];
      const double ux = px[b] - px[a], uy = py[b] - py[a];
      const double vx = px[c] - px[a], vy = py[c] - py[a];
      const double dot = ux * vx + uy * vy;
      const double cross = ux * vy - uy * vx;
      worst = std::min(worst, std::atan2(std::abs(cross), dot) * 180.0 / M_PI);
    }
  }
  return worst;
}

namespace {

constexpr double kMinAngleDeg = 15.0;

struct Vec2 {
  double x, y;
};

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const long double v = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
                        (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
  return static_cast<double>(v);
}

// > 0 iff p strictly inside the circumcircle of CCW (a,b,c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const long double ax = a.x - p.x, ay = a.y - p.y;
  const long double bx = b.x - p.x, by = b.y - p.y;
  const long double cx = c.x - p.x, cy = c.y - p.y;
  const long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                          (bx * bx + by * by) * (ax * cy - cx * ay) +
                          (cx * cx + cy * cy) * (ax * by - bx * ay);
  return static_cast<double>(det);
}

std::uint64_t edge_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

struct Mesher {
  std::vector<Vec2> pts;
  struct Tri {
    int v[3];
    int adj[3];  // neighbor across the edge opposite vertex i
    bool alive = true;
    bool inside = false;
  };
  std::vector<Tri> tris;
  double target = 0.0;

  struct Seg {
    int a, b;
    SegTag tag;
    bool alive = true;
  };
  std::vector<Seg> segs;
  std::unordered_map<std::uint64_t, int> seg_index;  // live subsegments
  std::unordered_map<std::uint64_t, std::array<int, 2>> edge_tris;

  std::deque<int> tri_queue;
  std::deque<int> seg_queue;
  int inserted = 0;
  int insert_cap = 0;

  int add_point(const Vec2& p) {
    pts.push_back(p);
    return static_cast<int>(pts.size()) - 1;
  }

  void register_tri(int t) {
    for (int i = 0; i < 3; ++i) {
      const std::uint64_t k = edge_key(tris[t].v[(i + 1) % 3], tris[t].v[(i + 2) % 3]);
      auto& slot = edge_tris[k];
      if (edge_tris.count(k) == 0) slot = {-1, -1};
      auto it = edge_tris.find(k);
      if (it->second[0] < 0) it->second[0] = t;
      else it->second[1] = t;
    }
  }

  int make_tri(int a, int b, int c, bool inside) {
    Tri t;
    t.v[0] = a;
    t.v[1] = b;
    t.v[2] = c;
    t.adj[0] = t.adj[1] = t.adj[2] = -1;
    t.inside = inside;
    tris.push_back(t);
    return static_cast<int>(tris.size()) - 1;
  }

  int neighbor(int t, int i) const { return tris[t].adj[i]; }

  int edge_of(int t, int u, int v) const {
    for (int i = 0; i < 3; ++i) {
      const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
      if ((a == u && b == v) || (a == v && b == u)) return i;
    }
    return -1;
  }

  bool is_constrained(int u, int v) const { return seg_index.count(edge_key(u, v)) > 0; }

  // --- initial Delaunay (Bowyer-Watson over all boundary points) ---

  void build_initial(const std::vector<Vec2>& boundary_pts) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const auto& p : boundary_pts) {
      lo_x = std::min(lo_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_x = std::max(hi_x, p.x);
      hi_y = std::max(hi_y, p.y);
    }
    const double span = std::max(hi_x - lo_x, hi_y - lo_y) + 1.0;
    const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    add_point({cx - 20 * span, cy - 10 * span});
    add_point({cx + 20 * span, cy - 10 * span});
    add_point({cx, cy + 20 * span});
    make_tri(0, 1, 2, false);

    for (const auto& p : boundary_pts) insert_point(p, 0, false);
  }

  // Walks toward p; returns a triangle whose closure contains p. When
  // barrier_block is set the walk refuses to cross constrained edges and
  // reports the blocking segment through *blocked.
  int locate(const Vec2& p, int hint, bool barrier_block, int* blocked_u = nullptr,
             int* blocked_v = nullptr) {
    int t = hint;
    if (t < 0 || !tris[t].alive)
      for (int i = static_cast<int>(tris.size()) - 1; i >= 0; --i)
        if (tris[i].alive) {
          t = i;
          break;
        }
    for (int guard = 0; guard < 4 * static_cast<int>(tris.size()) + 16; ++guard) {
      int step = -1;
      double worst = -1e-300;
      for (int i = 0; i < 3; ++i) {
        const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
        const double o = orient2d(pts[a], pts[b], p);
        if (o < worst) {
          worst = o;
          step = i;
        }
      }
      if (step < 0) return t;
      const int a = tris[t].v[(step + 1) % 3], b = tris[t].v[(step + 2) % 3];
      if (barrier_block && is_constrained(a, b)) {
        if (blocked_u) *blocked_u = a;
        if (blocked_v) *blocked_v = b;
        return -1;
      }
      const int nb = tris[t].adj[step];
      if (nb < 0) return t;  // outside hull; best effort
      t = nb;
    }
    throw std::runtime_error("triangulate: point location failed");
  }

  // Bowyer-Watson cavity insertion. Returns new vertex id, or -1 if rejected
  // because the point would fall across/onto a constraint.
  int insert_point(const Vec2& p, int hint, bool respect_constraints) {
    int bu = -1, bv = -1;
    const int t0 = locate(p, hint, respect_constraints, &bu, &bv);
    if (t0 < 0) return -1;
    return insert_point_in(p, t0, respect_constraints);
  }

  int insert_point_in(const Vec2& p, int t0, bool respect_constraints) {
    // grow cavity by circumcircle membership, never crossing constraints
    std::vector<int> cavity;
    std::vector<std::uint8_t> in_cavity_mark;
    std::unordered_set<int> in_cavity;
    std::deque<int> work;
    work.push_back(t0);
    in_cavity.insert(t0);
    while (!work.empty()) {
      const int t = work.front();
      work.pop_front();
      cavity.push_back(t);
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[t].adj[i];
        if (nb < 0 || in_cavity.count(nb)) continue;
        const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
        if (respect_constraints && is_constrained(a, b)) continue;
        if (incircle(pts[tris[nb].v[0]], pts[tris[nb].v[1]], pts[tris[nb].v[2]], p) > 0) {
          in_cavity.insert(nb);
          work.push_back(nb);
        }
      }
    }
    return retriangulate_cavity(p, cavity, in_cavity, tris[t0].inside);
  }

  int retriangulate_cavity(const Vec2& p, const std::vector<int>& cavity,
                           const std::unordered_set<int>& in_cavity, bool inside_class) {
    struct BEdge {
      int a, b, outer;
    };
    std::vector<BEdge> boundary;
    for (const int t : cavity) {
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[t].adj[i];
        if (nb >= 0 && in_cavity.count(nb)) continue;
        boundary.push_back({tris[t].v[(i + 1) % 3], tris[t].v[(i + 2) % 3], nb});
      }
    }
    // reject degenerate fans (p collinear with a boundary edge)
    for (const auto& be : boundary)
      if (orient2d(pts[be.a], pts[be.b], p) <= 0) return -1;

    for (const int t : cavity) tris[t].alive = false;
    const int vp = add_point(p);
    std::unordered_map<int, int> fan_by_first;  // boundary edge a -> new tri
    std::vector<int> created;
    for (const auto& be : boundary) {
      const int nt = make_tri(vp, be.a, be.b, inside_class);
      created.push_back(nt);
      fan_by_first[be.a] = nt;
      // link across the old boundary edge
      tris[nt].adj[0] = be.outer;
      if (be.outer >= 0) {
        const int j = edge_of(be.outer, be.a, be.b);
        if (j >= 0) tris[be.outer].adj[j] = nt;
      }
    }
    // link fan neighbors: triangle (vp,a,b) meets (vp,b,c) across edge (vp,b)
    for (const int nt : created) {
      const int b = tris[nt].v[2];
      auto it = fan_by_first.find(b);
      if (it != fan_by_first.end()) {
        tris[nt].adj[1] = it->second;        // edge (b, vp) opposite vertex a
        tris[it->second].adj[2] = nt;        // edge (vp, b) opposite vertex c
      }
    }
    for (const int nt : created) tri_queue.push_back(nt);
    ++inserted;
    if (insert_cap > 0 && inserted > insert_cap)
      throw std::runtime_error("triangulate: refinement cap exceeded");
    return vp;
  }

  // --- constrained segment recovery ---

  int any_triangle_with_vertex(int v) const {
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (tris[t].alive && (tris[t].v[0] == v || tris[t].v[1] == v || tris[t].v[2] == v)) return t;
    return -1;
  }

  void recover_segment(int sa, int sb) {
    if (find_edge(sa, sb) >= 0) return;
    // collect the run of triangles whose interiors the open segment crosses
    const Vec2 A = pts[sa], B = pts[sb];
    int t = -1;
    {
      // triangle incident to sa whose opposite edge is crossed by sa->sb
      std::vector<int> ring = triangles_around(sa);
      for (const int cand : ring) {
        int ia = -1;
        for (int i = 0; i < 3; ++i)
          if (tris[cand].v[i] == sa) ia = i;
        const int u = tris[cand].v[(ia + 1) % 3], v = tris[cand].v[(ia + 2) % 3];
        const double ou = orient2d(A, B, pts[u]);
        const double ov = orient2d(A, B, pts[v]);
        if (ou > 0 && ov < 0) {
          t = cand;
          break;
        }
        if (ou == 0 || ov == 0)
          throw std::runtime_error("triangulate: vertex exactly on constrained segment");
      }
    }
    if (t < 0) throw std::runtime_error("triangulate: segment recovery lost the start");

    std::vector<int> corridor{t};
    std::vector<int> left_chain, right_chain;  // polygon walls
    {
      int ia = -1;
      for (int i = 0; i < 3; ++i)
        if (tris[t].v[i] == sa) ia = i;
      left_chain.push_back(tris[t].v[(ia + 1) % 3]);
      right_chain.push_back(tris[t].v[(ia + 2) % 3]);
    }
    int cur = t;
    while (true) {
      // step across the edge (left_chain.back(), right_chain.back())
      const int u = left_chain.back(), v = right_chain.back();
      const int j = edge_of(cur, u, v);
      const int nb = tris[cur].adj[j];
      if (nb < 0) throw std::runtime_error("triangulate: segment recovery hit the hull");
      if (is_constrained(u, v))
        throw std::runtime_error("triangulate: constrained segments cross");
      corridor.push_back(nb);
      int w = -1;
      for (int i = 0; i < 3; ++i)
        if (tris[nb].v[i] != u && tris[nb].v[i] != v) w = tris[nb].v[i];
      if (w == sb) break;
      const double o = orient2d(A, B, pts[w]);
      if (o == 0) throw std::runtime_error("triangulate: vertex exactly on constrained segment");
      if (o > 0) left_chain.push_back(w);
      else right_chain.push_back(w);
      cur = nb;
    }

    const bool inside_class = tris[corridor.front()].inside;
    for (const int tt : corridor) tris[tt].alive = false;
    // rebuild both pseudo-polygons against the new edge
    std::vector<int> lp{sa};
    lp.insert(lp.end(), left_chain.begin(), left_chain.end());
    lp.push_back(sb);
    std::vector<int> rp{sb};
    for (auto it = right_chain.rbegin(); it != right_chain.rend(); ++it) rp.push_back(*it);
    rp.push_back(sa);

    triangulate_pseudo(lp, inside_class);
    triangulate_pseudo(rp, inside_class);
    relink_all();  // corridor surgery touches many edges; rebuild adjacency
  }

  // Triangulates the pseudo-polygon (CCW, base edge last->first) by the
  // Delaunay vertex rule.
  void triangulate_pseudo(const std::vector<int>& poly, bool inside_class) {
    if (poly.size() < 3) return;
    if (poly.size() == 3) {
      make_tri(poly[0], poly[1], poly[2], inside_class);
      return;
    }
    const int a = poly.front(), b = poly.back();
    int best = 1;
    for (std::size_t i = 2; i + 1 < poly.size(); ++i) {
      if (incircle(pts[b], pts[a], pts[poly[best]], pts[poly[i]]) > 0)
        best = static_cast<int>(i);
    }
    make_tri(b, a, poly[best], inside_class);
    std::vector<int> lower(poly.begin(), poly.begin() + best + 1);
    std::vector<int> upper(poly.begin() + best, poly.end());
    triangulate_pseudo(lower, inside_class);
    triangulate_pseudo(upper, inside_class);
  }

  std::vector<int> triangles_around(int v) const {
    std::vector<int> out;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (tris[t].alive && (tris[t].v[0] == v || tris[t].v[1] == v || tris[t].v[2] == v))
        out.push_back(t);
    return out;
  }

  int find_edge(int u, int v) const {
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      if (edge_of(t, u, v) >= 0) return t;
    }
    return -1;
  }

  // Rebuilds adjacency from scratch (used after corridor surgery).
  void relink_all() {
    edge_tris.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      tris[t].adj[0] = tris[t].adj[1] = tris[t].adj[2] = -1;
    }
    std::unordered_map<std::uint64_t, std::pair<int, int>> first;  // key -> (tri, edge)
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      for (int i = 0; i < 3; ++i) {
        const std::uint64_t k = edge_key(tris[t].v[(i + 1) % 3], tris[t].v[(i + 2) % 3]);
        auto it = first.find(k);
        if (it == first.end()) {
          first[k] = {t, i};
        } else {
          tris[t].adj[i] = it->second.first;
          tris[it->second.first].adj[it->second.second] = t;
        }
      }
    }
  }

  // --- classification ---

  void classify() {
    for (auto& t : tris)
      if (t.alive) t.inside = false;
    std::vector<std::int8_t> mark(tris.size(), -1);  // -1 unknown, 0 outside, 1 inside
    std::deque<int> work;
    for (const auto& s : segs) {
      if (!s.alive) continue;
      // find both triangles adjacent to the edge; left of a->b is material
      for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        if (!tris[t].alive) continue;
        const int j = edge_of(t, s.a, s.b);
        if (j < 0) continue;
        int w = tris[t].v[j];
        const std::int8_t side = orient2d(pts[s.a], pts[s.b], pts[w]) > 0 ? 1 : 0;
        if (mark[t] < 0) {
          mark[t] = side;
          work.push_back(t);
        }
      }
    }
    while (!work.empty()) {
      const int t = work.front();
      work.pop_front();
      for (int i = 0; i < 3; ++i) {
        const int nb = tris[t].adj[i];
        if (nb < 0 || mark[nb] >= 0) continue;
        const int a = tris[t].v[(i + 1) % 3], b = tris[t].v[(i + 2) % 3];
        if (is_constrained(a, b)) continue;
        mark[nb] = mark[t];
        work.push_back(nb);
      }
    }
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (tris[t].alive) tris[t].inside = mark[t] == 1;
  }

  // --- refinement ---

  bool encroached(const Seg& s) const {
    // apex test on the (up to two) adjacent triangles
    const Vec2 A = pts[s.a], B = pts[s.b];
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      const int j = edge_of(t, s.a, s.b);
      if (j < 0) continue;
      const Vec2 W = pts[tris[t].v[j]];
      if ((W.x - A.x) * (W.x - B.x) + (W.y - A.y) * (W.y - B.y) < 0) return true;
    }
    return false;
  }

  void split_segment(int si) {
    if (!segs[si].alive) return;
    const int a = segs[si].a, b = segs[si].b;
    const Vec2 m{0.5 * (pts[a].x + pts[b].x), 0.5 * (pts[a].y + pts[b].y)};
    const int t = find_edge(a, b);
    if (t < 0) throw std::runtime_error("triangulate: lost constrained edge");

    segs[si].alive = false;
    seg_index.erase(edge_key(a, b));

    // insert the midpoint with a cavity that is allowed to eat the segment's
    // two adjacent triangles but nothing across other constraints
    const int vm = insert_point_in(m, t, /*respect_constraints=*/true);
    if (vm < 0) throw std::runtime_error("triangulate: segment split rejected");

    for (const int half : {0, 1}) {
      Seg child;
      child.a = half == 0 ? a : vm;
      child.b = half == 0 ? vm : b;
      child.tag = segs[si].tag;
      seg_index[edge_key(child.a, child.b)] = static_cast<int>(segs.size());
      seg_queue.push_back(static_cast<int>(segs.size()));
      segs.push_back(child);
    }
  }

  bool bad_triangle(int t) const {
    const Tri& tr = tris[t];
    const Vec2 A = pts[tr.v[0]], B = pts[tr.v[1]], C = pts[tr.v[2]];
    const double a2 = (C.x - B.x) * (C.x - B.x) + (C.y - B.y) * (C.y - B.y);
    const double b2 = (A.x - C.x) * (A.x - C.x) + (A.y - C.y) * (A.y - C.y);
    const double c2 = (B.x - A.x) * (B.x - A.x) + (B.y - A.y) * (B.y - A.y);
    const double area2 = std::abs(orient2d(A, B, C));  // 2*area
    if (area2 <= 0) return true;
    const double abc = std::sqrt(a2 * b2 * c2);
    const double R = abc / (2.0 * area2);
    if (R > 0.8 * target) return true;
    const double shortest = std::sqrt(std::min({a2, b2, c2}));
    return shortest / (2.0 * R) < std::sin(kMinAngleDeg * M_PI / 180.0);
  }

  Vec2 circumcenter(int t) const {
    const Vec2 A = pts[tris[t].v[0]], B = pts[tris[t].v[1]], C = pts[tris[t].v[2]];
    const double d = 2.0 * ((B.x - A.x) * (C.y - A.y) - (B.y - A.y) * (C.x - A.x));
    const double b2 = (B.x - A.x) * (B.x + A.x) + (B.y - A.y) * (B.y + A.y);
    const double c2 = (C.x - A.x) * (C.x + A.x) + (C.y - A.y) * (C.y + A.y);
    return {((C.y - A.y) * b2 - (B.y - A.y) * c2) / d,
            ((B.x - A.x) * c2 - (C.x - A.x) * b2) / d};
  }

  void refine() {
    for (int s = 0; s < static_cast<int>(segs.size()); ++s)
      if (segs[s].alive) seg_queue.push_back(s);
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (tris[t].alive && tris[t].inside) tri_queue.push_back(t);

    while (!seg_queue.empty() || !tri_queue.empty()) {
      if (!seg_queue.empty()) {
        const int s = seg_queue.front();
        seg_queue.pop_front();
        if (segs[s].alive && encroached(segs[s])) split_segment(s);
        continue;
      }
      const int t = tri_queue.front();
      tri_queue.pop_front();
      if (!tris[t].alive || !tris[t].inside || !bad_triangle(t)) continue;
      const Vec2 cc = circumcenter(t);
      int bu = -1, bv = -1;
      const int loc = locate(cc, t, /*barrier_block=*/true, &bu, &bv);
      if (loc < 0) {
        // circumcenter hides behind a constraint: split that segment instead
        auto it = seg_index.find(edge_key(bu, bv));
        if (it != seg_index.end()) {
          split_segment(it->second);
          tri_queue.push_back(t);
        }
        continue;
      }
      if (!tris[loc].inside) continue;  // ran out of the material region
      // Ruppert: a circumcenter encroaching a subsegment splits it instead
      std::vector<int> to_split;
      for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (!segs[s].alive) continue;
        const Vec2 A = pts[segs[s].a], B = pts[segs[s].b];
        if ((cc.x - A.x) * (cc.x - B.x) + (cc.y - A.y) * (cc.y - B.y) < 0) to_split.push_back(s);
      }
      if (!to_split.empty()) {
        for (const int s : to_split) split_segment(s);
        tri_queue.push_back(t);
        continue;
      }
      if (insert_point_in(cc, loc, /*respect_constraints=*/true) >= 0) tri_queue.push_back(t);
    }
  }
};

}  // namespace

TriMesh triangulate(const ContourSet& contours, double target_edge_length) {
  if (!(target_edge_length > 0))
    throw std::invalid_argument("triangulate: target edge length must be positive");
  if (contours.loops.empty()) throw std::runtime_error("triangulate: no contours");

  Mesher M;
  M.target = target_edge_length;

  // pre-split loop segments to the target length and collect constraints
  std::vector<Vec2> boundary_pts;
  struct RawSeg {
    Vec2 a, b;
    SegTag tag;
  };
  std::vector<RawSeg> raw;
  for (const auto& loop : contours.loops) {
    const std::size_t n = loop.x.size();
    if (n < 3) throw std::runtime_error("triangulate: degenerate loop");
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const Vec2 a{loop.x[i], loop.y[i]}, b{loop.x[j], loop.y[j]};
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / target_edge_length - 1e-12)));
      Vec2 prev = a;
      for (int k = 1; k <= pieces; ++k) {
        const double s = static_cast<double>(k) / pieces;
        const Vec2 next = (k == pieces) ? b : Vec2{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
        raw.push_back({prev, next, loop.tag[i]});
        prev = next;
      }
    }
  }

  // weld identical endpoints (loop closures) into vertex ids
  std::unordered_map<std::uint64_t, int> weld;
  auto key_of = [](const Vec2& p) {
    std::uint64_t hx, hy;
    static_assert(sizeof(double) == 8);
    std::memcpy(&hx, &p.x, 8);
    std::memcpy(&hy, &p.y, 8);
    return hx * 0x9e3779b97f4a7c15ULL ^ hy;
  };
  std::vector<Vec2> uniq;
  std::vector<std::array<int, 2>> seg_vertices;
  std::vector<SegTag> seg_tags;
  auto vid = [&](const Vec2& p) {
    const std::uint64_t k = key_of(p);
    auto it = weld.find(k);
    if (it != weld.end()) return it->second;
    const int id = static_cast<int>(uniq.size());
    weld[k] = id;
    uniq.push_back(p);
    return id;
  };
  for (const auto& rs : raw) {
    const int a = vid(rs.a), b = vid(rs.b);
    if (a == b) throw std::runtime_error("triangulate: zero-length constraint");
    seg_vertices.push_back({a, b});
    seg_tags.push_back(rs.tag);
  }

  M.insert_cap = 0;
  M.build_initial(uniq);

  // map welded ids to mesher ids (first 3 points are the super-triangle)
  // insertion order is identical, so the offset is fixed
  const int off = 3;
  for (std::size_t s = 0; s < seg_vertices.size(); ++s) {
    Mesher::Seg seg;
    seg.a = seg_vertices[s][0] + off;
    seg.b = seg_vertices[s][1] + off;
    seg.tag = seg_tags[s];
    M.seg_index[edge_key(seg.a, seg.b)] = static_cast<int>(M.segs.size());
    M.segs.push_back(seg);
  }
  for (const auto& s : M.segs) M.recover_segment(s.a, s.b);
  M.relink_all();
  M.classify();
  M.tri_queue.clear();
  M.seg_queue.clear();
  M.inserted = 0;
  M.insert_cap = 64 * static_cast<int>(uniq.size()) + 20000;
  M.refine();
  M.classify();

  // compact output
  TriMesh mesh;
  std::vector<int> remap(M.pts.size(), -1);
  for (int t = 0; t < static_cast<int>(M.tris.size()); ++t) {
    if (!M.tris[t].alive || !M.tris[t].inside) continue;
    std::array<int, 3> tv{};
    for (int i = 0; i < 3; ++i) {
      const int v = M.tris[t].v[i];
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(mesh.px.size());
        mesh.px.push_back(M.pts[v].x);
        mesh.py.push_back(M.pts[v].y);
      }
      tv[i] = remap[v];
    }
    mesh.tris.push_back(tv);
  }
  for (const auto& s : M.segs) {
    if (!s.alive) continue;
    if (remap[s.a] < 0 || remap[s.b] < 0) continue;  // segment of a dropped region
    mesh.boundary_edges.push_back({remap[s.a], remap[s.b], s.tag});
  }
  if (mesh.tris.empty()) throw std::runtime_error("triangulate: empty mesh");
  const double mina = mesh.min_angle_deg();
  if (mina < kMinAngleDeg - 1e-9)
    throw std::runtime_error("triangulate: quality target missed (min angle " +
                             std::to_string(mina) + " deg)");
  return mesh;
}

}  // namespace mftd
