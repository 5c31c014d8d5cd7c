#include "pemq/triangulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pemq/error.hpp"
#include "pemq/log.hpp"
#include "pemq/predicates.hpp"

namespace pemq {

void validate(const RefinementParams& params) {
  if (params.max_area && !(*params.max_area > 0.0 && std::isfinite(*params.max_area))) {
    throw ValidationError("max_area must be a positive number");
  }
  if (params.min_angle_deg && !(*params.min_angle_deg > 0.0 && *params.min_angle_deg <= 30.0)) {
    throw ValidationError("min_angle must lie in (0, 30] degrees");
  }
  if (params.vertex_budget < 4) throw ValidationError("vertex budget too small");
}

namespace {

namespace pr = predicates;

constexpr int kNone = -1;

inline int next3(int i) { return i == 2 ? 0 : i + 1; }
inline int prev3(int i) { return i == 0 ? 2 : i - 1; }

// Edge `i` of a triangle is the one opposite v[i]: (v[i+1], v[i+2]).
struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> n{kNone, kNone, kNone};
  std::array<bool, 3> c{false, false, false};
  bool alive = true;
};

using Edge = std::pair<int, int>;

Edge undirected(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

class Cdt {
 public:
  explicit Cdt(const RefinementParams& params) : params_(params) {
    add_vertex({0.0, 0.0}, true);
    add_vertex({1.0, 0.0}, true);
    add_vertex({1.0, 1.0}, true);
    add_vertex({0.0, 1.0}, true);
    const std::vector<std::array<int, 3>> init{{0, 1, 2}, {0, 2, 3}};
    replace({}, init);
    for (auto& t : tris_) {
      for (int i = 0; i < 3; ++i) {
        if (t.n[i] == kNone) t.c[i] = true;
      }
    }
    for (int s = 0; s < 4; ++s) owner_[undirected(s, (s + 1) % 4)] = -1;
  }

  void add_seeds(std::span<const Polygon2> placed) {
    for (const auto& p : placed) {
      std::vector<int> loop;
      for (const auto& q : p.vertices()) {
        const auto w = walk(hint_, q);
        if (w.blocked_tri != kNone) throw GeometryError("placed vertex outside the canvas");
        const int v = insert_point(q, w.tri, -1, nullptr);
        if (v == kNone) throw GeometryError("placed vertex coincides with an existing vertex");
        loop.push_back(v);
      }
      loops_.push_back(std::move(loop));
    }
    for (std::size_t s = 0; s < loops_.size(); ++s) {
      const auto& loop = loops_[s];
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const int a = loop[i], b = loop[(i + 1) % loop.size()];
        insert_segment(a, b);
        owner_[undirected(a, b)] = static_cast<int>(s);
      }
    }
    carve_holes();
  }

  void refine() {
    const double min_angle = params_.min_angle_deg ? *params_.min_angle_deg * std::numbers::pi / 180.0 : 0.0;
    min_angle_ = min_angle;
    if (min_angle_ <= 0.0 && !params_.max_area) return;
    refining_ = true;

    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      queue_encroached(t);
      queue_if_bad(t);
    }

    std::size_t skipped = 0;
    while (true) {
      if (!segments_.empty()) {
        const Edge e = segments_.front();
        segments_.pop_front();
        split_segment(e.first, e.second);
        continue;
      }
      if (bad_.empty()) break;
      const auto [t, verts] = bad_.front();
      bad_.pop_front();
      if (!tris_[t].alive || tris_[t].v != verts || !is_bad(t)) continue;
      if (!fix_triangle(t)) ++skipped;
    }
    if (skipped) logger().warn("{} triangles could not be refined further", skipped);
  }

  PolygonalMesh to_mesh() const {
    PolygonalMesh m;
    m.vertices = pts_;
    for (const auto& loop : loops_) {
      m.cells.emplace_back(loop.begin(), loop.end());
      m.tags.push_back(CellTag::seed_polygon);
    }
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      m.cells.push_back({static_cast<std::size_t>(t.v[0]), static_cast<std::size_t>(t.v[1]),
                         static_cast<std::size_t>(t.v[2])});
      m.tags.push_back(CellTag::filler_triangle);
    }
    return m;
  }

 private:
  struct WalkResult {
    int tri = kNone;
    int blocked_tri = kNone;
    int blocked_slot = -1;
  };

  const RefinementParams& params_;
  double min_angle_ = 0.0;
  bool refining_ = false;
  std::vector<Point2> pts_;
  std::vector<bool> input_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vert_tri_;
  std::vector<std::vector<int>> loops_;
  std::map<Edge, int> owner_;  // -1: canvas side, s >= 0: seed s
  std::deque<Edge> segments_;
  std::deque<std::pair<int, std::array<int, 3>>> bad_;
  int hint_ = 0;

  Point2 P(int v) const { return pts_[static_cast<std::size_t>(v)]; }

  int add_vertex(Point2 p, bool input) {
    if (pts_.size() >= params_.vertex_budget) {
      throw NumericalError("refinement exceeded the vertex budget of " + std::to_string(params_.vertex_budget) +
                           " vertices (" + std::to_string(live_triangles()) + " triangles, " +
                           std::to_string(bad_.size()) + " queued bad triangles, " +
                           std::to_string(segments_.size()) + " queued segments)");
    }
    pts_.push_back(p);
    input_.push_back(input);
    vert_tri_.push_back(kNone);
    return static_cast<int>(pts_.size()) - 1;
  }

  std::size_t live_triangles() const {
    return static_cast<std::size_t>(std::count_if(tris_.begin(), tris_.end(), [](const Tri& t) { return t.alive; }));
  }

  static int index_of(const Tri& t, int v) {
    for (int i = 0; i < 3; ++i) {
      if (t.v[i] == v) return i;
    }
    return -1;
  }

  // Replaces `removed` by `created` (CCW vertex triples), relinking
  // neighbours across the border and among the new triangles.
  std::vector<int> replace(const std::vector<int>& removed, const std::vector<std::array<int, 3>>& created) {
    struct Outside {
      int tri, slot;
      bool c;
    };
    std::vector<int> sorted = removed;
    std::sort(sorted.begin(), sorted.end());
    auto is_removed = [&](int t) { return std::binary_search(sorted.begin(), sorted.end(), t); };

    std::map<Edge, Outside> border;
    for (int r : removed) {
      const Tri& t = tris_[r];
      for (int i = 0; i < 3; ++i) {
        const int nb = t.n[i];
        if (nb != kNone && is_removed(nb)) continue;
        int slot = -1;
        if (nb != kNone) {
          for (int j = 0; j < 3; ++j) {
            if (tris_[nb].n[j] == r) slot = j;
          }
        }
        border[{t.v[next3(i)], t.v[prev3(i)]}] = {nb, slot, t.c[i]};
      }
    }
    for (int r : removed) {
      tris_[r].alive = false;
      free_.push_back(r);
    }

    std::vector<int> ids;
    ids.reserve(created.size());
    std::map<Edge, std::pair<int, int>> fresh;
    for (const auto& v : created) {
      int id;
      if (!free_.empty()) {
        id = free_.back();
        free_.pop_back();
        tris_[id] = Tri{};
      } else {
        id = static_cast<int>(tris_.size());
        tris_.emplace_back();
      }
      tris_[id].v = v;
      ids.push_back(id);
      for (int i = 0; i < 3; ++i) fresh[{v[next3(i)], v[prev3(i)]}] = {id, i};
      for (int x : v) vert_tri_[x] = id;
    }
    for (int id : ids) {
      Tri& t = tris_[id];
      for (int i = 0; i < 3; ++i) {
        const Edge e{t.v[next3(i)], t.v[prev3(i)]};
        if (auto it = border.find(e); it != border.end()) {
          t.n[i] = it->second.tri;
          t.c[i] = it->second.c;
          if (it->second.tri != kNone) tris_[it->second.tri].n[it->second.slot] = id;
        } else if (auto jt = fresh.find({e.second, e.first}); jt != fresh.end()) {
          t.n[i] = jt->second.first;
        }
      }
    }
    if (!ids.empty()) hint_ = ids.back();
    return ids;
  }

  std::vector<int> incident(int v) const {
    std::vector<int> out;
    std::vector<int> stack{vert_tri_[v]};
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      if (t == kNone || std::find(out.begin(), out.end(), t) != out.end()) continue;
      out.push_back(t);
      const Tri& T = tris_[t];
      const int i = index_of(T, v);
      stack.push_back(T.n[next3(i)]);
      stack.push_back(T.n[prev3(i)]);
    }
    return out;
  }

  // Straight-line walk from triangle `start` towards q. Stops inside the
  // triangle containing q, or at the first constrained edge in the way.
  WalkResult walk(int start, Point2 q) const {
    const Tri& s = tris_[start];
    const Point2 origin{(P(s.v[0]).x + P(s.v[1]).x + P(s.v[2]).x) / 3.0,
                        (P(s.v[0]).y + P(s.v[1]).y + P(s.v[2]).y) / 3.0};
    int t = start;
    const std::size_t limit = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& T = tris_[t];
      int exit = -1, fallback = -1;
      for (int i = 0; i < 3; ++i) {
        const Point2 a = P(T.v[next3(i)]), b = P(T.v[prev3(i)]);
        if (pr::orient(a, b, q) >= 0) continue;
        if (fallback < 0) fallback = i;
        if (pr::segments_intersect(origin, q, a, b)) {
          exit = i;
          break;
        }
      }
      if (fallback < 0) return {t};
      if (exit < 0) exit = fallback;
      if (T.n[exit] == kNone || T.c[exit]) return {t, t, exit};
      t = T.n[exit];
    }
    // Cycling should not happen; scan as a last resort.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
      const Tri& T = tris_[i];
      if (!T.alive) continue;
      if (pr::orient(P(T.v[0]), P(T.v[1]), q) >= 0 && pr::orient(P(T.v[1]), P(T.v[2]), q) >= 0 &&
          pr::orient(P(T.v[2]), P(T.v[0]), q) >= 0) {
        return {i};
      }
    }
    return {start, start, 0};
  }

  // Bowyer-Watson insertion of p, found in triangle `tri`. `split_slot` names
  // the boundary edge of `tri` that p splits (or -1). When `encroached` is
  // non-null, the insertion is abandoned if p lies in the diametral circle of
  // a constrained edge of the cavity; those edges are reported instead.
  int insert_point(Point2 p, int tri, int split_slot, std::vector<Edge>* encroached) {
    const Tri& T0 = tris_[tri];
    for (int x : T0.v) {
      if (P(x) == p) return kNone;
    }
    std::vector<int> cavity{tri};
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const Tri& T = tris_[cavity[k]];
      for (int i = 0; i < 3; ++i) {
        const int nb = T.n[i];
        if (nb == kNone || T.c[i]) continue;
        if (std::find(cavity.begin(), cavity.end(), nb) != cavity.end()) continue;
        const Tri& N = tris_[nb];
        if (pr::incircle(P(N.v[0]), P(N.v[1]), P(N.v[2]), p) > 0) cavity.push_back(nb);
      }
    }

    std::vector<std::array<int, 3>> fan;
    std::vector<Edge> hits;
    bool valid = true;
    for (int t : cavity) {
      const Tri& T = tris_[t];
      for (int i = 0; i < 3; ++i) {
        const int nb = T.n[i];
        const bool border = nb == kNone || T.c[i] || std::find(cavity.begin(), cavity.end(), nb) == cavity.end();
        if (!border) continue;
        if (t == tri && i == split_slot) continue;
        const int u = T.v[next3(i)], w = T.v[prev3(i)];
        if (encroached && T.c[i] && dot(P(u) - p, P(w) - p) < 0.0) hits.push_back({u, w});
        if (pr::orient(p, P(u), P(w)) <= 0) valid = false;
        fan.push_back({kNone, u, w});
      }
    }
    if (encroached && !hits.empty()) {
      *encroached = std::move(hits);
      return kNone;
    }
    if (!valid) return kNone;

    const int v = add_vertex(p, false);
    for (auto& f : fan) f[0] = v;
    const auto ids = replace(cavity, fan);
    for (int id : ids) {
      Tri& t = tris_[id];
      for (int i = 0; i < 3; ++i) {
        if (t.n[i] == kNone) t.c[i] = true;
      }
    }
    if (refining_) {
      for (int id : ids) {
        queue_encroached(id);
        queue_if_bad(id);
      }
    }
    return v;
  }

  void insert_segment(int a, int b) {
    for (int t : incident(a)) {
      Tri& T = tris_[t];
      const int ib = index_of(T, b);
      if (ib < 0) continue;
      const int ia = index_of(T, a);
      const int slot = 3 - ia - ib;
      T.c[slot] = true;
      if (T.n[slot] != kNone) {
        Tri& N = tris_[T.n[slot]];
        for (int j = 0; j < 3; ++j) {
          if (N.n[j] == t) N.c[j] = true;
        }
      }
      return;
    }

    const Point2 pa = P(a), pb = P(b);
    int start = kNone, left = kNone, right = kNone, slot = -1;
    for (int t : incident(a)) {
      const Tri& T = tris_[t];
      const int i = index_of(T, a);
      const int u = T.v[next3(i)], w = T.v[prev3(i)];
      const int ou = pr::orient(pa, pb, P(u)), ow = pr::orient(pa, pb, P(w));
      if ((ou == 0 && dot(P(u) - pa, pb - pa) > 0.0) || (ow == 0 && dot(P(w) - pa, pb - pa) > 0.0)) {
        throw GeometryError("placed polygon edge passes through another vertex");
      }
      if (ou < 0 && ow > 0) {
        start = t;
        right = u;
        left = w;
        slot = i;
        break;
      }
    }
    if (start == kNone) throw GeometryError("could not trace placed polygon edge");

    std::vector<int> crossed{start};
    std::vector<int> lchain{left}, rchain{right};
    int cur = start;
    while (true) {
      const Tri& C = tris_[cur];
      if (C.c[slot] || C.n[slot] == kNone) throw GeometryError("placed polygon edges intersect");
      const int nt = C.n[slot];
      crossed.push_back(nt);
      const Tri& N = tris_[nt];
      int j = 0;
      while (N.n[j] != cur) ++j;
      const int x = N.v[j];
      if (x == b) break;
      const int o = pr::orient(pa, pb, P(x));
      if (o == 0) throw GeometryError("placed polygon edge passes through another vertex");
      if (o > 0) {
        slot = index_of(N, left);
        left = x;
        lchain.push_back(x);
      } else {
        slot = index_of(N, right);
        right = x;
        rchain.push_back(x);
      }
      cur = nt;
    }

    std::vector<std::array<int, 3>> created;
    fill_pseudo_polygon(a, b, lchain, created);
    std::reverse(rchain.begin(), rchain.end());
    fill_pseudo_polygon(b, a, rchain, created);
    replace(crossed, created);
    insert_segment(a, b);  // marks the now-existing edge
  }

  // Delaunay triangulation of the region left of p->q bounded by `chain`
  // (ordered from the p side to the q side).
  void fill_pseudo_polygon(int p, int q, std::span<const int> chain, std::vector<std::array<int, 3>>& out) const {
    if (chain.empty()) return;
    std::size_t ci = 0;
    for (std::size_t k = 1; k < chain.size(); ++k) {
      if (pr::incircle(P(p), P(q), P(chain[ci]), P(chain[k])) > 0) ci = k;
    }
    out.push_back({p, q, chain[ci]});
    fill_pseudo_polygon(p, chain[ci], chain.subspan(0, ci), out);
    fill_pseudo_polygon(chain[ci], q, chain.subspan(ci + 1), out);
  }

  void carve_holes() {
    std::vector<int> doomed;
    std::vector<bool> mark(tris_.size(), false);
    for (const auto& loop : loops_) {
      const int v0 = loop[0], v1 = loop[1];
      int seed = kNone;
      for (int t : incident(v0)) {
        const Tri& T = tris_[t];
        const int i = index_of(T, v0);
        if (T.v[next3(i)] == v1) seed = t;
      }
      if (seed == kNone) throw GeometryError("placed polygon boundary was not recovered");
      std::vector<int> stack{seed};
      while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        if (mark[t]) continue;
        mark[t] = true;
        doomed.push_back(t);
        for (int i = 0; i < 3; ++i) {
          if (!tris_[t].c[i] && tris_[t].n[i] != kNone) stack.push_back(tris_[t].n[i]);
        }
      }
    }
    for (int t : doomed) {
      for (int i = 0; i < 3; ++i) {
        const int nb = tris_[t].n[i];
        if (nb == kNone || mark[nb]) continue;
        for (int j = 0; j < 3; ++j) {
          if (tris_[nb].n[j] == t) tris_[nb].n[j] = kNone;
        }
      }
      tris_[t].alive = false;
      free_.push_back(t);
    }
    std::sort(free_.begin(), free_.end(), std::greater<>());
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      for (int x : tris_[t].v) vert_tri_[x] = t;
      hint_ = t;
    }
  }

  // -- refinement -----------------------------------------------------------

  double area(const Tri& t) const { return 0.5 * cross(P(t.v[1]) - P(t.v[0]), P(t.v[2]) - P(t.v[0])); }

  bool is_bad(int id) const {
    const Tri& t = tris_[id];
    if (params_.max_area && area(t) > *params_.max_area) return true;
    if (min_angle_ <= 0.0) return false;
    for (int i = 0; i < 3; ++i) {
      const double a = corner_angle(P(t.v[prev3(i)]), P(t.v[i]), P(t.v[next3(i)]));
      if (a >= min_angle_) continue;
      // A corner between two segments cannot be improved by refinement.
      if (t.c[next3(i)] && t.c[prev3(i)]) continue;
      return true;
    }
    return false;
  }

  void queue_if_bad(int id) {
    if (is_bad(id)) bad_.push_back({id, tris_[id].v});
  }

  void queue_encroached(int id) {
    const Tri& t = tris_[id];
    for (int i = 0; i < 3; ++i) {
      if (!t.c[i]) continue;
      const int u = t.v[next3(i)], w = t.v[prev3(i)];
      if (dot(P(u) - P(t.v[i]), P(w) - P(t.v[i])) < 0.0) segments_.push_back({u, w});
    }
  }

  Point2 split_point(int a, int b) const {
    const Point2 pa = P(a), pb = P(b);
    const double len = distance(pa, pb);
    double t = 0.5;
    if (input_[a] != input_[b]) {
      // Concentric shells around input vertices keep small input angles from
      // cascading into ever shorter segments.
      const double d = std::exp2(std::round(std::log2(0.5 * len)));
      if (d > 0.25 * len && d < 0.75 * len) t = input_[a] ? d / len : 1.0 - d / len;
    }
    return {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
  }

  bool split_segment(int a, int b) {
    int tri = kNone, slot = -1;
    for (int t : incident(a)) {
      const Tri& T = tris_[t];
      const int ib = index_of(T, b);
      if (ib < 0) continue;
      const int s = 3 - index_of(T, a) - ib;
      if (T.c[s]) {
        tri = t;
        slot = s;
      }
    }
    if (tri == kNone) return false;  // already split
    const auto it = owner_.find(undirected(a, b));
    const int owner = it == owner_.end() ? -1 : it->second;
    const Point2 m = split_point(a, b);
    const int v = insert_point(m, tri, slot, nullptr);
    if (v == kNone) {
      logger().debug("segment ({}, {}) could not be split", a, b);
      return false;
    }
    owner_.erase(undirected(a, b));
    owner_[undirected(a, v)] = owner;
    owner_[undirected(v, b)] = owner;
    if (owner >= 0) {
      auto& loop = loops_[static_cast<std::size_t>(owner)];
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const int x = loop[i], y = loop[(i + 1) % loop.size()];
        if ((x == a && y == b) || (x == b && y == a)) {
          loop.insert(loop.begin() + static_cast<std::ptrdiff_t>(i) + 1, v);
          break;
        }
      }
    }
    return true;
  }

  Point2 circumcenter(const Tri& t) const {
    const Point2 a = P(t.v[0]);
    const Point2 b = P(t.v[1]) - a, c = P(t.v[2]) - a;
    const double d = 2.0 * cross(b, c);
    const double b2 = dot(b, b), c2 = dot(c, c);
    return {a.x + (c.y * b2 - b.y * c2) / d, a.y + (b.x * c2 - c.x * b2) / d};
  }

  bool fix_triangle(int id) {
    const Tri t = tris_[id];
    const Point2 cc = circumcenter(t);
    if (!std::isfinite(cc.x) || !std::isfinite(cc.y)) return false;
    const auto w = walk(id, cc);
    if (w.blocked_tri != kNone) {
      const Tri& B = tris_[w.blocked_tri];
      if (!split_segment(B.v[next3(w.blocked_slot)], B.v[prev3(w.blocked_slot)])) return false;
      requeue(id, t.v);
      return true;
    }
    std::vector<Edge> hits;
    const int v = insert_point(cc, w.tri, -1, &hits);
    if (v != kNone) return true;
    bool split = false;
    for (const auto& e : hits) split = split_segment(e.first, e.second) || split;
    if (!split) return false;
    requeue(id, t.v);
    return true;
  }

  void requeue(int id, const std::array<int, 3>& verts) {
    if (tris_[id].alive && tris_[id].v == verts) bad_.push_back({id, verts});
  }
};

void check_placement(std::span<const Polygon2> placed) {
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (const auto& q : placed[i].vertices()) {
      if (!(q.x > 0.0 && q.x < 1.0 && q.y > 0.0 && q.y < 1.0)) {
        throw GeometryError("polygon " + std::to_string(i) + " is outside canvas");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (polygons_intersect(placed[i], placed[j])) {
        throw GeometryError("polygon " + std::to_string(i) + " overlaps polygon " + std::to_string(j));
      }
    }
  }
}

}  // namespace

PolygonalMesh triangulate_exterior(std::span<const Polygon2> placed, const RefinementParams& params) {
  validate(params);
  check_placement(placed);
  Cdt cdt(params);
  cdt.add_seeds(placed);
  cdt.refine();
  return cdt.to_mesh();
}

}  // namespace pemq
