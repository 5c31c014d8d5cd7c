#include "pemq/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numbers>
#include <queue>
#include <random>

#include "pemq/error.hpp"
#include "pemq/log.hpp"
#include "pemq/predicates.hpp"

namespace pemq {

namespace pr = predicates;

Point2::Point2(double x_, double y_) : x(x_), y(y_) {
  if (!std::isfinite(x_) || !std::isfinite(y_)) {
    throw GeometryError("non-finite coordinate");
  }
}

double corner_angle(Point2 prev, Point2 cur, Point2 next) {
  const Point2 to_prev = prev - cur;
  const Point2 to_next = next - cur;
  double a = std::atan2(cross(to_next, to_prev), dot(to_next, to_prev));
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

// ---------------------------------------------------------------------------
// Polygon2

namespace {

double bbox_diagonal(std::span<const Point2> pts) {
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

}  // namespace

Polygon2::Polygon2(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");

  const double diag = bbox_diagonal(vertices_);
  const double min_edge = 1e-13 * diag;
  for (std::size_t i = 0; i < n; ++i) {
    if (distance(vertices_[i], vertices_[(i + 1) % n]) <= min_edge) {
      throw GeometryError("zero-length edge at vertex " + std::to_string(i));
    }
  }

  // Non-adjacent edges must be disjoint; adjacent edges may only share their
  // common vertex (a fold-back is an overlap).
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = vertices_[i], b = vertices_[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 c = vertices_[j], d = vertices_[(j + 1) % n];
      const bool adjacent_next = (j == i + 1);
      const bool adjacent_prev = (i == 0 && j == n - 1);
      if (adjacent_next) {
        // shared vertex b == c
        if (pr::orient(a, b, d) == 0 && dot(a - b, d - b) > 0.0) {
          throw GeometryError("self-overlapping edges at vertex " + std::to_string(j));
        }
        continue;
      }
      if (adjacent_prev) {
        // shared vertex a == d
        if (pr::orient(c, a, b) == 0 && dot(c - a, b - a) > 0.0) {
          throw GeometryError("self-overlapping edges at vertex 0");
        }
        continue;
      }
      if (pr::segments_intersect(a, b, c, d)) {
        throw GeometryError("self-intersection between edges " + std::to_string(i) +
                            " and " + std::to_string(j));
      }
    }
  }

  const double area = signed_area(std::span<const Point2>(vertices_));
  if (area == 0.0) throw GeometryError("polygon has zero area");
  if (area < 0.0) {
    std::reverse(vertices_.begin(), vertices_.end());
    reoriented_ = true;
    logger().debug("clockwise polygon with {} vertices reversed to counter-clockwise", n);
  }
}

double Kernel::area() const { return region ? signed_area(*region) : 0.0; }

// ---------------------------------------------------------------------------
// Scalar measures

double signed_area(std::span<const Point2> loop) {
  const std::size_t n = loop.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(loop[i], loop[(i + 1) % n]);
  }
  return 0.5 * twice;
}

double signed_area(const Polygon2& p) {
  return signed_area(std::span<const Point2>(p.vertices()));
}

double perimeter(const Polygon2& p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += distance(p[i], p.vertex(i + 1));
  return sum;
}

std::vector<double> interior_angles(const Polygon2& p) {
  const std::size_t n = p.size();
  std::vector<double> angles(n);
  for (std::size_t i = 0; i < n; ++i) {
    angles[i] = corner_angle(p.vertex(i + n - 1), p[i], p.vertex(i + 1));
  }
  return angles;
}

double shortest_edge(const Polygon2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) best = std::min(best, distance(p[i], p.vertex(i + 1)));
  return best;
}

double longest_edge(const Polygon2& p) {
  double best = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) best = std::max(best, distance(p[i], p.vertex(i + 1)));
  return best;
}

Point2 area_centroid(const Polygon2& p) {
  // Shifted to the first vertex to limit cancellation.
  const Point2 o = p[0];
  double cx = 0.0, cy = 0.0, twice_area = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2 a = p[i] - o, b = p.vertex(i + 1) - o;
    const double w = cross(a, b);
    twice_area += w;
    cx += (a.x + b.x) * w;
    cy += (a.y + b.y) * w;
  }
  return {o.x + cx / (3.0 * twice_area), o.y + cy / (3.0 * twice_area)};
}

bool is_convex(const Polygon2& p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (pr::orient(p.vertex(i + n - 1), p[i], p.vertex(i + 1)) < 0) return false;
  }
  return true;
}

double diameter(std::span<const Point2> points) {
  double best = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::max(best, squared_distance(points[i], points[j]));
    }
  }
  return std::sqrt(best);
}

double diameter(const Polygon2& p) { return diameter(std::span<const Point2>(p.vertices())); }

double min_pairwise_distance(std::span<const Point2> points) {
  if (points.size() < 2) throw GeometryError("min_pairwise_distance needs at least 2 points");
  std::vector<Point2> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const double dx = sorted[j].x - sorted[i].x;
      if (dx * dx >= best2) break;
      best2 = std::min(best2, squared_distance(sorted[i], sorted[j]));
    }
  }
  return std::sqrt(best2);
}

// ---------------------------------------------------------------------------
// Location and distances

Location locate(const Polygon2& p, Point2 q) {
  const std::size_t n = p.size();
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = p[i], b = p.vertex(i + 1);
    if (pr::on_segment(a, b, q)) return Location::boundary;
    if (a.y <= q.y) {
      if (b.y > q.y && pr::orient(a, b, q) > 0) ++winding;
    } else {
      if (b.y <= q.y && pr::orient(a, b, q) < 0) --winding;
    }
  }
  return winding != 0 ? Location::inside : Location::outside;
}

namespace {

double segment_distance2(Point2 q, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(q - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Point2 proj{a.x + t * ab.x, a.y + t * ab.y};
  return squared_distance(q, proj);
}

// Floating-point crossing test; good enough for search heuristics.
bool inside_fast(const std::vector<Point2>& v, Point2 q) {
  bool inside = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = v[i];
    const Point2& b = v[j];
    if ((a.y > q.y) != (b.y > q.y) &&
        q.x < (b.x - a.x) * (q.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

double boundary_distance_raw(const std::vector<Point2>& v, Point2 q) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, segment_distance2(q, v[i], v[(i + 1) % n]));
  return std::sqrt(best);
}

}  // namespace

double boundary_distance(const Polygon2& p, Point2 q) { return boundary_distance_raw(p.vertices(), q); }

bool polygons_intersect(const Polygon2& a, const Polygon2& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (pr::segments_intersect(a[i], a.vertex(i + 1), b[j], b.vertex(j + 1))) return true;
    }
  }
  return locate(b, a[0]) != Location::outside || locate(a, b[0]) != Location::outside;
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && pr::orient(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && pr::orient(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

// ---------------------------------------------------------------------------
// Kernel

Kernel kernel(const Polygon2& p) {
  if (is_convex(p)) return Kernel{p};

  double xmin = p[0].x, xmax = p[0].x, ymin = p[0].y, ymax = p[0].y;
  for (const auto& v : p.vertices()) {
    xmin = std::min(xmin, v.x);
    xmax = std::max(xmax, v.x);
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  std::vector<Point2> region{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
  std::vector<Point2> next;
  next.reserve(region.size() + 4);

  for (std::size_t e = 0; e < p.size() && region.size() >= 3; ++e) {
    const Point2 a = p[e];
    const Point2 dir = p.vertex(e + 1) - a;
    const double len = norm(dir);
    auto side = [&](Point2 q) { return cross(dir, q - a) / len; };
    next.clear();
    for (std::size_t i = 0; i < region.size(); ++i) {
      const Point2 cur = region[i];
      const Point2 nxt = region[(i + 1) % region.size()];
      const double sc = side(cur), sn = side(nxt);
      if (sc >= 0.0) next.push_back(cur);
      if ((sc >= 0.0) != (sn >= 0.0)) {
        const double t = sc / (sc - sn);
        next.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
      }
    }
    region.swap(next);
  }

  if (region.size() < 3) return Kernel{};
  auto hull = convex_hull(std::move(region));
  // Clipping through existing vertices leaves near-duplicates behind.
  const double merge = 1e-11 * bbox_diagonal(p.vertices());
  std::vector<Point2> cleaned;
  for (const auto& q : hull) {
    if (cleaned.empty() || distance(cleaned.back(), q) > merge) cleaned.push_back(q);
  }
  while (cleaned.size() > 1 && distance(cleaned.back(), cleaned.front()) <= merge) cleaned.pop_back();
  hull = convex_hull(std::move(cleaned));
  if (hull.size() < 3) return Kernel{};
  const double hull_area = signed_area(std::span<const Point2>(hull));
  if (!(hull_area >= 1e-12 * signed_area(p))) return Kernel{};
  try {
    return Kernel{Polygon2(std::move(hull))};
  } catch (const GeometryError&) {
    return Kernel{};
  }
}

// ---------------------------------------------------------------------------
// Inscribed circle

namespace {

Circle triangle_incircle(const Polygon2& p) {
  const Point2 a = p[0], b = p[1], c = p[2];
  const double la = distance(b, c), lb = distance(c, a), lc = distance(a, b);
  const double per = la + lb + lc;
  const Point2 center{(la * a.x + lb * b.x + lc * c.x) / per, (la * a.y + lb * b.y + lc * c.y) / per};
  return {center, 2.0 * signed_area(p) / per};
}

struct ProbeCell {
  Point2 center;
  double half;
  double dist;       // signed distance of the center to the boundary
  double potential;  // upper bound of dist inside the cell
};

double signed_boundary_distance(const std::vector<Point2>& v, Point2 q) {
  const double d = boundary_distance_raw(v, q);
  return inside_fast(v, q) ? d : -d;
}

ProbeCell make_cell(const std::vector<Point2>& v, Point2 c, double half) {
  const double d = signed_boundary_distance(v, c);
  return {c, half, d, d + half * std::numbers::sqrt2};
}

// Boundary feature for the tangency polish: an edge's supporting line or a
// reflex vertex.
struct Site {
  bool is_point;
  Point2 p;       // point site, or a point on the line
  Point2 normal;  // inward unit normal of a line site
};

// Solve for (cx, cy, r) with |c - p_k| = r for point sites and
// normal.(c - p) = r for line sites.
void tangent_circles(const Site& s1, const Site& s2, const Site& s3, std::vector<std::array<double, 3>>& out) {
  std::array<const Site*, 3> sites{&s1, &s2, &s3};
  std::stable_partition(sites.begin(), sites.end(), [](const Site* s) { return !s->is_point; });
  const int points = static_cast<int>(s1.is_point) + s2.is_point + s3.is_point;

  auto line_row = [](const Site& s, std::array<double, 4>& row) {
    row = {s.normal.x, s.normal.y, -1.0, dot(s.normal, s.p)};
  };
  auto diff_row = [](const Site& s, const Site& t, std::array<double, 4>& row) {
    row = {2.0 * (t.p.x - s.p.x), 2.0 * (t.p.y - s.p.y), 0.0, dot(t.p, t.p) - dot(s.p, s.p)};
  };

  std::array<double, 4> r1{}, r2{}, r3{};
  const Site* quad = nullptr;
  switch (points) {
    case 0: line_row(*sites[0], r1); line_row(*sites[1], r2); line_row(*sites[2], r3); break;
    case 1: line_row(*sites[0], r1); line_row(*sites[1], r2); quad = sites[2]; break;
    case 2: line_row(*sites[0], r1); diff_row(*sites[1], *sites[2], r2); quad = sites[1]; break;
    default: diff_row(*sites[0], *sites[1], r1); diff_row(*sites[0], *sites[2], r2); quad = sites[0]; break;
  }

  if (!quad) {
    const double det = r1[0] * (r2[1] * r3[2] - r2[2] * r3[1]) - r1[1] * (r2[0] * r3[2] - r2[2] * r3[0]) +
                       r1[2] * (r2[0] * r3[1] - r2[1] * r3[0]);
    if (std::fabs(det) < 1e-14) return;
    auto solve_col = [&](int col) {
      std::array<std::array<double, 3>, 3> m{{{r1[0], r1[1], r1[2]}, {r2[0], r2[1], r2[2]}, {r3[0], r3[1], r3[2]}}};
      m[0][col] = r1[3];
      m[1][col] = r2[3];
      m[2][col] = r3[3];
      return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
              m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) / det;
    };
    out.push_back({solve_col(0), solve_col(1), solve_col(2)});
    return;
  }

  // Null direction of the 2x3 system and its minimum-norm particular solution.
  const std::array<double, 3> a{r1[0], r1[1], r1[2]}, b{r2[0], r2[1], r2[2]};
  const std::array<double, 3> v{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  const double vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  if (vv < 1e-24) return;
  const double aa = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  const double bb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
  const double ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  const double g = aa * bb - ab * ab;
  const double ca = (r1[3] * bb - r2[3] * ab) / g;
  const double cb = (r2[3] * aa - r1[3] * ab) / g;
  const std::array<double, 3> x0{ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2]};

  const double px = x0[0] - quad->p.x, py = x0[1] - quad->p.y;
  const double qa = v[0] * v[0] + v[1] * v[1] - v[2] * v[2];
  const double qb = 2.0 * (px * v[0] + py * v[1] - x0[2] * v[2]);
  const double qc = px * px + py * py - x0[2] * x0[2];
  auto emit = [&](double lambda) {
    out.push_back({x0[0] + lambda * v[0], x0[1] + lambda * v[1], x0[2] + lambda * v[2]});
  };
  if (std::fabs(qa) < 1e-14 * vv) {
    if (std::fabs(qb) > 0.0) emit(-qc / qb);
    return;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  if (q != 0.0) {
    emit(q / qa);
    emit(qc / q);
  } else {
    emit(-qb / (2.0 * qa));
  }
}

Circle polish(const Polygon2& p, Circle start) {
  const auto& v = p.vertices();
  const std::size_t n = v.size();

  std::vector<Site> sites;
  std::vector<double> site_dist;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = v[i], b = v[(i + 1) % n];
    const Point2 d = b - a;
    const double len = norm(d);
    sites.push_back({false, a, {-d.y / len, d.x / len}});
    site_dist.push_back(std::sqrt(segment_distance2(start.center, a, b)));
    if (pr::orient(v[(i + n - 1) % n], a, b) < 0) {
      sites.push_back({true, a, {}});
      site_dist.push_back(distance(start.center, a));
    }
  }

  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t k = std::min<std::size_t>(order.size(), 12);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t x, std::size_t y) {
                      return site_dist[x] < site_dist[y] || (site_dist[x] == site_dist[y] && x < y);
                    });

  Circle best = start;
  auto consider = [&](Point2 c) {
    if (!inside_fast(v, c)) return;
    const double r = boundary_distance_raw(v, c);
    if (r > best.radius) best = {c, r};
  };

  std::vector<std::array<double, 3>> candidates;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const Site& si = sites[order[i]];
      const Site& sj = sites[order[j]];
      // Parallel opposite lines: the optimum may sit anywhere on the midline.
      if (!si.is_point && !sj.is_point && dot(si.normal, sj.normal) < -1.0 + 1e-12) {
        const double width = dot(si.normal, sj.p - si.p);
        if (width > 0.0) {
          const double off = dot(si.normal, start.center - si.p) - 0.5 * width;
          try {
            consider(start.center - off * si.normal);
          } catch (const GeometryError&) {
          }
        }
      }
      for (std::size_t l = j + 1; l < k; ++l) {
        candidates.clear();
        tangent_circles(si, sj, sites[order[l]], candidates);
        for (const auto& c : candidates) {
          if (!(c[2] > 0.0) || !std::isfinite(c[0]) || !std::isfinite(c[1])) continue;
          consider(Point2{c[0], c[1]});
        }
      }
    }
  }
  return best;
}

}  // namespace

Circle inscribed_circle(const Polygon2& p, double tol) {
  if (!(tol > 0.0)) throw GeometryError("inscribed_circle tolerance must be positive");
  if (p.size() == 3) return triangle_incircle(p);

  const auto& v = p.vertices();
  double xmin = v[0].x, xmax = v[0].x, ymin = v[0].y, ymax = v[0].y;
  for (const auto& q : v) {
    xmin = std::min(xmin, q.x);
    xmax = std::max(xmax, q.x);
    ymin = std::min(ymin, q.y);
    ymax = std::max(ymax, q.y);
  }
  const double w = xmax - xmin, h = ymax - ymin;
  const double cell = std::min(w, h);
  double half = cell / 2.0;

  auto cmp = [](const ProbeCell& a, const ProbeCell& b) { return a.potential < b.potential; };
  std::priority_queue<ProbeCell, std::vector<ProbeCell>, decltype(cmp)> queue(cmp);
  for (double x = xmin; x < xmax; x += cell) {
    for (double y = ymin; y < ymax; y += cell) queue.push(make_cell(v, {x + half, y + half}, half));
  }

  ProbeCell best = make_cell(v, area_centroid(p), 0.0);
  const ProbeCell bbox_cell = make_cell(v, {xmin + w / 2.0, ymin + h / 2.0}, 0.0);
  if (bbox_cell.dist > best.dist) best = bbox_cell;

  // The search cannot need more than this many probes for sane tolerances;
  // the bound protects against pathological slivers.
  std::size_t budget = 200000;
  while (!queue.empty() && budget-- > 0) {
    const ProbeCell c = queue.top();
    queue.pop();
    if (c.dist > best.dist) best = c;
    if (c.potential - best.dist <= tol) continue;
    half = c.half / 2.0;
    queue.push(make_cell(v, {c.center.x - half, c.center.y - half}, half));
    queue.push(make_cell(v, {c.center.x + half, c.center.y - half}, half));
    queue.push(make_cell(v, {c.center.x - half, c.center.y + half}, half));
    queue.push(make_cell(v, {c.center.x + half, c.center.y + half}, half));
  }

  Circle start{best.center, std::max(best.dist, 0.0)};
  return polish(p, start);
}

Circle inscribed_circle(const Polygon2& p) { return inscribed_circle(p, 1e-4 * diameter(p)); }

// ---------------------------------------------------------------------------
// Minimum enclosing circle

namespace {

Circle circle_from(Point2 a, Point2 b) {
  return {{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}, 0.5 * distance(a, b)};
}

Circle circle_from(Point2 a, Point2 b, Point2 c) {
  const Point2 ab = b - a, ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  if (d == 0.0) {
    // Collinear: the farthest pair spans the circle.
    Circle best = circle_from(a, b);
    for (const Circle& cand : {circle_from(a, c), circle_from(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double ab2 = dot(ab, ab), ac2 = dot(ac, ac);
  const Point2 off{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  return {a + off, norm(off)};
}

bool covers(const Circle& c, Point2 p) {
  return distance(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-15;
}

}  // namespace

Circle min_enclosing_circle(std::span<const Point2> points) {
  if (points.empty()) throw GeometryError("no points");
  std::vector<Point2> pts(points.begin(), points.end());
  std::mt19937_64 rng(0x5eedULL);
  std::shuffle(pts.begin(), pts.end(), rng);

  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (covers(c, pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (covers(c, pts[j])) continue;
      c = circle_from(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!covers(c, pts[k])) c = circle_from(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

}  // namespace pemq
