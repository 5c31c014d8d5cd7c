#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pemq {

/// A point of the canvas plane. Coordinates are always finite.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double x_, double y_);

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline double squared_distance(Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  return dx * dx + dy * dy;
}

/// Interior angle at `cur` of a counter-clockwise boundary prev -> cur -> next,
/// in [0, 2*pi). Reflex corners give values above pi.
double corner_angle(Point2 prev, Point2 cur, Point2 next);

/// Simple, counter-clockwise polygon without holes.
///
/// Construction validates the vertex loop: at least three vertices, finite
/// coordinates, no zero-length edge, no self-intersection (exact segment
/// predicates) and non-zero area. Clockwise input is reversed; `reoriented()`
/// reports whether that happened.
class Polygon2 {
 public:
  explicit Polygon2(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }
  /// Cyclic access: vertex(i) for any i, modulo size().
  const Point2& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  bool reoriented() const noexcept { return reoriented_; }

 private:
  std::vector<Point2> vertices_;
  bool reoriented_ = false;
};

struct Circle {
  Point2 center;
  double radius = 0.0;
};

/// Visibility kernel of a polygon. `region` is absent when the polygon is not
/// star-shaped (or the kernel is degenerate).
struct Kernel {
  std::optional<Polygon2> region;

  bool empty() const noexcept { return !region.has_value(); }
  double area() const;
};

enum class Location { inside, boundary, outside };

double signed_area(const Polygon2& p);
double signed_area(std::span<const Point2> loop);
double perimeter(const Polygon2& p);
std::vector<double> interior_angles(const Polygon2& p);
double shortest_edge(const Polygon2& p);
double longest_edge(const Polygon2& p);
Point2 area_centroid(const Polygon2& p);
bool is_convex(const Polygon2& p);

/// Maximum pairwise vertex distance.
double diameter(const Polygon2& p);
double diameter(std::span<const Point2> points);

/// Half-plane clipping of the bounding box by every edge. Convex input
/// short-circuits to the polygon itself.
Kernel kernel(const Polygon2& p);

/// Largest inscribed circle. Pole-of-inaccessibility search down to `tol`,
/// then polished by solving for circles tangent to triples of nearby boundary
/// features; the polished radius is exact up to rounding whenever the
/// touching features are among the candidates. Triangles use the incircle.
Circle inscribed_circle(const Polygon2& p, double tol);
/// Same, with tol = 1e-4 * diameter(p).
Circle inscribed_circle(const Polygon2& p);

/// Smallest enclosing circle (randomized incremental, fixed shuffle seed).
/// Throws GeometryError("no points") on empty input.
Circle min_enclosing_circle(std::span<const Point2> points);

/// Minimum Euclidean distance over unordered pairs. Needs >= 2 points.
double min_pairwise_distance(std::span<const Point2> points);

/// Exact point location.
Location locate(const Polygon2& p, Point2 q);

/// Distance from q to the polygon boundary.
double boundary_distance(const Polygon2& p, Point2 q);

/// True if the closed polygons share any point (touching counts).
bool polygons_intersect(const Polygon2& a, const Polygon2& b);

/// Convex hull (counter-clockwise, collinear points dropped).
std::vector<Point2> convex_hull(std::vector<Point2> points);

}  // namespace pemq
