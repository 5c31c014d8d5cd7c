#include "pemq/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "pemq/error.hpp"

namespace pemq {

namespace {

using std::numbers::pi;

constexpr std::array<ParametricClass, kParametricClassCount> kClasses{
    ParametricClass::sliver, ParametricClass::comb, ParametricClass::star, ParametricClass::maze,
    ParametricClass::ngon_collapse};

const Point2 kCenter{0.5, 0.5};

Point2 polar(double r, double a) { return {kCenter.x + r * std::cos(a), kCenter.y + r * std::sin(a)}; }

Polygon2 sliver(double t) {
  const double apex = (pi / 9.0) * (1.0 - 0.99 * t);
  const double legs = 0.8;
  const double bx = 0.1 + legs * std::cos(apex / 2.0);
  const double hy = legs * std::sin(apex / 2.0);
  return Polygon2({{0.1, 0.5}, {bx, 0.5 - hy}, {bx, 0.5 + hy}});
}

Polygon2 comb(double t) {
  constexpr int teeth = 8;
  const double half_step = pi / teeth;
  const double width = 0.12, length = 0.15;
  const double gap = 0.1 * std::pow(10.0, -2.0 * t);
  // Hub radius that puts adjacent root corners exactly `gap` apart.
  const double hub = (0.5 * gap + 0.5 * width * std::cos(half_step)) / std::sin(half_step);
  std::vector<Point2> v;
  for (int k = 0; k < teeth; ++k) {
    const double a = 2.0 * half_step * k;
    const Point2 u{std::cos(a), std::sin(a)};
    const Point2 n{-u.y, u.x};
    auto at = [&](double along, double side) {
      return Point2{kCenter.x + along * u.x + side * n.x, kCenter.y + along * u.y + side * n.y};
    };
    v.push_back(at(hub, -0.5 * width));
    v.push_back(at(hub + length, -0.5 * width));
    v.push_back(at(hub + length, 0.5 * width));
    v.push_back(at(hub, 0.5 * width));
  }
  return Polygon2(std::move(v));
}

Polygon2 star(double t) {
  constexpr int points = 8;
  const double outer = 0.45;
  const double inner = outer * 0.5 * (1.0 - 0.998 * t);
  std::vector<Point2> v;
  for (int k = 0; k < points; ++k) {
    const double a = pi / 2.0 + 2.0 * pi * k / points;
    v.push_back(polar(outer, a));
    v.push_back(polar(inner, a + pi / points));
  }
  return Polygon2(std::move(v));
}

Polygon2 maze(double t) {
  // The notch walls steepen with t; their extensions cross below the notch,
  // and the kernel is the wedge under that crossing. It reaches the bottom
  // edge of the block exactly at t = 0.5.
  const double top = 0.9, bottom = 0.6, half_top = 0.2;
  const double slope = 0.4 - 0.3 * t;
  const double half_bottom = half_top - (top - bottom) * slope;
  return Polygon2({{0.1, 0.1},
                   {0.9, 0.1},
                   {0.9, top},
                   {0.5 + half_top, top},
                   {0.5 + half_bottom, bottom},
                   {0.5 - half_bottom, bottom},
                   {0.5 - half_top, top},
                   {0.1, top}});
}

Polygon2 ngon_collapse(double t) {
  constexpr int n = 16;
  const double radius = 0.4;
  std::vector<Point2> v;
  for (int k = 0; k < n; ++k) v.push_back(polar(radius, -pi / 2.0 - pi / n + 2.0 * pi * k / n));
  const Point2 mid{0.5 * (v[0].x + v[1].x), 0.5 * (v[0].y + v[1].y)};
  const double l0 = distance(v[0], v[1]);
  const Point2 dir = (1.0 / l0) * (v[1] - v[0]);
  const double len = l0 * std::pow(10.0, -3.0 * t);
  v[0] = mid - (0.5 * len) * dir;
  v[1] = mid + (0.5 * len) * dir;
  return Polygon2(std::move(v));
}

// Portable uniform double in [0, 1).
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::span<const ParametricClass> parametric_classes() { return kClasses; }

std::string_view class_name(ParametricClass c) {
  switch (c) {
    case ParametricClass::sliver: return "sliver";
    case ParametricClass::comb: return "comb";
    case ParametricClass::star: return "star";
    case ParametricClass::maze: return "maze";
    case ParametricClass::ngon_collapse: return "ngon_collapse";
  }
  return "?";
}

std::optional<ParametricClass> parse_parametric_class(std::string_view name) {
  for (auto c : kClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

Metric stressed_metric(ParametricClass c) {
  switch (c) {
    case ParametricClass::sliver: return Metric::MA;
    case ParametricClass::comb: return Metric::MPD;
    case ParametricClass::star: return Metric::KAR;
    case ParametricClass::maze: return Metric::KAR;
    case ParametricClass::ngon_collapse: return Metric::ER;
  }
  return Metric::nE;
}

Polygon2 instantiate_parametric(ParametricClass c, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("t must lie in [0, 1]");
  switch (c) {
    case ParametricClass::sliver: return sliver(t);
    case ParametricClass::comb: return comb(t);
    case ParametricClass::star: return star(t);
    case ParametricClass::maze: return maze(t);
    case ParametricClass::ngon_collapse: return ngon_collapse(t);
  }
  throw ValidationError("unknown parametric class");
}

Polygon2 instantiate_parametric(std::string_view name, double t) {
  const auto c = parse_parametric_class(name);
  if (!c) throw ValidationError("unknown parametric class '" + std::string(name) + "'");
  return instantiate_parametric(*c, t);
}

Polygon2 random_polygon(std::uint64_t seed, int n) {
  if (n < 3) throw ValidationError("random polygon needs at least 3 vertices");
  std::mt19937_64 rng(seed);
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (;;) {
    for (auto& a : angles) a = 2.0 * pi * uniform01(rng);
    std::sort(angles.begin(), angles.end());
    double max_gap = angles.front() + 2.0 * pi - angles.back();
    double min_gap = max_gap;
    for (std::size_t i = 1; i < angles.size(); ++i) {
      max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
      min_gap = std::min(min_gap, angles[i] - angles[i - 1]);
    }
    if (max_gap < pi && min_gap > 1e-9) break;
  }
  std::vector<Point2> v;
  v.reserve(angles.size());
  for (double a : angles) v.push_back(polar(0.2 + 0.3 * uniform01(rng), a));
  return Polygon2(std::move(v));
}

}  // namespace pemq
