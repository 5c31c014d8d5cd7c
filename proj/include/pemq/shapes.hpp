#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "pemq/geometry.hpp"
#include "pemq/metrics.hpp"

namespace pemq {

// Parametric polygon families on the [0,1]^2 reference frame, centred near
// (0.5, 0.5). Each degrades one metric monotonically as t goes from 0 to 1.
//
//   sliver         isosceles triangle, apex angle (pi/9)(1 - 0.99 t);  MA
//   comb           8 radial teeth on a hub, root gap 0.1 * 10^(-2t);   MPD
//   star           8-point star, inner/outer radius 0.5 (1 - 0.998 t); KAR
//   maze           square with a V notch, wall slope 0.4 - 0.3 t; the
//                  kernel is empty from t = 0.5 on;                     KAR
//   ngon_collapse  regular 16-gon, edge 0 shrunk to l0 * 10^(-3t);      ER
enum class ParametricClass { sliver, comb, star, maze, ngon_collapse };

inline constexpr std::size_t kParametricClassCount = 5;

std::span<const ParametricClass> parametric_classes();
std::string_view class_name(ParametricClass c);
std::optional<ParametricClass> parse_parametric_class(std::string_view name);

/// Metric whose per-mesh minimum degrades along the family.
Metric stressed_metric(ParametricClass c);

/// Throws ValidationError when t is outside [0, 1].
Polygon2 instantiate_parametric(ParametricClass c, double t);
/// Throws ValidationError for unknown names.
Polygon2 instantiate_parametric(std::string_view name, double t);

/// Star-shaped polygon around (0.5, 0.5): n sorted angles with every angular
/// gap below pi, radii uniform in [0.2, 0.5]. Deterministic in (seed, n).
Polygon2 random_polygon(std::uint64_t seed, int n);

}  // namespace pemq
