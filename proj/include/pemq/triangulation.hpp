#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "pemq/geometry.hpp"
#include "pemq/mesh.hpp"

namespace pemq {

struct RefinementParams {
  std::optional<double> max_area;       // canvas units^2, > 0
  std::optional<double> min_angle_deg;  // (0, 30]
  std::size_t vertex_budget = 200000;
};

/// Throws ValidationError for out-of-range parameters.
void validate(const RefinementParams& params);

/// Constrained Delaunay triangulation of the unit square minus the placed
/// polygons, refined by circumcenter insertion (Ruppert) until every filler
/// triangle meets the area and angle bounds.
///
/// Output cells: one seed-polygon cell per placed polygon (in input order),
/// followed by the filler triangles. Boundary segments may receive Steiner
/// vertices during refinement; seed cells include them, so the mesh stays
/// conforming and each input loop survives as a subsequence of its cell.
///
/// Throws GeometryError when polygons leave the open canvas or intersect, and
/// NumericalError when refinement exceeds the vertex budget.
PolygonalMesh triangulate_exterior(std::span<const Polygon2> placed, const RefinementParams& params);

}  // namespace pemq
