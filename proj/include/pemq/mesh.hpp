#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pemq/geometry.hpp"

namespace pemq {

enum class CellTag { seed_polygon, filler_triangle, aggregated };

std::string_view to_string(CellTag tag);
CellTag parse_cell_tag(std::string_view s);

using Cell = std::vector<std::size_t>;

/// Vertices plus heterogeneous cells (index loops, CCW). `tags` is parallel
/// to `cells`.
struct PolygonalMesh {
  std::vector<Point2> vertices;
  std::vector<Cell> cells;
  std::vector<CellTag> tags;

  std::size_t num_vertices() const noexcept { return vertices.size(); }
  std::size_t num_cells() const noexcept { return cells.size(); }

  /// Validated polygon of cell c.
  Polygon2 cell_polygon(std::size_t c) const;
  std::vector<Point2> cell_points(std::size_t c) const;
};

/// Checks index ranges, tag count and that every cell is a valid CCW polygon.
/// Throws ValidationError naming the offending cell.
void validate(const PolygonalMesh& m);

/// Reverses clockwise cells in place (after checking each is simple).
void orient_cells_ccw(PolygonalMesh& m);

double total_area(const PolygonalMesh& m);

/// Every edge is shared by exactly two cells with opposite orientation, or is
/// used once and lies on the boundary of the unit square. On failure `why`
/// receives a description of the first offending edge.
bool is_conforming(const PolygonalMesh& m, std::string* why = nullptr);

/// Vertices incident to an edge used by exactly one cell.
std::vector<bool> boundary_vertices(const PolygonalMesh& m);

/// True if p lies on the boundary of [0,1]^2 within tol.
bool on_canvas_boundary(Point2 p, double tol = 1e-12);

}  // namespace pemq
