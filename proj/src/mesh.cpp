#include "pemq/mesh.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "pemq/error.hpp"

namespace pemq {

std::string_view to_string(CellTag tag) {
  switch (tag) {
    case CellTag::seed_polygon: return "seed-polygon";
    case CellTag::filler_triangle: return "filler-triangle";
    case CellTag::aggregated: return "aggregated";
  }
  return "?";
}

CellTag parse_cell_tag(std::string_view s) {
  if (s == "seed-polygon") return CellTag::seed_polygon;
  if (s == "filler-triangle") return CellTag::filler_triangle;
  if (s == "aggregated") return CellTag::aggregated;
  throw ValidationError("unknown cell tag '" + std::string(s) + "'");
}

std::vector<Point2> PolygonalMesh::cell_points(std::size_t c) const {
  std::vector<Point2> pts;
  pts.reserve(cells[c].size());
  for (auto v : cells[c]) pts.push_back(vertices[v]);
  return pts;
}

Polygon2 PolygonalMesh::cell_polygon(std::size_t c) const { return Polygon2(cell_points(c)); }

void validate(const PolygonalMesh& m) {
  if (m.tags.size() != m.cells.size()) {
    throw ValidationError("tag count " + std::to_string(m.tags.size()) + " differs from cell count " +
                          std::to_string(m.cells.size()));
  }
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    const auto& cell = m.cells[c];
    if (cell.size() < 3) throw ValidationError("cell " + std::to_string(c) + " has fewer than 3 vertices");
    for (auto v : cell) {
      if (v >= m.vertices.size()) {
        throw ValidationError("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v));
      }
    }
    try {
      const Polygon2 p = m.cell_polygon(c);
      if (p.reoriented()) throw ValidationError("cell " + std::to_string(c) + " is clockwise");
    } catch (const GeometryError& e) {
      throw ValidationError("cell " + std::to_string(c) + ": " + e.what());
    }
  }
}

void orient_cells_ccw(PolygonalMesh& m) {
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    for (auto v : m.cells[c]) {
      if (v >= m.vertices.size()) {
        throw ValidationError("cell " + std::to_string(c) + " references missing vertex " + std::to_string(v));
      }
    }
    try {
      if (m.cell_polygon(c).reoriented()) std::reverse(m.cells[c].begin(), m.cells[c].end());
    } catch (const GeometryError& e) {
      throw ValidationError("cell " + std::to_string(c) + ": " + e.what());
    }
  }
}

double total_area(const PolygonalMesh& m) {
  double sum = 0.0;
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    sum += signed_area(std::span<const Point2>(m.cell_points(c)));
  }
  return sum;
}

bool on_canvas_boundary(Point2 p, double tol) {
  const bool in_x = p.x >= -tol && p.x <= 1.0 + tol;
  const bool in_y = p.y >= -tol && p.y <= 1.0 + tol;
  return (in_x && in_y) &&
         (std::fabs(p.x) <= tol || std::fabs(p.x - 1.0) <= tol || std::fabs(p.y) <= tol ||
          std::fabs(p.y - 1.0) <= tol);
}

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

std::map<Edge, int> directed_edge_counts(const PolygonalMesh& m) {
  std::map<Edge, int> count;
  for (const auto& cell : m.cells) {
    for (std::size_t i = 0; i < cell.size(); ++i) ++count[{cell[i], cell[(i + 1) % cell.size()]}];
  }
  return count;
}

}  // namespace

bool is_conforming(const PolygonalMesh& m, std::string* why) {
  const auto count = directed_edge_counts(m);
  auto fail = [&](const Edge& e, const std::string& msg) {
    if (why) *why = "edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ") " + msg;
    return false;
  };
  for (const auto& [e, n] : count) {
    if (n > 1) return fail(e, "used " + std::to_string(n) + " times in the same direction");
    const auto twin = count.find({e.second, e.first});
    if (twin != count.end()) continue;
    const Point2 a = m.vertices[e.first], b = m.vertices[e.second];
    const bool on_side = (a.x == 0.0 && b.x == 0.0) || (a.x == 1.0 && b.x == 1.0) ||
                         (a.y == 0.0 && b.y == 0.0) || (a.y == 1.0 && b.y == 1.0);
    if (!on_side) return fail(e, "has no neighbour and is not on the canvas boundary");
  }
  return true;
}

std::vector<bool> boundary_vertices(const PolygonalMesh& m) {
  const auto count = directed_edge_counts(m);
  std::vector<bool> flag(m.vertices.size(), false);
  for (const auto& [e, n] : count) {
    if (!count.contains({e.second, e.first})) flag[e.first] = flag[e.second] = true;
  }
  return flag;
}

}  // namespace pemq
