#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pemq/error.hpp"
#include "pemq/metrics.hpp"
#include "pemq/shapes.hpp"
#include "pemq/triangulation.hpp"

using namespace pemq;
using std::numbers::pi;

namespace {

Polygon2 square(double lo, double hi) { return Polygon2({{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}); }

// Scaled and shifted copy of p whose bounding box centre is c.
Polygon2 shrink(const Polygon2& p, double s, Point2 c) {
  std::vector<Point2> v;
  for (const auto& q : p.vertices()) v.push_back({c.x + s * (q.x - 0.5), c.y + s * (q.y - 0.5)});
  return Polygon2(v);
}

void check_mesh(const PolygonalMesh& m, std::size_t seeds) {
  REQUIRE_NOTHROW(validate(m));
  std::string why;
  CHECK_MESSAGE(is_conforming(m, &why), why);
  double area = 0.0;
  for (std::size_t c = 0; c < m.num_cells(); ++c) area += oracle::shoelace(m.cell_points(c));
  CHECK(std::fabs(area - 1.0) <= 1e-9);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    CHECK(m.tags[c] == (c < seeds ? CellTag::seed_polygon : CellTag::filler_triangle));
    if (c >= seeds) CHECK(m.cells[c].size() == 3);
  }
}

// The input loop appears, in cyclic order, as a subsequence of the seed cell.
bool loop_preserved(const Polygon2& p, const std::vector<Point2>& cell) {
  const auto& v = p.vertices();
  std::size_t start = cell.size();
  for (std::size_t i = 0; i < cell.size(); ++i)
    if (cell[i] == v[0]) start = i;
  if (start == cell.size()) return false;
  std::size_t k = 1;
  for (std::size_t i = 1; i <= cell.size() && k < v.size(); ++i)
    if (cell[(start + i) % cell.size()] == v[k]) ++k;
  return k == v.size();
}

double min_filler_angle(const PolygonalMesh& m) {
  double best = pi;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    if (m.tags[c] != CellTag::filler_triangle) continue;
    for (double a : interior_angles(m.cell_polygon(c))) best = std::min(best, a);
  }
  return best;
}

}  // namespace

TEST_CASE("refinement parameter validation") {
  CHECK_NOTHROW(validate(RefinementParams{}));
  CHECK_NOTHROW(validate(RefinementParams{0.1, 30.0}));
  CHECK_THROWS_AS(validate(RefinementParams{0.0, {}}), ValidationError);
  CHECK_THROWS_AS(validate(RefinementParams{-1.0, {}}), ValidationError);
  CHECK_THROWS_AS(validate(RefinementParams{{}, 30.5}), ValidationError);
  CHECK_THROWS_AS(validate(RefinementParams{{}, 0.0}), ValidationError);
}

TEST_CASE("empty canvas with an area bound") {
  const auto m = triangulate_exterior({}, {0.5, {}});
  check_mesh(m, 0);
  for (std::size_t c = 0; c < m.num_cells(); ++c) CHECK(signed_area(m.cell_polygon(c)) <= 0.5);
}

TEST_CASE("empty canvas refined triangulation is Delaunay") {
  const auto m = triangulate_exterior({}, {0.002, 25.0});
  check_mesh(m, 0);
  CHECK(m.num_cells() >= 500);
  // no constraints inside the square, so the triangulation must be plain Delaunay
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto t = m.cell_points(c);
    const double ax = t[1].x - t[0].x, ay = t[1].y - t[0].y, bx = t[2].x - t[0].x, by = t[2].y - t[0].y;
    const double d = 2 * (ax * by - ay * bx);
    const double ux = (by * (ax * ax + ay * ay) - ay * (bx * bx + by * by)) / d;
    const double uy = (ax * (bx * bx + by * by) - bx * (ax * ax + ay * ay)) / d;
    const double r2 = ux * ux + uy * uy;
    for (const auto& v : m.vertices) {
      const double dx = v.x - t[0].x - ux, dy = v.y - t[0].y - uy;
      CHECK(dx * dx + dy * dy >= r2 * (1 - 1e-9));
    }
  }
}

TEST_CASE("single centred square without refinement") {
  const auto sq = square(0.4, 0.6);
  const std::vector<Polygon2> seeds{sq};
  const auto m = triangulate_exterior(seeds, {});
  check_mesh(m, 1);
  CHECK(m.cells[0].size() == 4);
  CHECK(loop_preserved(sq, m.cell_points(0)));
  // 8 vertices, 4 on the hull: 2*8 - 4 - 2 = 10 triangles minus 2 for the hole
  CHECK(m.num_vertices() == 8);
  CHECK(m.num_cells() == 9);
}

TEST_CASE("minimum angle bound holds for every filler triangle") {
  for (double q : {20.0, 30.0}) {
    CAPTURE(q);
    const std::vector<Polygon2> seeds{Polygon2({{0.2, 0.5}, {0.8, 0.49}, {0.8, 0.51}})};
    const auto m = triangulate_exterior(seeds, {{}, q});
    check_mesh(m, 1);
    CHECK(loop_preserved(seeds[0], m.cell_points(0)));
    CHECK(min_filler_angle(m) >= q * pi / 180 * (1 - 1e-12));
  }
}

TEST_CASE("parametric seeds at both ends of their schedules") {
  for (auto cls : parametric_classes()) {
    for (double t : {0.0, 1.0}) {
      CAPTURE(class_name(cls));
      CAPTURE(t);
      const std::vector<Polygon2> seeds{shrink(instantiate_parametric(cls, t), 0.8, {0.5, 0.5})};
      const auto m = triangulate_exterior(seeds, {0.01, 25.0});
      check_mesh(m, 1);
      CHECK(loop_preserved(seeds[0], m.cell_points(0)));
      CHECK(min_filler_angle(m) >= 25 * pi / 180 * (1 - 1e-12));
      for (std::size_t c = 1; c < m.num_cells(); ++c) CHECK(signed_area(m.cell_polygon(c)) <= 0.01 * (1 + 1e-12));
    }
  }
}

TEST_CASE("several random seeds") {
  std::vector<Polygon2> seeds;
  const Point2 centres[] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  for (int i = 0; i < 4; ++i) seeds.push_back(shrink(random_polygon(100 + i, 6 + 3 * i), 0.45, centres[i]));
  const auto m = triangulate_exterior(seeds, {0.005, 28.0});
  check_mesh(m, 4);
  for (std::size_t i = 0; i < seeds.size(); ++i) CHECK(loop_preserved(seeds[i], m.cell_points(i)));
}

TEST_CASE("same input gives the same mesh") {
  const std::vector<Polygon2> seeds{shrink(instantiate_parametric("star", 0.7), 0.7, {0.45, 0.55})};
  const auto a = triangulate_exterior(seeds, {0.01, 30.0});
  const auto b = triangulate_exterior(seeds, {0.01, 30.0});
  CHECK(a.vertices == b.vertices);
  CHECK(a.cells == b.cells);
}

TEST_CASE("placement errors") {
  SUBCASE("outside canvas") {
    const std::vector<Polygon2> seeds{square(0.5, 1.2)};
    CHECK_THROWS_WITH_AS(triangulate_exterior(seeds, {}), doctest::Contains("outside canvas"), GeometryError);
  }
  SUBCASE("touching the canvas boundary") {
    const std::vector<Polygon2> seeds{square(0.0, 0.5)};
    CHECK_THROWS_AS(triangulate_exterior(seeds, {}), GeometryError);
  }
  SUBCASE("overlap") {
    const std::vector<Polygon2> seeds{square(0.2, 0.5), square(0.4, 0.7)};
    CHECK_THROWS_WITH_AS(triangulate_exterior(seeds, {}), doctest::Contains("overlaps"), GeometryError);
  }
  SUBCASE("nested") {
    const std::vector<Polygon2> seeds{square(0.2, 0.8), square(0.4, 0.6)};
    CHECK_THROWS_AS(triangulate_exterior(seeds, {}), GeometryError);
  }
  SUBCASE("vertex budget") {
    RefinementParams rp{1e-6, 30.0};
    rp.vertex_budget = 200;
    CHECK_THROWS_WITH_AS(triangulate_exterior({}, rp), doctest::Contains("vertex budget"), NumericalError);
  }
}
