#include <doctest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pemq/error.hpp"
#include "pemq/metrics.hpp"

using namespace pemq;
using std::numbers::pi;

namespace {

PolygonalMesh mesh_of(const std::vector<std::vector<Point2>>& polys) {
  PolygonalMesh m;
  for (const auto& poly : polys) {
    Cell cell;
    for (const auto& p : poly) {
      cell.push_back(m.vertices.size());
      m.vertices.push_back(p);
    }
    m.cells.push_back(cell);
    m.tags.push_back(poly.size() == 3 ? CellTag::filler_triangle : CellTag::seed_polygon);
  }
  return m;
}

Polygon2 rigid(const Polygon2& p, double s, double a, Point2 t) {
  std::vector<Point2> v;
  for (const auto& q : p.vertices()) {
    v.push_back({s * (std::cos(a) * q.x - std::sin(a) * q.y) + t.x, s * (std::sin(a) * q.x + std::cos(a) * q.y) + t.y});
  }
  return Polygon2(v);
}

}  // namespace

TEST_CASE("metric names follow the table order") {
  std::string joined;
  for (auto m : kAllMetrics) joined += std::string(metric_name(m)) + ",";
  CHECK(joined == "nE,IC,CC,CR,AR,KE,KAR,PAR,MA,mA,SE,ER,MPD,NPD,SRG,");
  CHECK(parse_metric("KAR") == Metric::KAR);
  CHECK_FALSE(parse_metric("kar").has_value());
}

TEST_CASE("unit square metrics") {
  const auto e = element_metrics(Polygon2({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  const double h = std::sqrt(0.5);
  CHECK(e[Metric::nE] == 4);
  CHECK(e[Metric::IC] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(e[Metric::CC] == doctest::Approx(h).epsilon(1e-12));
  CHECK(e[Metric::CR] == doctest::Approx(h).epsilon(1e-9));
  CHECK(e[Metric::AR] == 1.0);
  CHECK(e[Metric::KE] == 1.0);
  CHECK(e[Metric::KAR] == 1.0);
  CHECK(e[Metric::PAR] == doctest::Approx(pi / 4).epsilon(1e-12));
  CHECK(e[Metric::MA] == doctest::Approx(pi / 2));
  CHECK(e[Metric::mA] == doctest::Approx(pi / 2));
  CHECK(e[Metric::SE] == 1.0);
  CHECK(e[Metric::ER] == 1.0);
  CHECK(e[Metric::MPD] == 1.0);
  CHECK(e[Metric::NPD] == doctest::Approx(h).epsilon(1e-12));
  CHECK(e[Metric::SRG] == doctest::Approx(h).epsilon(1e-9));
}

TEST_CASE("equilateral triangle metrics") {
  const auto e = element_metrics(Polygon2({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}}));
  CHECK(e[Metric::CR] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(e[Metric::ER] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e[Metric::MA] == doctest::Approx(pi / 3).epsilon(1e-12));
  CHECK(e[Metric::mA] == doctest::Approx(pi / 3).epsilon(1e-12));
  CHECK(e[Metric::KAR] == 1.0);
}

TEST_CASE("U-shape has an empty kernel") {
  const auto e = element_metrics(Polygon2({{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}}));
  CHECK(e[Metric::KE] == 0.0);
  CHECK(e[Metric::KAR] == 0.0);
  CHECK(e[Metric::SRG] == 0.0);
}

TEST_CASE("triangle closed forms") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int acute = 0;
  while (acute < 50) {
    const Point2 a{U(rng), U(rng)}, b{U(rng), U(rng)}, c{U(rng), U(rng)};
    if (std::fabs(oracle::orient_d(a, b, c)) < 1e-3) continue;
    const Polygon2 p({a, b, c});
    const auto e = element_metrics(p);
    CHECK(e[Metric::IC] == doctest::Approx(oracle::triangle_inradius(a, b, c)).epsilon(1e-9));
    // the smallest enclosing circle is the circumcircle only when no angle is obtuse
    const auto ang = interior_angles(p);
    if (*std::max_element(ang.begin(), ang.end()) < pi / 2) {
      ++acute;
      CHECK(e[Metric::CC] == doctest::Approx(oracle::triangle_circumradius(a, b, c)).epsilon(1e-9));
    }
  }
}

TEST_CASE("ranges and recomputation identities") {
  std::mt19937_64 rng(9);
  for (int it = 0; it < 40; ++it) {
    const Polygon2 p(oracle::random_star(rng, 3 + it % 15));
    const auto e = element_metrics(p);
    CHECK(e[Metric::nE] >= 3);
    CHECK(e[Metric::IC] > 0);
    CHECK(e[Metric::KE] >= 0);
    CHECK(e[Metric::CR] > 0);
    CHECK(e[Metric::CR] <= 1);
    CHECK(e[Metric::KAR] >= 0);
    CHECK(e[Metric::KAR] <= 1);
    CHECK(e[Metric::PAR] > 0);
    CHECK(e[Metric::PAR] <= 1);
    CHECK(e[Metric::ER] > 0);
    CHECK(e[Metric::ER] <= 1);
    CHECK(e[Metric::NPD] > 0);
    CHECK(e[Metric::NPD] <= 1);
    CHECK(e[Metric::SRG] >= 0);
    CHECK(e[Metric::SRG] <= 1);
    CHECK(e[Metric::MA] > 0);
    CHECK(e[Metric::MA] < pi);
    CHECK(e[Metric::mA] < 2 * pi);
    CHECK(std::fabs(e[Metric::CR] - e[Metric::IC] / e[Metric::CC]) <= 1e-12);
    CHECK(std::fabs(e[Metric::KAR] - e[Metric::KE] / e[Metric::AR]) <= 1e-12);
    CHECK(std::fabs(e[Metric::ER] - e[Metric::SE] / longest_edge(p)) <= 1e-12);
    CHECK((e[Metric::KAR] == 1.0) == is_convex(p));
  }
}

TEST_CASE("scale, rotation and translation invariance") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> S(0.01, 100.0), A(0.0, 2 * pi), T(-3, 3);
  std::vector<Polygon2> fixtures{Polygon2({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}),
                                 Polygon2({{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}})};
  for (int i = 0; i < 15; ++i) fixtures.emplace_back(oracle::random_star(rng, 4 + i));
  for (const auto& p : fixtures) {
    const auto base = element_metrics(p);
    const double s = S(rng);
    const auto moved = element_metrics(rigid(p, s, A(rng), {T(rng), T(rng)}));
    for (auto m : kAllMetrics) {
      CAPTURE(metric_name(m));
      double expect = base[m];
      if (!metric_scale_invariant(m)) expect *= (m == Metric::AR || m == Metric::KE) ? s * s : s;
      CHECK(std::fabs(moved[m] - expect) <= 1e-9 * std::max(1.0, std::fabs(expect)));
    }
  }
}

TEST_CASE("mesh summaries") {
  const std::vector<Point2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<Point2> sq2{{1, 0}, {2, 0}, {2, 1}, {1, 1}};
  const std::vector<Point2> tri{{0, 0}, {1, 0}, {0, 1}};

  SUBCASE("identical elements") {
    const auto s = summarize_mesh(mesh_of({sq, sq2}));
    for (auto m : kAllMetrics) {
      CHECK(s[m].min == doctest::Approx(s[m].max).epsilon(1e-12));
      CHECK(s[m].avg == doctest::Approx(s[m].max).epsilon(1e-12));
      CHECK(s[m].min_id == 0);
    }
    CHECK(s.polygon_count == 2);
  }
  SUBCASE("square and triangle") {
    const auto s = summarize_mesh(mesh_of({sq, tri}));
    CHECK(s[Metric::MA].min == doctest::Approx(pi / 4));
    CHECK(s[Metric::MA].min_id == 1);
    CHECK(s[Metric::ER].min == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(s[Metric::ER].min_id == 1);
    CHECK(s.triangle_count == 1);
    for (auto m : kAllMetrics) {
      CHECK(s[m].min <= s[m].avg);
      CHECK(s[m].avg <= s[m].max);
    }
  }
  SUBCASE("single element") {
    const auto s = summarize_mesh(mesh_of({tri}));
    const auto e = element_metrics(Polygon2(tri));
    for (auto m : kAllMetrics) {
      CHECK(s[m].min == e[m]);
      CHECK(s[m].max == e[m]);
      CHECK(s[m].avg == e[m]);
    }
  }
  SUBCASE("empty mesh") { CHECK_THROWS_AS(summarize_mesh(PolygonalMesh{}), ValidationError); }
}

TEST_CASE("dataset series") {
  const auto s = summarize_mesh(mesh_of({{{0, 0}, {1, 0}, {0, 1}}}));
  const std::vector<MeshMetricsSummary> one{s};
  const auto series1 = dataset_series(one);
  CHECK(series1.size() == kMetricCount);
  CHECK(series1[0].points.size() == 1);
  const std::vector<MeshMetricsSummary> five(5, s);
  for (const auto& ser : dataset_series(five)) {
    REQUIRE(ser.points.size() == 5);
    for (const auto& p : ser.points) CHECK(p.min == ser.points[0].min);
  }
  CHECK_THROWS_AS(dataset_series(std::vector<MeshMetricsSummary>{}), ValidationError);
}

TEST_CASE("csv export") {
  const auto m = mesh_of({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{1, 0}, {2, 0}, {1, 1}}});
  const auto el = mesh_element_metrics(m);
  std::ostringstream os;
  write_element_csv(os, el);
  const std::string text = os.str();
  CHECK(text.rfind("nE,IC,CC,CR,AR,KE,KAR,PAR,MA,mA,SE,ER,MPD,NPD,SRG,MA/mA\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("0.785398163397") != std::string::npos);

  std::ostringstream ss;
  const std::vector<MeshMetricsSummary> sums{summarize(el)};
  write_summary_csv(ss, sums);
  const std::string summary = ss.str();
  CHECK(summary.rfind("mesh,stat,nE,", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 6);
}
