#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "pemq/error.hpp"
#include "pemq/io.hpp"
#include "pemq/meshgen.hpp"
#include "pemq/vem.hpp"

using namespace pemq;

namespace {

const std::filesystem::path kFixtures = PEMQ_FIXTURES;

PolygonalMesh to_mesh(const oracle::Grid& g) {
  PolygonalMesh m;
  m.vertices = g.vertices;
  m.cells = g.cells;
  m.tags.assign(m.cells.size(), CellTag::filler_triangle);
  return m;
}

// Franke written out in one expression, independent of the term table.
double franke_direct(double x, double y) {
  return 0.75 * std::exp(-(std::pow(9 * x - 2, 2) + std::pow(9 * y - 2, 2)) / 4) +
         0.75 * std::exp(-std::pow(9 * x + 1, 2) / 49 - (9 * y + 1) / 10) +
         0.5 * std::exp(-(std::pow(9 * x - 7, 2) + std::pow(9 * y - 3, 2)) / 4) +
         0.2 * std::exp(-std::pow(9 * x - 4, 2) - std::pow(9 * y - 7, 2));
}

// Element matrix built from the projected gradients g_i = (1/2|E|) sum of
// the length-weighted outward normals of the two edges at vertex i:
// K = |E| g_i.g_j + (I - P)^T (I - P), P_ji = g_i.(x_j - xbar) + 1/n.
Eigen::MatrixXd oracle_stiffness(const std::vector<Point2>& v) {
  const auto n = v.size();
  const double area = oracle::shoelace(v);
  Point2 bar{0, 0};
  for (const auto& p : v) bar = bar + p;
  bar = (1.0 / static_cast<double>(n)) * bar;
  std::vector<Point2> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = v[(i + n - 1) % n], b = v[i], c = v[(i + 1) % n];
    const Point2 n1{b.y - a.y, a.x - b.x}, n2{c.y - b.y, b.x - c.x};
    g[i] = (1.0 / (2.0 * area)) * (n1 + n2);
  }
  Eigen::MatrixXd k(n, n), p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      k(i, j) = area * dot(g[i], g[j]);
      p(j, i) = dot(g[i], v[j] - bar) + 1.0 / static_cast<double>(n);
    }
  }
  const Eigen::MatrixXd ip = Eigen::MatrixXd::Identity(n, n) - p;
  return k + ip.transpose() * ip;
}

// Linear FEM matrix via the cotangent formula.
Eigen::MatrixXd cotangent_matrix(Point2 a, Point2 b, Point2 c) {
  const Point2 p[3] = {a, b, c};
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    const Point2 o = p[i], u = p[(i + 1) % 3], w = p[(i + 2) % 3];
    const double cot = dot(u - o, w - o) / std::fabs(cross(u - o, w - o));
    const int j = (i + 1) % 3, l = (i + 2) % 3;
    k(j, l) -= cot / 2;
    k(l, j) -= cot / 2;
    k(j, j) += cot / 2;
    k(l, l) += cot / 2;
  }
  return k;
}

ScalarField2D linear_field() {
  return {[](Point2 p) { return 1.0 + 2.0 * p.x - 3.0 * p.y; }, [](Point2) { return 0.0; }};
}

double max_nodal_error(const VemResult& r) {
  double e = 0;
  for (std::size_t i = 0; i < r.u.size(); ++i) e = std::max(e, std::fabs(r.u[i] - r.u_h[i]));
  return e;
}

PolygonalMesh polygonal_unit_mesh() {
  GenerationConfig c;
  c.triangulation = {0.004, 25.0};
  c.aggregate = true;
  Placement p;
  p.id = "star";
  p.source = PolygonSource::parametric(ParametricClass::star);
  p.position = {0.5, 0.5};
  p.scale = 0.6;
  c.placements = {p};
  return generate_mesh(c, 0.3);
}

}  // namespace

TEST_CASE("franke function") {
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    for (double y : {0.0, 0.29, 0.61, 1.0}) {
      CHECK(franke({x, y}) == doctest::Approx(franke_direct(x, y)).epsilon(1e-14));
    }
  }
  CHECK(franke({0, 0}) == doctest::Approx(0.7664).epsilon(1e-4));
  // -Laplacian against a fourth-order finite-difference stencil
  const double h = 1e-3;
  for (double x : {0.1, 0.22, 0.5, 0.83}) {
    for (double y : {0.15, 0.45, 0.7, 0.95}) {
      auto u = [](double a, double b) { return franke_direct(a, b); };
      auto d2 = [&](double dx, double dy) {
        return (-u(x + 2 * dx, y + 2 * dy) + 16 * u(x + dx, y + dy) - 30 * u(x, y) + 16 * u(x - dx, y - dy) -
                u(x - 2 * dx, y - 2 * dy)) /
               (12 * h * h);
      };
      const double lap = d2(h, 0) + d2(0, h);
      CHECK(franke_rhs({x, y}) == doctest::Approx(-lap).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("element matrices") {
  SUBCASE("unit square") {
    const Polygon2 sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const auto k = local_stiffness(sq);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) CHECK(k(i, j) == doctest::Approx(i == j ? 0.75 : -0.25).epsilon(1e-14));
    }
    const auto kc = local_consistency(sq);
    const double row[4] = {0.5, 0.0, -0.5, 0.0};
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) CHECK(kc(i, j) == doctest::Approx(row[(j - i + 4) % 4]).scale(1.0));
    }
  }
  SUBCASE("random star polygons match the projected-gradient oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 3 + trial % 12;
      const auto v = oracle::random_star(rng, n);
      const Polygon2 poly(v);
      const auto k = local_stiffness(poly);
      const auto o = oracle_stiffness(v);
      CHECK((k - o).cwiseAbs().maxCoeff() <= 1e-10 * o.cwiseAbs().maxCoeff());
      // symmetric, kills constants, positive semidefinite with a 1-d kernel
      CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((k * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
      CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
      CHECK(es.eigenvalues()(1) > 1e-8);
      // scale invariance in 2D
      std::vector<Point2> w;
      for (const auto& p : v) w.push_back(3.0 * p + Point2{2.0, -1.0});
      CHECK((local_stiffness(Polygon2(w)) - k).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  SUBCASE("triangles reduce to linear finite elements") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
      if (std::fabs(oracle::orient_d(a, b, c)) < 1e-3) continue;
      if (oracle::orient_d(a, b, c) < 0) std::swap(b, c);
      const Polygon2 t({a, b, c});
      const auto fem = cotangent_matrix(a, b, c);
      CHECK((local_stiffness(t) - fem).cwiseAbs().maxCoeff() <= 1e-9 * fem.cwiseAbs().maxCoeff());
      CHECK((local_consistency(t) - fem).cwiseAbs().maxCoeff() <= 1e-9 * fem.cwiseAbs().maxCoeff());
    }
  }
}

TEST_CASE("assembly") {
  const auto m = read_mesh(kFixtures / "meshes/mixed.off");
  const SparseMatrix s = assemble(m);
  const Eigen::MatrixXd d(s);
  CHECK(d.rows() == 7);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((d * Eigen::VectorXd::Ones(7)).cwiseAbs().maxCoeff() <= 1e-13);
  // entries add up from the element matrices
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(7, 7);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto k = oracle_stiffness(m.cell_points(c));
    for (std::size_t i = 0; i < m.cells[c].size(); ++i)
      for (std::size_t j = 0; j < m.cells[c].size(); ++j) sum(m.cells[c][i], m.cells[c][j]) += k(i, j);
  }
  CHECK((d - sum).cwiseAbs().maxCoeff() <= 1e-12);

  PolygonalMesh bad = m;
  bad.vertices[5] = {0.25, 0.0};
  bad.vertices[1] = {0.25, 0.0};
  CHECK_THROWS_WITH_AS(assemble(bad), doctest::Contains("cell 0"), ValidationError);
}

TEST_CASE("condition number") {
  SUBCASE("diagonal") {
    SparseMatrix s(2, 2);
    s.insert(0, 0) = 1.0;
    s.insert(1, 1) = 2.0;
    const auto k = condition_number_1(s);
    CHECK(k.exact);
    CHECK(k.value == doctest::Approx(2.0));
  }
  SUBCASE("singular") {
    SparseMatrix s(2, 2);
    s.insert(0, 0) = 1.0;
    s.insert(0, 1) = 1.0;
    s.insert(1, 0) = 1.0;
    s.insert(1, 1) = 1.0;
    CHECK_THROWS_AS(condition_number_1(s), NumericalError);
    CHECK_THROWS_AS(condition_number_1(SparseMatrix(0, 0)), NumericalError);
  }
  // tridiag(-1, 2, -1): ||T||_1 = 4 and (T^-1)_ij = i (n + 1 - j) / (n + 1), i <= j
  auto tridiag = [](int n) {
    SparseMatrix t(n, n);
    for (int i = 0; i < n; ++i) {
      t.insert(i, i) = 2.0;
      if (i > 0) t.insert(i, i - 1) = -1.0;
      if (i + 1 < n) t.insert(i, i + 1) = -1.0;
    }
    return t;
  };
  auto exact_kappa = [](int n) {
    double best = 0;
    for (int j = 1; j <= n; ++j) {
      double col = 0;
      for (int i = 1; i <= n; ++i) col += static_cast<double>(std::min(i, j)) * (n + 1 - std::max(i, j)) / (n + 1);
      best = std::max(best, col);
    }
    return 4.0 * best;
  };
  SUBCASE("explicit inverse") {
    const auto k = condition_number_1(tridiag(50));
    CHECK(k.exact);
    CHECK(k.value == doctest::Approx(exact_kappa(50)).epsilon(1e-9));
  }
  SUBCASE("estimate above the explicit limit") {
    const int n = static_cast<int>(kExactConditionLimit) + 500;
    const auto k = condition_number_1(tridiag(n));
    CHECK_FALSE(k.exact);
    const double ref = exact_kappa(n);
    CHECK(k.value <= ref * (1 + 1e-9));
    CHECK(k.value >= 0.3 * ref);
  }
}

TEST_CASE("patch test: linear solutions are reproduced") {
  const auto field = linear_field();
  for (bool tri : {false, true}) {
    const auto r = solve_poisson(to_mesh(oracle::unit_square_grid(5, tri)), field);
    CHECK(max_nodal_error(r) <= 1e-10);
  }
  const auto mixed = read_mesh(kFixtures / "meshes/mixed.off");
  CHECK(max_nodal_error(solve_poisson(mixed, field)) <= 1e-10);
  const auto poly = polygonal_unit_mesh();
  std::size_t big = 0;
  for (const auto& c : poly.cells) big += c.size() > 3;
  REQUIRE(big > 5);
  const auto r = solve_poisson(poly, field);
  CHECK(max_nodal_error(r) <= 1e-10);
  CHECK(r.eps_S <= 1e-10);
  CHECK(r.eps_inf <= 1e-10);
}

TEST_CASE("solve_poisson validation") {
  auto g = oracle::unit_square_grid(2);
  for (auto& v : g.vertices) v = 0.5 * v;
  CHECK_THROWS_AS(solve_poisson(to_mesh(g)), ValidationError);
  // a hole in the middle: boundary edges away from the square sides
  auto h = oracle::unit_square_grid(3);
  h.cells.erase(h.cells.begin() + 4);
  CHECK_THROWS_AS(solve_poisson(to_mesh(h)), ValidationError);
}

TEST_CASE("convergence on square grids") {
  std::vector<VemResult> rs;
  for (int n : {8, 16, 32}) rs.push_back(solve_poisson(to_mesh(oracle::unit_square_grid(n))));
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const double order_inf = std::log2(rs[i - 1].eps_inf / rs[i].eps_inf);
    const double order_S = std::log2(rs[i - 1].eps_S / rs[i].eps_S);
    const double growth = rs[i].kappa1.value / rs[i - 1].kappa1.value;
    CHECK(order_inf >= 1.7);
    CHECK(order_inf <= 2.3);
    CHECK(growth >= 3.0);
    CHECK(growth <= 5.5);
    // The S-norm of the nodal error is superconvergent on these grids; it
    // behaves like h^2, not like the continuous energy error h^1.
    CHECK(order_S > 1.8);
    CHECK(order_S < 2.4);
  }
  // u and u_h are nodal: boundary values are exact
  const auto m = to_mesh(oracle::unit_square_grid(8));
  const auto bd = boundary_vertices(m);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    CHECK(rs[0].u[i] == doctest::Approx(franke(m.vertices[i])).epsilon(1e-15));
    if (bd[i]) CHECK(rs[0].u_h[i] == rs[0].u[i]);
  }
  CHECK(rs[0].interior_dofs == 49);
  CHECK(rs[0].kappa1.exact);
}

TEST_CASE("vertex renumbering does not change the errors") {
  const auto m = polygonal_unit_mesh();
  const auto r = solve_poisson(m);
  std::vector<std::size_t> perm(m.num_vertices());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  PolygonalMesh p = m;
  for (std::size_t i = 0; i < m.num_vertices(); ++i) p.vertices[perm[i]] = m.vertices[i];
  for (auto& c : p.cells)
    for (auto& v : c) v = perm[v];
  const auto q = solve_poisson(p);
  CHECK(q.eps_S == doctest::Approx(r.eps_S).epsilon(1e-9));
  CHECK(q.eps_inf == doctest::Approx(r.eps_inf).epsilon(1e-9));
  CHECK(q.kappa1.value == doctest::Approx(r.kappa1.value).epsilon(1e-8));
  for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(q.u_h[perm[i]] == doctest::Approx(r.u_h[i]).epsilon(1e-9));
}
