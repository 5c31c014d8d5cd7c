#include "pemq/vem.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "pemq/error.hpp"
#include "pemq/log.hpp"

namespace pemq {

namespace {

// a * exp(-g) with gradient and Laplacian of g, for the Laplacian identity
// Lap(a e^-g) = a e^-g (|grad g|^2 - Lap g).
struct Bump {
  double value;
  double gx, gy, lap_g;
};

std::array<Bump, 4> franke_terms(Point2 p) {
  const double x = p.x, y = p.y;
  const double a1 = 9 * x - 2, b1 = 9 * y - 2;
  const double a2 = 9 * x + 1, b2 = 9 * y + 1;
  const double a3 = 9 * x - 7, b3 = 9 * y - 3;
  const double a4 = 9 * x - 4, b4 = 9 * y - 7;
  return {{
      {0.75 * std::exp(-(a1 * a1 + b1 * b1) / 4), 4.5 * a1, 4.5 * b1, 81.0},
      {0.75 * std::exp(-(a2 * a2 / 49 + b2 / 10)), 18.0 * a2 / 49, 0.9, 162.0 / 49},
      {0.5 * std::exp(-(a3 * a3 + b3 * b3) / 4), 4.5 * a3, 4.5 * b3, 81.0},
      {0.2 * std::exp(-(a4 * a4 + b4 * b4)), 18.0 * a4, 18.0 * b4, 324.0},
  }};
}

Eigen::MatrixXd projector_star(const Polygon2& e, Eigen::MatrixXd* d_out) {
  const auto n = static_cast<Eigen::Index>(e.size());
  const double h = diameter(e);
  double xe = 0, ye = 0;
  for (const auto& v : e.vertices()) {
    xe += v.x;
    ye += v.y;
  }
  xe /= static_cast<double>(n);
  ye /= static_cast<double>(n);

  Eigen::MatrixXd d(n, 3), b(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point2 v = e[i];
    d(i, 0) = 1.0;
    d(i, 1) = (v.x - xe) / h;
    d(i, 2) = (v.y - ye) / h;
    const Point2 prev = e.vertex(i + n - 1), next = e.vertex(i + 1);
    // length-weighted outward normals of the two edges at vertex i
    const double nx = (next.y - v.y) + (v.y - prev.y);
    const double ny = -(next.x - v.x) - (v.x - prev.x);
    b(0, i) = 1.0 / static_cast<double>(n);
    b(1, i) = nx / (2.0 * h);
    b(2, i) = ny / (2.0 * h);
  }
  const Eigen::Matrix3d g = b * d;
  if (d_out) *d_out = d;
  return g.inverse() * b;
}

}  // namespace

double franke(Point2 p) {
  double s = 0.0;
  for (const auto& t : franke_terms(p)) s += t.value;
  return s;
}

double franke_rhs(Point2 p) {
  double lap = 0.0;
  for (const auto& t : franke_terms(p)) lap += t.value * (t.gx * t.gx + t.gy * t.gy - t.lap_g);
  return -lap;
}

ScalarField2D franke_field() { return {franke, franke_rhs}; }

Eigen::MatrixXd local_consistency(const Polygon2& e) {
  Eigen::MatrixXd d;
  const Eigen::MatrixXd ps = projector_star(e, &d);
  const double h = diameter(e);
  // G with the constant row zeroed: integrals of grad m_a . grad m_b.
  Eigen::Matrix3d gt = Eigen::Matrix3d::Zero();
  gt(1, 1) = gt(2, 2) = signed_area(e) / (h * h);
  return ps.transpose() * gt * ps;
}

Eigen::MatrixXd local_stiffness(const Polygon2& e) {
  Eigen::MatrixXd d;
  const Eigen::MatrixXd ps = projector_star(e, &d);
  const auto n = static_cast<Eigen::Index>(e.size());
  const Eigen::MatrixXd pi = d * ps;
  const Eigen::MatrixXd ipi = Eigen::MatrixXd::Identity(n, n) - pi;
  return local_consistency(e) + ipi.transpose() * ipi;
}

namespace {

SparseMatrix assemble_with(const PolygonalMesh& m, Eigen::MatrixXd (*local)(const Polygon2&)) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    Polygon2 poly = [&] {
      try {
        return m.cell_polygon(c);
      } catch (const GeometryError& e) {
        throw ValidationError("cell " + std::to_string(c) + " is degenerate: " + e.what());
      }
    }();
    if (poly.reoriented()) throw ValidationError("cell " + std::to_string(c) + " is clockwise");
    const Eigen::MatrixXd k = local(poly);
    const auto& cell = m.cells[c];
    for (std::size_t i = 0; i < cell.size(); ++i) {
      for (std::size_t j = 0; j < cell.size(); ++j) {
        trip.emplace_back(static_cast<int>(cell[i]), static_cast<int>(cell[j]),
                          k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(m.num_vertices());
  SparseMatrix s(n, n);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

double norm1(const SparseMatrix& a) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < a.outerSize(); ++j) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) col += std::fabs(it.value());
    best = std::max(best, col);
  }
  return best;
}

// Hager-Higham estimate of ||A^-1||_1 (Higham 1988, Algorithm 4.1).
template <class Solver>
double inverse_norm1_estimate(Solver& lu, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  Eigen::Index last = -1;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = lu.solve(x);
    const double e = y.template lpNorm<1>();
    if (iter > 0 && e <= est) break;
    est = e;
    Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = lu.transpose().solve(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (iter > 0 && (zmax <= z.dot(x) || j == last)) break;
    last = j;
    x.setZero();
    x(j) = 1.0;
  }
  // Alternative sign-alternating vector guards against unlucky cancellation.
  Eigen::VectorXd alt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    alt(i) = (i % 2 ? -1.0 : 1.0) * (1.0 + static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1)));
  }
  const double alt_est = 2.0 * lu.solve(alt).template lpNorm<1>() / (3.0 * static_cast<double>(n));
  return std::max(est, alt_est);
}

}  // namespace

SparseMatrix assemble(const PolygonalMesh& m) { return assemble_with(m, local_stiffness); }

SparseMatrix assemble_consistency(const PolygonalMesh& m) { return assemble_with(m, local_consistency); }

ConditionNumber condition_number_1(const SparseMatrix& s) {
  const Eigen::Index n = s.rows();
  if (n == 0 || s.cols() != n) throw NumericalError("condition number needs a non-empty square matrix");
  const double a1 = norm1(s);
  if (n <= kExactConditionLimit) {
    const Eigen::MatrixXd dense(s);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    if (!lu.isInvertible()) throw NumericalError("matrix is singular");
    const Eigen::MatrixXd inv = lu.inverse();
    if (!inv.allFinite()) throw NumericalError("matrix is singular");
    return {a1 * inv.cwiseAbs().colwise().sum().maxCoeff(), true};
  }
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(s);
  if (lu.info() != Eigen::Success) throw NumericalError("matrix is singular");
  return {a1 * inverse_norm1_estimate(lu, n), false};
}

VemResult solve_poisson(const PolygonalMesh& m, const ScalarField2D& field) {
  std::string why;
  if (!is_conforming(m, &why)) throw ValidationError("mesh boundary is not the unit square: " + why);
  const double area = total_area(m);
  if (std::fabs(area - 1.0) > 1e-9) throw ValidationError("mesh does not cover the unit square (area " + std::to_string(area) + ")");

  const SparseMatrix s = assemble(m);
  const auto n = static_cast<Eigen::Index>(m.num_vertices());
  const auto on_boundary = boundary_vertices(m);

  Eigen::VectorXd load = Eigen::VectorXd::Zero(n), exact(n);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const Polygon2 poly = m.cell_polygon(c);
    const double share = signed_area(poly) * field.rhs(area_centroid(poly)) / static_cast<double>(poly.size());
    for (auto v : m.cells[c]) load(static_cast<Eigen::Index>(v)) += share;
  }
  for (Eigen::Index i = 0; i < n; ++i) exact(i) = field.value(m.vertices[static_cast<std::size_t>(i)]);

  std::vector<Eigen::Index> interior_of(static_cast<std::size_t>(n), -1);
  Eigen::Index ni = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!on_boundary[static_cast<std::size_t>(i)]) interior_of[static_cast<std::size_t>(i)] = ni++;
  }

  Eigen::VectorXd u_h = exact;
  VemResult r;
  r.interior_dofs = static_cast<std::size_t>(ni);
  if (ni > 0) {
    // Symmetric elimination: keep S_II, move S_IB u_B to the right-hand side.
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(ni);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ii = interior_of[static_cast<std::size_t>(i)];
      if (ii >= 0) rhs(ii) = load(i);
    }
    for (Eigen::Index j = 0; j < s.outerSize(); ++j) {
      const auto jj = interior_of[static_cast<std::size_t>(j)];
      for (SparseMatrix::InnerIterator it(s, j); it; ++it) {
        const auto ii = interior_of[static_cast<std::size_t>(it.row())];
        if (ii < 0) continue;
        if (jj >= 0) {
          trip.emplace_back(static_cast<int>(ii), static_cast<int>(jj), it.value());
        } else {
          rhs(ii) -= it.value() * exact(j);
        }
      }
    }
    SparseMatrix a(ni, ni);
    a.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd x;
    if (ni <= 50000) {
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
      if (ldlt.info() != Eigen::Success) throw NumericalError("reduced stiffness matrix is singular");
      x = ldlt.solve(rhs);
      if (ldlt.info() != Eigen::Success || !x.allFinite() || (ldlt.vectorD().array() <= 0).any()) {
        throw NumericalError("reduced stiffness matrix is singular");
      }
    } else {
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg(a);
      cg.setTolerance(1e-12);
      x = cg.solve(rhs);
      if (cg.info() != Eigen::Success) throw NumericalError("conjugate gradients did not converge");
    }
    const double res = (a * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
    if (res > 1e-10) throw NumericalError("linear solve residual " + std::to_string(res) + " above 1e-10");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ii = interior_of[static_cast<std::size_t>(i)];
      if (ii >= 0) u_h(i) = x(ii);
    }
    r.kappa1 = condition_number_1(a);
  } else {
    r.kappa1 = {1.0, true};
  }

  const Eigen::VectorXd diff = exact - u_h;
  const double un = std::sqrt(std::max(0.0, exact.dot(s * exact)));
  r.eps_S = un > 0 ? std::sqrt(std::max(0.0, diff.dot(s * diff))) / un : 0.0;
  const double uinf = exact.cwiseAbs().maxCoeff();
  r.eps_inf = uinf > 0 ? diff.cwiseAbs().maxCoeff() / uinf : 0.0;
  r.u_h.assign(u_h.data(), u_h.data() + n);
  r.u.assign(exact.data(), exact.data() + n);
  logger().debug("vem: {} interior unknowns, kappa1 {:.6g}, eps_S {:.3g}, eps_inf {:.3g}", ni, r.kappa1.value, r.eps_S,
                 r.eps_inf);
  return r;
}

}  // namespace pemq
