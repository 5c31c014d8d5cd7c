#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pemq/geometry.hpp"
#include "pemq/mesh.hpp"

namespace pemq {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Franke's test function, the manufactured solution of the Poisson problem.
/// The second exponent is -(9x+1)^2/49 - (9y+1)/10, with the y term unsquared.
double franke(Point2 p);
/// -Laplacian of franke, differentiated analytically.
double franke_rhs(Point2 p);

/// Exact solution u and right-hand side f = -Laplacian(u).
struct ScalarField2D {
  std::function<double(Point2)> value;
  std::function<double(Point2)> rhs;
};

ScalarField2D franke_field();

/// Lowest-order VEM element matrix: consistency term plus the identity-scaled
/// stabilisation (I - Pi)^T (I - Pi) with unit coefficient.
Eigen::MatrixXd local_stiffness(const Polygon2& e);
/// Consistency part only. On triangles this is the linear FEM matrix.
Eigen::MatrixXd local_consistency(const Polygon2& e);

/// Global stiffness S (before boundary conditions). Throws ValidationError
/// naming a degenerate cell.
SparseMatrix assemble(const PolygonalMesh& m);
/// Consistency parts only.
SparseMatrix assemble_consistency(const PolygonalMesh& m);

struct ConditionNumber {
  double value = 0.0;
  bool exact = true;  // false: Hager-Higham estimate of ||S^-1||_1 (a lower bound)
};

inline constexpr Eigen::Index kExactConditionLimit = 2000;

/// kappa_1 = ||S||_1 ||S^-1||_1. Explicit inverse up to kExactConditionLimit
/// unknowns, Hager-Higham estimation beyond. Throws NumericalError when S is
/// singular.
ConditionNumber condition_number_1(const SparseMatrix& s);

struct VemResult {
  std::vector<double> u_h;  // computed, one value per mesh vertex
  std::vector<double> u;    // exact solution at the vertices
  ConditionNumber kappa1;   // of the Dirichlet-reduced matrix
  double eps_S = 0.0;       // ||u - u_h||_S / ||u||_S on the full S
  double eps_inf = 0.0;     // ||u - u_h||_inf / ||u||_inf
  std::size_t interior_dofs = 0;
};

/// Dirichlet problem on the unit square. Boundary vertices take the exact
/// values; the symmetric reduced system is solved by sparse LDL^T (conjugate
/// gradients above 50 000 unknowns). Throws ValidationError when the mesh
/// boundary is not the unit square, NumericalError for singular systems.
VemResult solve_poisson(const PolygonalMesh& m, const ScalarField2D& field = franke_field());

}  // namespace pemq
