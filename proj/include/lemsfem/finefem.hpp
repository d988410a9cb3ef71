#ifndef LEMSFEM_FINEFEM_HPP_
#define LEMSFEM_FINEFEM_HPP_

#include <array>
#include <map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "lemsfem/common.hpp"
#include "lemsfem/fields.hpp"
#include "lemsfem/mesh.hpp"

namespace lemsfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal values of a P1 function, one per vertex of the mesh it lives on.
using FineFunction = Eigen::VectorXd;

/// Per-triangle rule used for A and f: centroid, or the three edge midpoints.
enum class CellRule { centroid, edge_midpoints };

/// A triangulation with its own vertex numbering; `boundary` marks the
/// vertices where Dirichlet data is required for local solves.
struct TriangleMesh {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;

  std::size_t size() const { return points.size(); }
};

/// The global fine mesh with the domain boundary marked.
TriangleMesh global_mesh(const FineMesh& fine);
/// One coarse element's patch in local numbering, its element boundary marked.
TriangleMesh patch_mesh(const FineMesh& fine, const Patch& patch);

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// P1 gradients of the three barycentric functions (constant on the triangle).
std::array<Vec2, 3> p1_gradients(const Vec2& a, const Vec2& b, const Vec2& c);

/// Mean of A over the triangle under `rule`.
Mat2 cell_coefficient(const CoefficientField& coeff, const Vec2& a, const Vec2& b, const Vec2& c, CellRule rule);

/// Element matrix int_T grad(psi_j)^T A grad(psi_i); exactly symmetric.
Eigen::Matrix3d p1_stiffness(const Vec2& a, const Vec2& b, const Vec2& c, const Mat2& coeff);

/// Element load int_T f psi_i under `rule`.
Eigen::Vector3d p1_load(const Vec2& a, const Vec2& b, const Vec2& c, const ScalarField& f, CellRule rule);

/// Stiffness matrix over all vertices, no boundary conditions.
SparseMatrix stiffness_matrix(const TriangleMesh& mesh, const CoefficientField& coeff, CellRule rule);
Eigen::VectorXd load_vector(const TriangleMesh& mesh, const ScalarField& f, CellRule rule);

/// Reduced system on the free vertices after Dirichlet elimination.
struct SparseSpdSystem {
  SparseMatrix matrix;               // free x free, symmetric
  Eigen::VectorXd rhs;               // lifted right-hand side
  std::vector<int> free_index;       // vertex -> system row, or -1 when constrained
  Eigen::VectorXd constrained;       // full length, Dirichlet values (0 on free vertices)
};

/**
 * Assembles the P1 system of -div(A grad u) = f. Every vertex flagged as
 * boundary must have an entry in `dirichlet`; other entries are also honored.
 * Inhomogeneous data is lifted into the right-hand side.
 */
SparseSpdSystem assemble(const TriangleMesh& mesh, const CoefficientField& coeff, const ScalarField* f,
                         const std::map<int, double>& dirichlet, CellRule rule = CellRule::centroid);

struct SolveResult {
  FineFunction solution;  // full length, Dirichlet values included
  int iterations = 0;
  double residual = 0.0;  // relative residual |b - Ax| / |b|
};

/// Jacobi-preconditioned CG with iteration cap ceil(50 sqrt(n)).
/// Throws NumericalError carrying the final residual on non-convergence.
SolveResult solve_spd(const SparseSpdSystem& system, double rel_tol = 1e-12);

/// Sparse Cholesky solve of the same system.
SolveResult solve_direct(const SparseSpdSystem& system);

/// Scatters a reduced solution back to all vertices.
FineFunction expand(const SparseSpdSystem& system, const Eigen::VectorXd& reduced);

/**
 * Energies on one triangulation: a(v, w) = v^T S w and E(v) = a(v,v)/2 - b^T v,
 * where S and b are assembled with the same rule as `assemble`.
 */
class EnergyForm {
 public:
  EnergyForm(const TriangleMesh& mesh, const CoefficientField& coeff, const ScalarField& f,
             CellRule rule = CellRule::centroid);

  double energy(const FineFunction& v) const;
  double energy_inner(const FineFunction& v, const FineFunction& w) const;
  double energy_norm(const FineFunction& v) const;
  /// Squared H^1 seminorm, sum_T |T| |grad v|^2.
  double h1_seminorm_squared(const FineFunction& v) const;
  /// int f v under the assembly rule.
  double load(const FineFunction& v) const;

  const SparseMatrix& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& load_vector() const { return load_; }
  std::size_t size() const { return static_cast<std::size_t>(load_.size()); }

 private:
  void check(const FineFunction& v) const;

  SparseMatrix stiffness_;
  SparseMatrix laplacian_;
  Eigen::VectorXd load_;
};

/**
 * Reusable Dirichlet solver: factors the block of the stiffness matrix on the
 * non-boundary vertices once, then solves for any boundary trace and load.
 */
class DirichletSolver {
 public:
  DirichletSolver(const TriangleMesh& mesh, const CoefficientField& coeff, CellRule rule = CellRule::centroid);

  /// u with u = trace on boundary vertices and the discrete equation
  /// (S u)_i = load_i on the others. Both arguments are full length.
  FineFunction solve(const Eigen::VectorXd& trace, const Eigen::VectorXd& load) const;
  FineFunction harmonic_extension(const Eigen::VectorXd& trace) const;
  FineFunction zero_trace_solve(const Eigen::VectorXd& load) const;

  const SparseMatrix& stiffness() const { return stiffness_; }
  std::size_t size() const { return free_index_.size(); }
  int interior_count() const { return static_cast<int>(interior_.size()); }

 private:
  SparseMatrix stiffness_;
  SparseMatrix interior_block_;
  SparseMatrix coupling_;  // interior x boundary
  std::vector<int> interior_, boundary_, free_index_;
  Eigen::SimplicialLLT<SparseMatrix> factor_;
};

}  // namespace lemsfem

#endif  // LEMSFEM_FINEFEM_HPP_
