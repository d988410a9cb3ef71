#ifndef LEMSFEM_LOCALBASIS_HPP_
#define LEMSFEM_LOCALBASIS_HPP_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lemsfem/fields.hpp"
#include "lemsfem/finefem.hpp"
#include "lemsfem/mesh.hpp"
#include "lemsfem/polybasis.hpp"

namespace lemsfem {

enum class BasisKind { nodal, edge, bubble };

/**
 * One offline basis function stored as fine nodal values on its support.
 *
 * `index` is 0 for nodal functions, the polynomial degree k >= 2 for edge
 * enrichments and the 1-based bulk polynomial index i for bubbles.
 */
struct BasisFunction {
  BasisKind kind = BasisKind::nodal;
  int entity = 0;  // vertex, edge or element id
  int index = 0;
  std::vector<int> support;                   // coarse elements, ascending
  std::vector<Eigen::VectorXd> restrictions;  // per support element, in patch-local numbering
  std::vector<int> global_vertices;           // union of the support patches, ascending
  Eigen::VectorXd global_values;              // values at global_vertices

  /// Full-length fine function (zero outside the support).
  FineFunction to_global(std::size_t fine_vertex_count) const;
  /// "nodal:V", "edge:E:k" or "bubble:K:i".
  std::string label() const;
};

/**
 * Per-element fine problems of one (coarse mesh, fine mesh, coefficient)
 * triple. Each element's stiffness block is factored once and reused for
 * every nodal, edge and bubble solve on that element.
 *
 * Holds references: the meshes and the coefficient must outlive this object.
 */
class LocalProblems {
 public:
  LocalProblems(const CoarseMesh& coarse, const FineMesh& fine, const CoefficientField& coeff,
                CellRule rule = CellRule::centroid, int workers = 1);

  const CoarseMesh& coarse() const { return *coarse_; }
  const FineMesh& fine() const { return *fine_; }
  const CoefficientField& coefficient() const { return *coeff_; }
  CellRule rule() const { return rule_; }
  const TriangleMesh& mesh(int element) const { return meshes_[static_cast<std::size_t>(element)]; }
  const DirichletSolver& solver(int element) const { return *solvers_[static_cast<std::size_t>(element)]; }
  /// Load vector of f on the element's patch, same rule as the stiffness.
  Eigen::VectorXd local_load(int element, const ScalarField& f) const;

 private:
  const CoarseMesh* coarse_;
  const FineMesh* fine_;
  const CoefficientField* coeff_;
  CellRule rule_;
  std::vector<TriangleMesh> meshes_;
  std::vector<std::unique_ptr<DirichletSolver>> solvers_;
};

/// A-harmonic lifting, element by element, of the P1 hat of an interior vertex.
BasisFunction compute_nodal(int vertex, const LocalProblems& problems);

/// A-harmonic lifting on both neighbors of interior edge e of the trace eta_k on e and 0 elsewhere.
BasisFunction compute_edge_enrichment(int edge, int k, const LocalProblems& problems);

/// Zero-trace solutions on element K with right-hand sides P_1 ... P_{N_M} of the bulk basis of degree M >= 1.
std::vector<BasisFunction> compute_bubbles(int element, int degree, const LocalProblems& problems);

/// Single bubble, 1 <= i <= dimension of the bulk space.
BasisFunction compute_bubble(int element, int i, int degree, const LocalProblems& problems);

/// Complete ordered catalog: nodal functions by vertex id, then edge enrichments
/// by (edge id, k), then bubbles by (element id, i).
struct BasisCatalog {
  std::vector<BasisFunction> functions;
  int nodal_count = 0;
  int edge_count = 0;
  int bubble_count = 0;

  int interface_count() const { return nodal_count + edge_count; }
  /// Index of the function with this label, or -1.
  int find(BasisKind kind, int entity, int index) const;
};

BasisCatalog compute_all(const LocalProblems& problems, const DegreeAssignment& degrees, int workers = 1);

/// Writes "x,y,value" rows for every fine vertex of the support.
void write_basis_csv(std::ostream& os, const BasisFunction& phi, const FineMesh& fine);

}  // namespace lemsfem

#endif  // LEMSFEM_LOCALBASIS_HPP_
