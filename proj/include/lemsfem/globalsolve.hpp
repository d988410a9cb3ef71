#ifndef LEMSFEM_GLOBALSOLVE_HPP_
#define LEMSFEM_GLOBALSOLVE_HPP_

#include <vector>

#include <Eigen/Dense>

#include "lemsfem/localbasis.hpp"

namespace lemsfem {

/**
 * The enriched coarse space: interface functions (nodal, then edge modes)
 * followed by bubbles grouped by element. DOF p is catalog entry p.
 */
class EnrichedSpace {
 public:
  EnrichedSpace(const LocalProblems& problems, const DegreeAssignment& degrees, int workers = 1);
  EnrichedSpace(const LocalProblems& problems, const DegreeAssignment& degrees, BasisCatalog catalog);

  /// Interior vertices + sum over interior edges of (N_e - 1) + sum over elements of dim(bulk space of degree M_K).
  static int expected_dofs(const CoarseMesh& coarse, const DegreeAssignment& degrees);

  int size() const { return static_cast<int>(catalog_.functions.size()); }
  int interface_size() const { return catalog_.interface_count(); }
  int bubble_size() const { return catalog_.bubble_count; }
  bool is_bubble(int dof) const { return dof >= interface_size(); }

  const BasisCatalog& catalog() const { return catalog_; }
  const BasisFunction& function(int dof) const { return catalog_.functions[static_cast<std::size_t>(dof)]; }
  const LocalProblems& problems() const { return *problems_; }
  const DegreeAssignment& degrees() const { return degrees_; }

  struct Local {
    int dof;
    int restriction;  // index into the function's restrictions
  };
  /// DOFs whose support contains element K, ascending.
  const std::vector<Local>& element_dofs(int element) const { return element_dofs_[static_cast<std::size_t>(element)]; }
  /// Bubble DOF range [first, first + count) of element K.
  std::pair<int, int> bubble_range(int element) const { return bubble_ranges_[static_cast<std::size_t>(element)]; }

 private:
  void index();

  const LocalProblems* problems_;
  DegreeAssignment degrees_;
  BasisCatalog catalog_;
  std::vector<std::vector<Local>> element_dofs_;
  std::vector<std::pair<int, int>> bubble_ranges_;
};

struct CoarseSystems {
  SparseMatrix interface_matrix;
  Eigen::VectorXd interface_rhs;
  std::vector<Eigen::MatrixXd> bubble_matrices;  // per element, possibly empty
  std::vector<Eigen::VectorXd> bubble_rhs;
  /// a(phi_B, phi_Gamma), rows bubble DOFs (offset by interface_size), only when requested.
  bool has_cross = false;
  Eigen::MatrixXd cross;
};

/// Galerkin matrices from fine-grid inner products, element by element.
CoarseSystems assemble_coarse(const EnrichedSpace& space, const ScalarField& f, bool assemble_cross = false,
                              int workers = 1);

struct CoarseSolution {
  Eigen::VectorXd coefficients;  // over the whole space
  int interface_size = 0;
  int cg_iterations = 0;
  double cg_residual = 0.0;

  Eigen::VectorXd interface_part() const { return coefficients.head(interface_size); }
  Eigen::VectorXd bubble_part() const { return coefficients.tail(coefficients.size() - interface_size); }
};

/// Interface block by Jacobi CG (throws NumericalError on failure), bubble blocks by dense Cholesky.
CoarseSolution solve_coarse(const EnrichedSpace& space, const CoarseSystems& systems, double rel_tol = 1e-12);

/// One sparse Cholesky solve of the full matrix including the cross blocks.
CoarseSolution solve_combined(const EnrichedSpace& space, const CoarseSystems& systems);

enum class Part { bubble, interface, total };

/// Sum of coefficient times basis values on the global fine mesh.
FineFunction reconstruct(const EnrichedSpace& space, const CoarseSolution& solution, Part which);

}  // namespace lemsfem

#endif  // LEMSFEM_GLOBALSOLVE_HPP_
