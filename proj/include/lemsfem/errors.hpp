#ifndef LEMSFEM_ERRORS_HPP_
#define LEMSFEM_ERRORS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "lemsfem/globalsolve.hpp"

namespace lemsfem {

struct ReferenceOptions {
  bool strict = false;       // under-resolution becomes a ConfigError
  bool iterative = false;    // CG instead of sparse Cholesky
  double rel_tol = 1e-12;    // CG tolerance
};

struct ReferenceSolution {
  FineFunction u;
  double energy = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::string warning;  // non-empty when h > eps/8
};

/// Zero-Dirichlet P1 solve on the whole fine mesh and its energy.
ReferenceSolution reference_solve(const FineMesh& fine, const CoefficientField& coeff, const ScalarField& f,
                                  const EnergyForm& form, CellRule rule = CellRule::centroid,
                                  const ReferenceOptions& options = {});

/// Empty when the fine mesh resolves the coefficient (h <= eps/8), otherwise a message.
std::string resolution_warning(const FineMesh& fine, const CoefficientField& coeff);

struct BubbleReference {
  FineFunction u;  // zero on every coarse element boundary
  double energy = 0.0;
};

/// Independent zero-trace solves of the full problem in every coarse element.
BubbleReference bubble_reference(const LocalProblems& problems, const ScalarField& f, const EnergyForm& form,
                                 int workers = 1);

/// sqrt((E_num - E_star) / (-E_star)). Requires E_star < 0.
double relative_energy_error(double e_num, double e_star);

/// sqrt(a(u - v, u - v) / a(u, u)).
double direct_relative_error(const EnergyForm& form, const FineFunction& u, const FineFunction& v);

/// Relative interface error of a bubble-free solution from energies alone.
/// e_interface_star = E_star - E(u_B,ref) is the energy of the exact interface part.
double interface_relative_error(const EnrichedSpace& space, double e_num, double e_interface_star);

/**
 * |LHS - RHS| / LHS of
 *   a(u - u_H, u - u_H) = a(u_B - u_B,H, u_B - u_B,H) + a(u_G - u_G,H, u_G - u_G,H)
 * with u_G = u - u_B. Zero when LHS vanishes.
 */
double decomposition_check(const EnergyForm& form, const FineFunction& u_ref, const FineFunction& u_ref_bubble,
                           const FineFunction& u_h_bubble, const FineFunction& u_h_interface);

/// a_K(v, v) per coarse element, each restricted to its own patch.
std::vector<double> element_energies(const LocalProblems& problems, const FineFunction& v);

struct ErrorReport {
  double E_star = 0.0;
  double E_num = 0.0;
  double E_rel = 0.0;
  double direct_error = 0.0;
  std::optional<double> E_rel_gamma;  // bubble-free spaces only
  double E_gamma_star = 0.0;
  double decomposition_residual = 0.0;
};

/// All error measures of one coarse solution against the fine reference.
ErrorReport evaluate_errors(const EnrichedSpace& space, const CoarseSolution& solution, const EnergyForm& form,
                            const ReferenceSolution& reference, const BubbleReference& bubble);

}  // namespace lemsfem

#endif  // LEMSFEM_ERRORS_HPP_
