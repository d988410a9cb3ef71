#ifndef LEMSFEM_ESTIMATOR_HPP_
#define LEMSFEM_ESTIMATOR_HPP_

#include <iosfwd>
#include <vector>

#include "lemsfem/globalsolve.hpp"

namespace lemsfem {

/// min N over the edges of the two elements sharing interior edge e. Boundary edges
/// carry no degree and are skipped.
int compute_p_e(const CoarseMesh& coarse, int edge, const DegreeAssignment& degrees);

/**
 * L^2(e) norm of the jump of nu^T A grad v across interior edge e, one fine
 * segment at a time with A at the segment midpoint. nu points from the
 * lower-id element to the higher-id one.
 */
double jump_norm(const CoarseMesh& coarse, const FineMesh& fine, int edge, const FineFunction& v,
                 const CoefficientField& coeff);

/// ||f - sum_i c_i P_i||_{L^2(K)} by the fine 3-point rule, P_i the bulk basis of
/// degree M; ||f||_{L^2(K)} when M = 0.
double bubble_residual(const CoarseMesh& coarse, const FineMesh& fine, int element, const ScalarField& f, int degree,
                       const Eigen::VectorXd& coefficients);

/// ||f||_{H^l(K)} by the fine 3-point rule. l > 0 needs analytic derivatives of f.
double sobolev_norm(const FineMesh& fine, int element, const ScalarField& f, int l);

struct EstimatorOptions {
  double eta = 0.0;
  std::vector<int> smoothness;  // l_K per element; missing entries mean 0
};

struct EstimatorReport {
  double E_post = 0.0;        // full bracket, square-rooted
  double E_post_gamma = 0.0;  // without the element residual sum
  double eta = 0.0;
  std::vector<double> element_residual;  // ||f + div(A grad u_B,H)||_{L^2(K)}
  std::vector<double> element_f_norm;    // ||f||_{L^2(K)}
  std::vector<double> residual_terms;    // per element, first sum
  std::vector<double> element_terms;     // per element, second sum
  std::vector<double> jump_norms;        // per edge, 0 on boundary edges
  std::vector<double> jump_terms;        // per edge, third sum
  std::vector<int> p_e;                  // per edge, 0 on boundary edges
};

EstimatorReport global_estimate(const EnrichedSpace& space, const CoarseSolution& solution, const ScalarField& f,
                                const EstimatorOptions& options = {}, int workers = 1);

struct Localization {
  std::vector<double> values;  // per edge, 0 on boundary edges
  double unassigned = 0.0;     // squared element terms of elements without interior edges
};

/// E_post,Gamma(e): jump term of e plus 1/beta_K of the element term of each neighbor.
Localization localize(const EstimatorReport& report, const CoarseMesh& coarse);

/// Per-edge sqrt(sum_{K containing e} e_K^2 / beta_K / denominator) of element error energies.
Localization localize_error(const std::vector<double>& element_error_energy, const CoarseMesh& coarse,
                            double denominator);

struct Effectivity {
  std::vector<double> ratio;  // error / estimator per edge; NaN on boundary edges
  std::vector<bool> infinite; // estimator zero with nonzero error
};

/// error(e) / estimator(e) over interior edges; 1 when both vanish.
Effectivity effectivity_map(const std::vector<double>& estimator, const std::vector<double>& error,
                            const CoarseMesh& coarse);

/// edge_id,x0,y0,x1,y1,local_error,local_estimator,log10_ratio for every interior edge.
void write_error_map(std::ostream& os, const CoarseMesh& coarse, const std::vector<double>& error,
                     const std::vector<double>& estimator);

}  // namespace lemsfem

#endif  // LEMSFEM_ESTIMATOR_HPP_
