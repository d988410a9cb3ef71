#ifndef LEMSFEM_POLYBASIS_HPP_
#define LEMSFEM_POLYBASIS_HPP_

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lemsfem/common.hpp"
#include "lemsfem/mesh.hpp"

namespace lemsfem {

/// L_k(x) by the three-term recursion (k+1) L_{k+1} = (2k+1) x L_k - k L_{k-1}.
double legendre(int k, double x);

/// L_k'(x).
double legendre_derivative(int k, double x);

/// Polynomial in the Legendre basis on [-1, 1].
struct Polynomial1D {
  std::vector<double> coefficients;  // coefficient of L_k at index k
  double operator()(double x) const;
};

/**
 * k-th internal (boundary-adapted) function on [-1, 1]:
 *   eta_k = (L_k - L_{k-2}) / sqrt(2 (2k - 1)),  k >= 2.
 * Vanishes at both end points; eta_k' = sqrt((2k-1)/2) L_{k-1}, so the
 * derivatives are orthonormal in L^2(-1, 1).
 */
double internal_basis(int k, double x);

/// eta_k as a Legendre series.
Polynomial1D internal_basis_polynomial(int k);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  double integrate(const std::function<double(double)>& f) const;
};

/// n-point Gauss-Lobatto rule on [-1, 1], exact up to degree 2n - 3.
QuadratureRule gauss_lobatto(int n);

/// n-point Gauss-Legendre rule on [-1, 1], exact up to degree 2n - 1.
QuadratureRule gauss_legendre(int n);

/// Weighted points in physical space.
struct Quadrature2D {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

/**
 * Polynomials of degree <= M on the reference element of `kind`: partial degree
 * on quads, total degree on triangles.
 *
 * Quad basis: tensor products of Lagrange polynomials at the M+1 Gauss-Lobatto
 * points mapped to [0, 1]; P_i is 1 at the i-th tensor point (x index fastest)
 * and 0 at the others. Triangle basis: monomials orthonormalized once in
 * L^2(K_ref) through a Cholesky factor of their exact Gram matrix.
 */
class BulkPolyBasis {
 public:
  BulkPolyBasis(ElementKind kind, int degree);

  ElementKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int size() const { return size_; }

  /// All basis values at reference point xi.
  Eigen::VectorXd evaluate(const Vec2& xi) const;
  /// Value of P_i at reference point xi.
  double evaluate(int i, const Vec2& xi) const { return evaluate(xi)(i); }
  /// All basis values at a physical point of element el.
  Eigen::VectorXd evaluate_physical(const Element& el, const Vec2& x) const {
    return evaluate(el.pull_back(x));
  }

  /// Dimension of the space: (M+1)^2 on quads, (M+1)(M+2)/2 on triangles.
  static int dimension(ElementKind kind, int degree);

 private:
  ElementKind kind_;
  int degree_;
  int size_;
  std::vector<double> lobatto_;       // quad: nodes mapped to [0, 1]
  std::vector<double> lagrange_den_;  // quad: Lagrange denominators
  Eigen::MatrixXd monomial_to_basis_; // triangle: rows = basis, cols = monomials
  std::vector<std::pair<int, int>> exponents_;
};

/// Composite quadrature over the fine triangles of a patch (1-point centroid or 3-point edge-midpoint rule).
Quadrature2D patch_quadrature(const FineMesh& fine, const Patch& patch, int points_per_triangle);

/// Tensor Gauss-Legendre rule with n points per direction on a parallelogram or triangle element.
Quadrature2D element_gauss_quadrature(ElementKind kind, const Element& el, int n);

/**
 * L^2(K) projection of f onto the bulk polynomial space, in BulkPolyBasis
 * coefficients, with every integral taken by the given quadrature.
 * Throws NumericalError if the Gram matrix is singular under that rule.
 */
Eigen::VectorXd l2_project_element(const std::function<double(const Vec2&)>& f, const Element& el,
                                   const Quadrature2D& quad, const BulkPolyBasis& basis);

/// Sum of coefficients times basis values at a physical point.
double evaluate_projection(const Eigen::VectorXd& coefficients, const Element& el, const BulkPolyBasis& basis,
                           const Vec2& x);

/**
 * L^2(-1, 1) projection of g onto span{eta_2, ..., eta_N}; entry j is the
 * coefficient of eta_{j+2}. N = 1 gives an empty vector (the zero function).
 * The L^2(e) projection is the same since the edge map is affine.
 */
Eigen::VectorXd l2_project_edge_zero(const std::function<double(double)>& g, int degree,
                                     int quadrature_points = 0);

}  // namespace lemsfem

#endif  // LEMSFEM_POLYBASIS_HPP_
