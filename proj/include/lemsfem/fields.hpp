#ifndef LEMSFEM_FIELDS_HPP_
#define LEMSFEM_FIELDS_HPP_

#include <functional>
#include <string>

#include "lemsfem/common.hpp"

namespace lemsfem {

/// Symmetric positive definite 2x2 field A(x) with declared ellipticity bounds.
struct CoefficientField {
  std::string name;
  std::function<Mat2(const Vec2&)> eval;
  double alpha_min = 1.0;
  double alpha_max = 1.0;
  double oscillation_length = 0.0;  // eps for periodic fields, 0 when not oscillating

  Mat2 operator()(const Vec2& x) const { return eval(x); }
};

/// Scalar field f(x). `sobolev_density(x, l)` returns the sum over multi-indices
/// |alpha| <= l of (d^alpha f)^2 and is only set when f has analytic derivatives.
struct ScalarField {
  std::string name;
  std::function<double(const Vec2&)> eval;
  bool identically_zero = false;
  std::function<double(const Vec2&, int)> sobolev_density;
  int max_sobolev_order = 0;

  double operator()(const Vec2& x) const { return eval(x); }
};

CoefficientField identity_coefficient();
CoefficientField scaled_identity(double factor);

/// a(x/eps, y/eps) I with
/// a(x,y) = (2 + 1.8 sin 2pi x)/(2 + 1.8 cos 2pi y) + (2 + sin 2pi y)/(2 + 1.8 sin 2pi x).
CoefficientField periodic_benchmark(double eps);

/// a(x,y) I from a scalar expression in x and y; bounds are declared by the caller.
CoefficientField expression_coefficient(const std::string& expression, double alpha_min, double alpha_max);

ScalarField constant_field(double value);

/// -10 exp(-80 ((x - 1/2)^2 + (y - 1/2)^2)), with analytic derivatives up to order 2.
ScalarField gaussian_benchmark();

ScalarField expression_field(const std::string& expression);

}  // namespace lemsfem

#endif  // LEMSFEM_FIELDS_HPP_
