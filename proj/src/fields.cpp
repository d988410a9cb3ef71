#include "lemsfem/fields.hpp"

#include <cmath>
#include <numbers>

#include "lemsfem/expression.hpp"

namespace lemsfem {

CoefficientField identity_coefficient() {
  CoefficientField a;
  a.name = "identity";
  a.eval = [](const Vec2&) { return Mat2::Identity(); };
  return a;
}

CoefficientField scaled_identity(double factor) {
  if (!(factor > 0.0)) throw InvalidArgument("scaled_identity: factor must be positive");
  CoefficientField a;
  a.name = "scaled_identity";
  a.eval = [factor](const Vec2&) -> Mat2 { return factor * Mat2::Identity(); };
  a.alpha_min = a.alpha_max = factor;
  return a;
}

CoefficientField periodic_benchmark(double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("periodic_benchmark: eps must be positive");
  CoefficientField a;
  a.name = "periodic_benchmark";
  a.eval = [eps](const Vec2& p) -> Mat2 {
    const double tp = 2.0 * std::numbers::pi;
    double sx = std::sin(tp * p.x() / eps);
    double sy = std::sin(tp * p.y() / eps);
    double cy = std::cos(tp * p.y() / eps);
    double value = (2.0 + 1.8 * sx) / (2.0 + 1.8 * cy) + (2.0 + sy) / (2.0 + 1.8 * sx);
    return value * Mat2::Identity();
  };
  // sampled extrema 1.2480472 and 19.5265183, rounded outward
  a.alpha_min = 1.248;
  a.alpha_max = 19.527;
  a.oscillation_length = eps;
  return a;
}

CoefficientField expression_coefficient(const std::string& expression, double alpha_min, double alpha_max) {
  if (!(alpha_min > 0.0) || alpha_max < alpha_min)
    throw ConfigError("coefficient bounds must satisfy 0 < alpha_min <= alpha_max");
  auto fn = compile_expression(expression);
  CoefficientField a;
  a.name = "expression";
  a.eval = [fn](const Vec2& p) -> Mat2 { return fn(p.x(), p.y()) * Mat2::Identity(); };
  a.alpha_min = alpha_min;
  a.alpha_max = alpha_max;
  return a;
}

ScalarField constant_field(double value) {
  ScalarField f;
  f.name = "constant";
  f.eval = [value](const Vec2&) { return value; };
  f.identically_zero = value == 0.0;
  f.sobolev_density = [value](const Vec2&, int) { return value * value; };
  f.max_sobolev_order = 1 << 20;
  return f;
}

ScalarField gaussian_benchmark() {
  ScalarField f;
  f.name = "gaussian_benchmark";
  f.eval = [](const Vec2& p) {
    double dx = p.x() - 0.5, dy = p.y() - 0.5;
    return -10.0 * std::exp(-80.0 * (dx * dx + dy * dy));
  };
  f.sobolev_density = [](const Vec2& p, int order) {
    double dx = p.x() - 0.5, dy = p.y() - 0.5;
    double g = -10.0 * std::exp(-80.0 * (dx * dx + dy * dy));
    double sum = g * g;
    if (order >= 1) {
      double fx = -160.0 * dx * g, fy = -160.0 * dy * g;
      sum += fx * fx + fy * fy;
    }
    if (order >= 2) {
      double fxx = (-160.0 + 25600.0 * dx * dx) * g;
      double fyy = (-160.0 + 25600.0 * dy * dy) * g;
      double fxy = 25600.0 * dx * dy * g;
      sum += fxx * fxx + fxy * fxy + fyy * fyy;
    }
    return sum;
  };
  f.max_sobolev_order = 2;
  return f;
}

ScalarField expression_field(const std::string& expression) {
  auto fn = compile_expression(expression);
  ScalarField f;
  f.name = "expression";
  f.eval = [fn](const Vec2& p) { return fn(p.x(), p.y()); };
  return f;
}

}  // namespace lemsfem
