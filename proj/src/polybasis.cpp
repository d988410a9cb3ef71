#include "lemsfem/polybasis.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

namespace lemsfem {

double legendre(int k, double x) {
  if (k < 0) throw InvalidArgument("legendre: degree must be >= 0");
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    double next = ((2.0 * j + 1.0) * x * cur - j * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre_derivative(int k, double x) {
  if (k < 0) throw InvalidArgument("legendre_derivative: degree must be >= 0");
  // L'_{j+1} = L'_{j-1} + (2j+1) L_j
  double d_prev = 0.0, d_cur = 0.0;  // L'_{j-1}, L'_j for j = 0
  if (k == 0) return 0.0;
  double l_prev = 1.0, l_cur = x;    // L_0, L_1
  d_prev = 0.0;                       // L'_0
  d_cur = 1.0;                        // L'_1
  for (int j = 1; j < k; ++j) {
    double d_next = d_prev + (2.0 * j + 1.0) * l_cur;
    double l_next = ((2.0 * j + 1.0) * x * l_cur - j * l_prev) / (j + 1.0);
    d_prev = d_cur;
    d_cur = d_next;
    l_prev = l_cur;
    l_cur = l_next;
  }
  return d_cur;
}

double Polynomial1D::operator()(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) sum += coefficients[k] * legendre(static_cast<int>(k), x);
  return sum;
}

double internal_basis(int k, double x) {
  if (k < 2) throw InvalidArgument("internal_basis: degree must be >= 2");
  return (legendre(k, x) - legendre(k - 2, x)) / std::sqrt(2.0 * (2.0 * k - 1.0));
}

Polynomial1D internal_basis_polynomial(int k) {
  if (k < 2) throw InvalidArgument("internal_basis_polynomial: degree must be >= 2");
  Polynomial1D p;
  p.coefficients.assign(static_cast<std::size_t>(k) + 1, 0.0);
  const double c = 1.0 / std::sqrt(2.0 * (2.0 * k - 1.0));
  p.coefficients[static_cast<std::size_t>(k)] = c;
  p.coefficients[static_cast<std::size_t>(k) - 2] = -c;
  return p;
}

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

QuadratureRule gauss_lobatto(int n) {
  if (n < 2) throw InvalidArgument("gauss_lobatto: need at least 2 points");
  const int degree = n - 1;
  QuadratureRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  // interior nodes: roots of L'_{n-1}, Newton from Chebyshev-Gauss-Lobatto points
  for (int i = 1; i <= (n - 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / degree);
    for (int it = 0; it < 100; ++it) {
      double d1 = legendre_derivative(degree, x);
      double d2 = (2.0 * x * d1 - degree * (degree + 1.0) * legendre(degree, x)) / (1.0 - x * x);
      double dx = d1 / d2;
      x -= dx;
      if (std::abs(dx) < 1e-14) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -x;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double l = legendre(degree, rule.nodes[static_cast<std::size_t>(i)]);
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / (n * (n - 1.0) * l * l);
  }
  return rule;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least 1 point");
  QuadratureRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double dx = legendre(n, x) / legendre_derivative(n, x);
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double d = legendre_derivative(n, x);
    double w = 2.0 / ((1.0 - x * x) * d * d);
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

int BulkPolyBasis::dimension(ElementKind kind, int degree) {
  if (degree < 0) throw InvalidArgument("bulk basis degree must be >= 0");
  return kind == ElementKind::quad ? (degree + 1) * (degree + 1) : (degree + 1) * (degree + 2) / 2;
}

BulkPolyBasis::BulkPolyBasis(ElementKind kind, int degree)
    : kind_(kind), degree_(degree), size_(dimension(kind, degree)) {
  if (kind_ == ElementKind::quad) {
    if (degree_ == 0) {
      lobatto_ = {0.5};
      lagrange_den_ = {1.0};
      return;
    }
    for (double x : gauss_lobatto(degree_ + 1).nodes) lobatto_.push_back(0.5 * (x + 1.0));
    for (std::size_t j = 0; j < lobatto_.size(); ++j) {
      double den = 1.0;
      for (std::size_t m = 0; m < lobatto_.size(); ++m)
        if (m != j) den *= lobatto_[j] - lobatto_[m];
      lagrange_den_.push_back(den);
    }
    return;
  }

  for (int total = 0; total <= degree_; ++total)
    for (int b = 0; b <= total; ++b) exponents_.emplace_back(total - b, b);
  // exact integral of x^a y^b over the unit right triangle: a! b! / (a+b+2)!
  auto moment = [](int a, int b) {
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
  };
  Eigen::MatrixXd gram(size_, size_);
  for (int i = 0; i < size_; ++i)
    for (int j = 0; j < size_; ++j)
      gram(i, j) = moment(exponents_[static_cast<std::size_t>(i)].first + exponents_[static_cast<std::size_t>(j)].first,
                          exponents_[static_cast<std::size_t>(i)].second + exponents_[static_cast<std::size_t>(j)].second);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("triangle bulk basis: monomial Gram matrix not SPD");
  Eigen::MatrixXd lower = llt.matrixL();
  monomial_to_basis_ = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(size_, size_));
}

Eigen::VectorXd BulkPolyBasis::evaluate(const Vec2& xi) const {
  Eigen::VectorXd out(size_);
  if (kind_ == ElementKind::quad) {
    const std::size_t n = lobatto_.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t j = 0; j < n; ++j) {
      double px = 1.0, py = 1.0;
      for (std::size_t m = 0; m < n; ++m) {
        if (m == j) continue;
        px *= xi.x() - lobatto_[m];
        py *= xi.y() - lobatto_[m];
      }
      lx[j] = px / lagrange_den_[j];
      ly[j] = py / lagrange_den_[j];
    }
    for (std::size_t iy = 0; iy < n; ++iy)
      for (std::size_t ix = 0; ix < n; ++ix) out(static_cast<Eigen::Index>(iy * n + ix)) = lx[ix] * ly[iy];
    return out;
  }
  Eigen::VectorXd mono(size_);
  for (int i = 0; i < size_; ++i) {
    const auto& [a, b] = exponents_[static_cast<std::size_t>(i)];
    mono(i) = std::pow(xi.x(), a) * std::pow(xi.y(), b);
  }
  out.noalias() = monomial_to_basis_ * mono;
  return out;
}

Quadrature2D patch_quadrature(const FineMesh& fine, const Patch& patch, int points_per_triangle) {
  if (points_per_triangle != 1 && points_per_triangle != 3)
    throw InvalidArgument("patch_quadrature: rule must have 1 or 3 points");
  Quadrature2D q;
  for (int t : patch.global_triangles) {
    const auto& tri = fine.triangles[static_cast<std::size_t>(t)];
    const Vec2& a = fine.vertices[static_cast<std::size_t>(tri[0])];
    const Vec2& b = fine.vertices[static_cast<std::size_t>(tri[1])];
    const Vec2& c = fine.vertices[static_cast<std::size_t>(tri[2])];
    double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    if (points_per_triangle == 1) {
      q.points.push_back((a + b + c) / 3.0);
      q.weights.push_back(area);
    } else {
      for (const Vec2& m : {Vec2(0.5 * (a + b)), Vec2(0.5 * (b + c)), Vec2(0.5 * (c + a))}) {
        q.points.push_back(m);
        q.weights.push_back(area / 3.0);
      }
    }
  }
  return q;
}

Quadrature2D element_gauss_quadrature(ElementKind kind, const Element& el, int n) {
  QuadratureRule g = gauss_legendre(n);
  const double det = std::abs(el.jacobian.determinant());
  Quadrature2D q;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double u = 0.5 * (g.nodes[static_cast<std::size_t>(i)] + 1.0);
      double v = 0.5 * (g.nodes[static_cast<std::size_t>(j)] + 1.0);
      double w = 0.25 * g.weights[static_cast<std::size_t>(i)] * g.weights[static_cast<std::size_t>(j)] * det;
      if (kind == ElementKind::quad) {
        q.points.push_back(el.map(Vec2(u, v)));
        q.weights.push_back(w);
      } else {
        // collapsed square -> triangle
        q.points.push_back(el.map(Vec2(u, v * (1.0 - u))));
        q.weights.push_back(w * (1.0 - u));
      }
    }
  }
  return q;
}

Eigen::VectorXd l2_project_element(const std::function<double(const Vec2&)>& f, const Element& el,
                                   const Quadrature2D& quad, const BulkPolyBasis& basis) {
  const int n = basis.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t q = 0; q < quad.points.size(); ++q) {
    Eigen::VectorXd p = basis.evaluate_physical(el, quad.points[q]);
    gram.noalias() += quad.weights[q] * p * p.transpose();
    rhs += quad.weights[q] * f(quad.points[q]) * p;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
    throw NumericalError("l2_project_element: singular Gram matrix on element " + std::to_string(el.id));
  return llt.solve(rhs);
}

double evaluate_projection(const Eigen::VectorXd& coefficients, const Element& el, const BulkPolyBasis& basis,
                           const Vec2& x) {
  return coefficients.dot(basis.evaluate_physical(el, x));
}

Eigen::VectorXd l2_project_edge_zero(const std::function<double(double)>& g, int degree, int quadrature_points) {
  if (degree < 1) throw InvalidArgument("l2_project_edge_zero: degree must be >= 1");
  const int n = degree - 1;
  if (n == 0) return Eigen::VectorXd();
  QuadratureRule rule = gauss_legendre(quadrature_points > 0 ? quadrature_points : std::max(degree + 2, 48));
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd eta(n);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    for (int k = 0; k < n; ++k) eta(k) = internal_basis(k + 2, rule.nodes[q]);
    gram.noalias() += rule.weights[q] * eta * eta.transpose();
    rhs += rule.weights[q] * g(rule.nodes[q]) * eta;
  }
  return gram.llt().solve(rhs);
}

}  // namespace lemsfem
