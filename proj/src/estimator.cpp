#include "lemsfem/estimator.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "lemsfem/csv.hpp"

namespace lemsfem {

namespace {

const Edge& interior_edge(const CoarseMesh& coarse, int edge, const char* who) {
  if (edge < 0 || static_cast<std::size_t>(edge) >= coarse.edges.size())
    throw InvalidArgument(std::string(who) + ": edge out of range");
  const Edge& e = coarse.edges[static_cast<std::size_t>(edge)];
  if (e.boundary) throw InvalidArgument(std::string(who) + ": edge " + std::to_string(edge) + " is on the boundary");
  return e;
}

Vec2 centroid(const CoarseMesh& coarse, const Element& el) {
  Vec2 c = Vec2::Zero();
  for (int v : el.vertices) c += coarse.vertices[static_cast<std::size_t>(v)];
  return c / static_cast<double>(el.vertices.size());
}

double quadrature_norm(const FineMesh& fine, int element, const std::function<double(const Vec2&)>& density) {
  Quadrature2D q = patch_quadrature(fine, fine.patches[static_cast<std::size_t>(element)], 3);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) sum += q.weights[i] * density(q.points[i]);
  return std::sqrt(std::max(0.0, sum));
}

}  // namespace

int compute_p_e(const CoarseMesh& coarse, int edge, const DegreeAssignment& degrees) {
  const Edge& e = interior_edge(coarse, edge, "compute_p_e");
  int p = std::numeric_limits<int>::max();
  for (int k : e.elements)
    for (int other : coarse.elements[static_cast<std::size_t>(k)].edges)
      if (!coarse.edges[static_cast<std::size_t>(other)].boundary)
        p = std::min(p, degrees.edge_degree[static_cast<std::size_t>(other)]);
  return p;
}

double jump_norm(const CoarseMesh& coarse, const FineMesh& fine, int edge, const FineFunction& v,
                 const CoefficientField& coeff) {
  const Edge& e = interior_edge(coarse, edge, "jump_norm");
  if (static_cast<std::size_t>(v.size()) != fine.vertices.size())
    throw InvalidArgument("jump_norm: function length does not match the fine mesh");
  const int lo = std::min(e.elements[0], e.elements[1]);
  const int hi = std::max(e.elements[0], e.elements[1]);
  const Vec2 p0 = coarse.vertices[static_cast<std::size_t>(e.vertices[0])];
  const Vec2 p1 = coarse.vertices[static_cast<std::size_t>(e.vertices[1])];
  Vec2 nu(p1.y() - p0.y(), p0.x() - p1.x());
  nu /= nu.norm();
  if (nu.dot(centroid(coarse, coarse.elements[static_cast<std::size_t>(hi)]) -
             centroid(coarse, coarse.elements[static_cast<std::size_t>(lo)])) < 0.0)
    nu = -nu;

  double sum = 0.0;
  for (const EdgeSegment& seg : fine.edge_segments[static_cast<std::size_t>(edge)]) {
    const Vec2& a = fine.vertices[static_cast<std::size_t>(seg.a)];
    const Vec2& b = fine.vertices[static_cast<std::size_t>(seg.b)];
    const Mat2 am = coeff(0.5 * (a + b));
    double flux_lo = 0.0, flux_hi = 0.0;
    for (int t : seg.triangles) {
      const auto& tri = fine.triangles[static_cast<std::size_t>(t)];
      auto g = p1_gradients(fine.vertices[static_cast<std::size_t>(tri[0])], fine.vertices[static_cast<std::size_t>(tri[1])],
                            fine.vertices[static_cast<std::size_t>(tri[2])]);
      Vec2 grad = v(tri[0]) * g[0] + v(tri[1]) * g[1] + v(tri[2]) * g[2];
      double flux = nu.dot(am * grad);
      if (fine.element_of[static_cast<std::size_t>(t)] == lo) flux_lo = flux;
      else flux_hi = flux;
    }
    const double jump = flux_hi - flux_lo;
    sum += jump * jump * (b - a).norm();
  }
  return std::sqrt(sum);
}

double bubble_residual(const CoarseMesh& coarse, const FineMesh& fine, int element, const ScalarField& f, int degree,
                       const Eigen::VectorXd& coefficients) {
  if (element < 0 || static_cast<std::size_t>(element) >= coarse.elements.size())
    throw InvalidArgument("bubble_residual: element out of range");
  if (f.identically_zero && coefficients.size() == 0) return 0.0;
  if (degree == 0) return quadrature_norm(fine, element, [&](const Vec2& x) { return f(x) * f(x); });
  const Element& el = coarse.elements[static_cast<std::size_t>(element)];
  BulkPolyBasis basis(coarse.kind, degree);
  if (coefficients.size() != basis.size()) throw InvalidArgument("bubble_residual: coefficient count mismatch");
  return quadrature_norm(fine, element, [&](const Vec2& x) {
    double r = f(x) - coefficients.dot(basis.evaluate_physical(el, x));
    return r * r;
  });
}

double sobolev_norm(const FineMesh& fine, int element, const ScalarField& f, int l) {
  if (l < 0) throw InvalidArgument("sobolev_norm: order must be >= 0");
  if (f.identically_zero) return 0.0;
  if (l == 0 && !f.sobolev_density) return quadrature_norm(fine, element, [&](const Vec2& x) { return f(x) * f(x); });
  if (!f.sobolev_density || l > f.max_sobolev_order)
    throw InvalidArgument("H^" + std::to_string(l) + " norm of f needs analytic derivatives up to order " +
                          std::to_string(l));
  return quadrature_norm(fine, element, [&](const Vec2& x) { return f.sobolev_density(x, l); });
}

EstimatorReport global_estimate(const EnrichedSpace& space, const CoarseSolution& solution, const ScalarField& f,
                                const EstimatorOptions& options, int workers) {
  const LocalProblems& problems = space.problems();
  const CoarseMesh& coarse = problems.coarse();
  const FineMesh& fine = problems.fine();
  const DegreeAssignment& degrees = space.degrees();
  const std::size_t ne = coarse.elements.size();
  const std::size_t ned = coarse.edges.size();

  EstimatorReport r;
  r.eta = options.eta;
  r.element_residual.assign(ne, 0.0);
  r.element_f_norm.assign(ne, 0.0);
  r.residual_terms.assign(ne, 0.0);
  r.element_terms.assign(ne, 0.0);
  r.jump_norms.assign(ned, 0.0);
  r.jump_terms.assign(ned, 0.0);
  r.p_e.assign(ned, 0);
  for (std::size_t e = 0; e < ned; ++e)
    if (!coarse.edges[e].boundary) r.p_e[e] = compute_p_e(coarse, static_cast<int>(e), degrees);

  FineFunction ug = reconstruct(space, solution, Part::interface);
  parallel_for(ned, workers, [&](std::size_t e) {
    if (coarse.edges[e].boundary) return;
    r.jump_norms[e] = jump_norm(coarse, fine, static_cast<int>(e), ug, problems.coefficient());
    r.jump_terms[e] = coarse.edges[e].length / r.p_e[e] * r.jump_norms[e] * r.jump_norms[e];
  });

  parallel_for(ne, workers, [&](std::size_t k) {
    const Element& el = coarse.elements[k];
    const int m = degrees.element_degree[k];
    const int l = k < options.smoothness.size() ? options.smoothness[k] : 0;
    const double hk = el.diameter;
    r.element_f_norm[k] = sobolev_norm(fine, static_cast<int>(k), f, 0);
    Eigen::VectorXd c;
    if (m >= 1) {
      auto [first, count] = space.bubble_range(static_cast<int>(k));
      c = solution.coefficients.segment(first, count);
    }
    r.element_residual[k] = bubble_residual(coarse, fine, static_cast<int>(k), f, m, c);
    if (m == 0) {
      r.residual_terms[k] = hk * hk * r.element_f_norm[k] * r.element_f_norm[k];
    } else {
      const double fl = l == 0 ? r.element_f_norm[k] : sobolev_norm(fine, static_cast<int>(k), f, l);
      r.residual_terms[k] = hk * hk * std::pow(hk, std::min(l, m + 1)) / std::pow(static_cast<double>(m), l) *
                            r.element_residual[k] * fl;
    }
    double weight = 0.0;
    for (int e : el.edges) {
      const Edge& edge = coarse.edges[static_cast<std::size_t>(e)];
      if (edge.boundary) continue;
      const double n = degrees.edge_degree[static_cast<std::size_t>(e)];
      weight += edge.length * hk / (std::pow(n, 1.0 - 2.0 * options.eta) * r.p_e[static_cast<std::size_t>(e)]);
    }
    r.element_terms[k] = r.element_f_norm[k] * r.element_f_norm[k] * weight;
  });

  double first = 0.0, second = 0.0, third = 0.0;
  for (std::size_t k = 0; k < ne; ++k) {
    first += r.residual_terms[k];
    second += r.element_terms[k];
  }
  for (std::size_t e = 0; e < ned; ++e) third += r.jump_terms[e];
  r.E_post = std::sqrt(first + second + third);
  r.E_post_gamma = std::sqrt(second + third);
  return r;
}

namespace {

Localization spread(const std::vector<double>& element_values, const std::vector<double>* edge_values,
                    const CoarseMesh& coarse) {
  Localization out;
  std::vector<double> sq(coarse.edges.size(), 0.0);
  if (edge_values)
    for (std::size_t e = 0; e < sq.size(); ++e)
      if (!coarse.edges[e].boundary) sq[e] = (*edge_values)[e];
  for (std::size_t k = 0; k < coarse.elements.size(); ++k) {
    const int beta = coarse.interior_edge_count(static_cast<int>(k));
    if (beta == 0) {
      out.unassigned += element_values[k];
      continue;
    }
    for (int e : coarse.elements[k].edges)
      if (!coarse.edges[static_cast<std::size_t>(e)].boundary) sq[static_cast<std::size_t>(e)] += element_values[k] / beta;
  }
  out.values.resize(sq.size());
  for (std::size_t e = 0; e < sq.size(); ++e) out.values[e] = std::sqrt(std::max(0.0, sq[e]));
  return out;
}

}  // namespace

Localization localize(const EstimatorReport& report, const CoarseMesh& coarse) {
  if (report.element_terms.size() != coarse.elements.size() || report.jump_terms.size() != coarse.edges.size())
    throw InvalidArgument("localize: report does not belong to this mesh");
  return spread(report.element_terms, &report.jump_terms, coarse);
}

Localization localize_error(const std::vector<double>& element_error_energy, const CoarseMesh& coarse,
                            double denominator) {
  if (element_error_energy.size() != coarse.elements.size())
    throw InvalidArgument("localize_error: one value per element expected");
  if (!(denominator > 0.0)) throw InvalidArgument("localize_error: denominator must be positive");
  std::vector<double> scaled(element_error_energy.size());
  for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = element_error_energy[k] / denominator;
  Localization out = spread(scaled, nullptr, coarse);
  return out;
}

Effectivity effectivity_map(const std::vector<double>& estimator, const std::vector<double>& error,
                            const CoarseMesh& coarse) {
  if (estimator.size() != coarse.edges.size() || error.size() != coarse.edges.size())
    throw InvalidArgument("effectivity_map: one value per edge expected");
  Effectivity out;
  out.ratio.assign(coarse.edges.size(), std::numeric_limits<double>::quiet_NaN());
  out.infinite.assign(coarse.edges.size(), false);
  for (std::size_t e = 0; e < coarse.edges.size(); ++e) {
    if (coarse.edges[e].boundary) continue;
    if (estimator[e] == 0.0) {
      if (error[e] == 0.0) {
        out.ratio[e] = 1.0;
      } else {
        out.ratio[e] = std::numeric_limits<double>::infinity();
        out.infinite[e] = true;
      }
    } else {
      out.ratio[e] = error[e] / estimator[e];
    }
  }
  return out;
}

void write_error_map(std::ostream& os, const CoarseMesh& coarse, const std::vector<double>& error,
                     const std::vector<double>& estimator) {
  Effectivity eff = effectivity_map(estimator, error, coarse);
  os << "edge_id,x0,y0,x1,y1,local_error,local_estimator,log10_ratio\n";
  for (std::size_t e = 0; e < coarse.edges.size(); ++e) {
    const Edge& edge = coarse.edges[e];
    if (edge.boundary) continue;
    const Vec2& a = coarse.vertices[static_cast<std::size_t>(edge.vertices[0])];
    const Vec2& b = coarse.vertices[static_cast<std::size_t>(edge.vertices[1])];
    os << e << ',' << format_double(a.x()) << ',' << format_double(a.y()) << ',' << format_double(b.x()) << ','
       << format_double(b.y()) << ',' << format_double(error[e]) << ',' << format_double(estimator[e]) << ','
       << format_double(std::log10(eff.ratio[e])) << '\n';
  }
}

}  // namespace lemsfem
