#include <doctest.h>

#include <cmath>
#include <random>

#include "lemsfem/finefem.hpp"

using namespace lemsfem;

namespace {

std::map<int, double> zero_boundary(const TriangleMesh& m) {
  std::map<int, double> bc;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.boundary[i]) bc[static_cast<int>(i)] = 0.0;
  return bc;
}

int nearest(const TriangleMesh& m, const Vec2& p) {
  int best = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if ((m.points[i] - p).norm() < (m.points[static_cast<std::size_t>(best)] - p).norm()) best = static_cast<int>(i);
  return best;
}

}  // namespace

TEST_CASE("p1 stiffness of the unit right triangle") {
  Eigen::Matrix3d s = p1_stiffness(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Mat2::Identity());
  Eigen::Matrix3d expect;
  expect << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
  CHECK((s - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(triangle_area(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)) == doctest::Approx(0.5));
  Mat2 a;
  a << 2.0, 0.3, 0.3, 1.0;
  Eigen::Matrix3d t = p1_stiffness(Vec2(0.1, 0.2), Vec2(0.7, 0.1), Vec2(0.3, 0.9), a);
  CHECK(t == t.transpose());
  CHECK(std::abs(t.rowwise().sum().maxCoeff()) < 1e-14);
  Eigen::Vector3d l = p1_load(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), constant_field(3.0), CellRule::edge_midpoints);
  CHECK(l.sum() == doctest::Approx(1.5));
}

TEST_CASE("affine functions are reproduced by the harmonic solve") {
  CoarseMesh c = build_coarse(ElementKind::quad, 1, 1);
  FineMesh f = refine_to_fine(c, 8);
  TriangleMesh m = global_mesh(f);
  std::map<int, double> bc;
  auto g = [](const Vec2& p) { return 0.3 + 2.0 * p.x() - 1.5 * p.y(); };
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.boundary[i]) bc[static_cast<int>(i)] = g(m.points[i]);
  SparseSpdSystem sys = assemble(m, scaled_identity(2.5), nullptr, bc);
  SolveResult r = solve_direct(sys);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(r.solution(static_cast<Eigen::Index>(i)) == doctest::Approx(g(m.points[i])).epsilon(1e-12));
}

TEST_CASE("poisson on the unit square approaches the series solution") {
  CoarseMesh c = build_coarse(ElementKind::quad, 1, 1);
  FineMesh f = refine_to_fine(c, 64);
  TriangleMesh m = global_mesh(f);
  ScalarField one = constant_field(1.0);
  SparseSpdSystem sys = assemble(m, identity_coefficient(), &one, zero_boundary(m));
  SolveResult r = solve_direct(sys);
  // eigenfunction series for -u'' = 1, zero boundary
  CHECK(r.solution(nearest(m, Vec2(0.5, 0.5))) == doctest::Approx(0.07367135326538692).epsilon(1e-3));
  EnergyForm form(m, identity_coefficient(), one);
  CHECK(form.energy(r.solution) == doctest::Approx(-0.017572126867599083).epsilon(1e-3));
  CHECK(form.load(r.solution) == doctest::Approx(0.03514425373519817).epsilon(1e-3));
}

TEST_CASE("cg and direct solves agree") {
  CoarseMesh c = build_coarse(ElementKind::triangle, 2, 2);
  FineMesh f = refine_to_fine(c, 8);
  TriangleMesh m = global_mesh(f);
  ScalarField src = expression_field("sin(3*x) + y");
  CoefficientField a = periodic_benchmark(0.25);
  SparseSpdSystem sys = assemble(m, a, &src, zero_boundary(m), CellRule::edge_midpoints);
  SolveResult d = solve_direct(sys);
  SolveResult it = solve_spd(sys, 1e-12);
  CHECK(it.iterations > 0);
  CHECK(it.residual <= 1e-12);
  CHECK((d.solution - it.solution).norm() <= 1e-9 * d.solution.norm());
  CHECK_THROWS_AS(solve_spd(sys, 0.0), InvalidArgument);
  CHECK_THROWS_AS(solve_spd(sys, -1.0), InvalidArgument);
}

TEST_CASE("energy gap equals half the energy norm of the error") {
  CoarseMesh c = build_coarse(ElementKind::quad, 2, 2);
  FineMesh f = refine_to_fine(c, 6);
  TriangleMesh m = global_mesh(f);
  CoefficientField a = periodic_benchmark(0.5);
  ScalarField src = constant_field(-1.0);
  SolveResult u = solve_direct(assemble(m, a, &src, zero_boundary(m)));
  EnergyForm form(m, a, src);
  std::mt19937 rng(5);
  std::normal_distribution<double> n(0.0, 0.01);
  for (int trial = 0; trial < 10; ++trial) {
    FineFunction v = u.solution;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (!m.boundary[i]) v(static_cast<Eigen::Index>(i)) += n(rng);
    double gap = form.energy(v) - form.energy(u.solution);
    FineFunction d = u.solution - v;
    CHECK(gap == doctest::Approx(0.5 * form.energy_inner(d, d)).epsilon(1e-9));
    CHECK(gap > 0.0);
  }
  CHECK(form.energy_norm(u.solution) == doctest::Approx(std::sqrt(form.energy_inner(u.solution, u.solution))));
}

TEST_CASE("dirichlet solver matches the assembled system") {
  CoarseMesh c = build_coarse(ElementKind::quad, 1, 1);
  FineMesh f = refine_to_fine(c, 10);
  TriangleMesh m = global_mesh(f);
  CoefficientField a = periodic_benchmark(0.3);
  DirichletSolver solver(m, a);
  Eigen::VectorXd trace = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.size()));
  std::map<int, double> bc;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.boundary[i]) {
      trace(static_cast<Eigen::Index>(i)) = std::sin(3 * m.points[i].x()) + m.points[i].y();
      bc[static_cast<int>(i)] = trace(static_cast<Eigen::Index>(i));
    }
  ScalarField src = constant_field(2.0);
  FineFunction u1 = solver.solve(trace, load_vector(m, src, CellRule::centroid));
  FineFunction u2 = solve_direct(assemble(m, a, &src, bc)).solution;
  CHECK((u1 - u2).cwiseAbs().maxCoeff() < 1e-11);
  FineFunction h = solver.harmonic_extension(trace);
  FineFunction z = solver.zero_trace_solve(load_vector(m, src, CellRule::centroid));
  CHECK((h + z - u1).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("missing dirichlet data is rejected") {
  CoarseMesh c = build_coarse(ElementKind::quad, 1, 1);
  TriangleMesh m = global_mesh(refine_to_fine(c, 4));
  CHECK_THROWS_AS(assemble(m, identity_coefficient(), nullptr, {}), InvalidArgument);
}
