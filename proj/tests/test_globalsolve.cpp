#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "lemsfem/globalsolve.hpp"

using namespace lemsfem;

namespace {

struct Fixture {
  CoarseMesh coarse;
  FineMesh fine;
  CoefficientField coeff;
  ScalarField f;
  LocalProblems problems;
  EnergyForm form;

  Fixture(ElementKind kind, int n, int n_sub, CoefficientField a, ScalarField src)
      : coarse(build_coarse(kind, n, n)),
        fine(refine_to_fine(coarse, n_sub)),
        coeff(std::move(a)),
        f(std::move(src)),
        problems(coarse, fine, coeff),
        form(global_mesh(fine), coeff, f) {}

  FineFunction solve(const DegreeAssignment& d, Part part = Part::total) {
    EnrichedSpace space(problems, d);
    CoarseSolution s = solve_coarse(space, assemble_coarse(space, f));
    return reconstruct(space, s, part);
  }
};

}  // namespace

TEST_CASE("space dimension follows the degree assignment") {
  Fixture fx(ElementKind::quad, 3, 4, periodic_benchmark(0.25), constant_field(-1.0));
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> n(1, 4), m(0, 2);
  for (int trial = 0; trial < 20; ++trial) {
    DegreeAssignment d = DegreeAssignment::uniform(fx.coarse, 1, 0);
    for (int& v : d.edge_degree) v = n(rng);
    for (int& v : d.element_degree) v = m(rng);
    int expect = 4;
    for (int e : fx.coarse.interior_edges()) expect += d.edge_degree[static_cast<std::size_t>(e)] - 1;
    for (int v : d.element_degree) expect += v == 0 ? 0 : (v + 1) * (v + 1);
    EnrichedSpace space(fx.problems, d);
    CHECK(space.size() == expect);
    CHECK(EnrichedSpace::expected_dofs(fx.coarse, d) == expect);
    CHECK(space.interface_size() + space.bubble_size() == space.size());
  }
}

TEST_CASE("space rejects a catalog of the wrong size") {
  Fixture fx(ElementKind::quad, 2, 4, identity_coefficient(), constant_field(-1.0));
  BasisCatalog c = compute_all(fx.problems, DegreeAssignment::uniform(fx.coarse, 2, 0));
  CHECK_THROWS_AS(EnrichedSpace(fx.problems, DegreeAssignment::uniform(fx.coarse, 3, 0), c), InvalidArgument);
}

TEST_CASE("interface matrix is symmetric positive definite") {
  Fixture fx(ElementKind::triangle, 3, 6, periodic_benchmark(0.2), gaussian_benchmark());
  EnrichedSpace space(fx.problems, DegreeAssignment::uniform(fx.coarse, 3, 1));
  CoarseSystems sys = assemble_coarse(space, fx.f);
  Eigen::MatrixXd a(sys.interface_matrix);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(a).info() == Eigen::Success);
  for (std::size_t k = 0; k < sys.bubble_matrices.size(); ++k)
    CHECK((sys.bubble_matrices[k] - sys.bubble_matrices[k].transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("zero source gives a zero solution") {
  Fixture fx(ElementKind::quad, 2, 4, periodic_benchmark(0.25), constant_field(0.0));
  EnrichedSpace space(fx.problems, DegreeAssignment::uniform(fx.coarse, 2, 1));
  CoarseSolution s = solve_coarse(space, assemble_coarse(space, fx.f));
  CHECK(s.coefficients.size() == space.size());
  CHECK(s.coefficients.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.cg_iterations == 0);
}

TEST_CASE("reconstruction splits into bubble and interface parts") {
  Fixture fx(ElementKind::quad, 3, 6, periodic_benchmark(0.15), constant_field(-1.0));
  DegreeAssignment d = DegreeAssignment::uniform(fx.coarse, 3, 1);
  EnrichedSpace space(fx.problems, d);
  CoarseSolution s = solve_coarse(space, assemble_coarse(space, fx.f));
  FineFunction total = reconstruct(space, s, Part::total);
  FineFunction bubble = reconstruct(space, s, Part::bubble);
  FineFunction iface = reconstruct(space, s, Part::interface);
  CHECK((total - bubble - iface).cwiseAbs().maxCoeff() < 1e-15);
  for (std::size_t i = 0; i < fx.fine.vertices.size(); ++i)
    if (fx.fine.on_skeleton[i] || fx.fine.on_domain_boundary[i]) CHECK(bubble(static_cast<Eigen::Index>(i)) == 0.0);

  // interface trace on each interior edge: linear nodal part plus internal modes
  Eigen::VectorXd c = s.coefficients;
  const BasisCatalog& cat = space.catalog();
  for (int e : fx.coarse.interior_edges()) {
    const Edge& edge = fx.coarse.edges[static_cast<std::size_t>(e)];
    double c0 = 0.0, c1 = 0.0;
    int p0 = cat.find(BasisKind::nodal, edge.vertices[0], 0), p1 = cat.find(BasisKind::nodal, edge.vertices[1], 0);
    if (p0 >= 0) c0 = c(p0);
    if (p1 >= 0) c1 = c(p1);
    const auto& verts = fx.fine.edge_vertices[static_cast<std::size_t>(e)];
    int n = static_cast<int>(verts.size()) - 1;
    for (int t = 0; t <= n; ++t) {
      double sc = -1.0 + 2.0 * t / n;
      double expect = c0 * (1 - sc) / 2 + c1 * (1 + sc) / 2;
      for (int k = 2; k <= d.edge_degree[static_cast<std::size_t>(e)]; ++k)
        expect += c(cat.find(BasisKind::edge, e, k)) * internal_basis(k, sc);
      CHECK(iface(verts[static_cast<std::size_t>(t)]) == doctest::Approx(expect).epsilon(1e-10).scale(1e-10));
    }
  }
}

TEST_CASE("decoupled and combined solves agree") {
  Fixture fx(ElementKind::triangle, 3, 6, periodic_benchmark(0.2), gaussian_benchmark());
  EnrichedSpace space(fx.problems, DegreeAssignment::uniform(fx.coarse, 3, 2));
  CoarseSystems sys = assemble_coarse(space, fx.f, true);
  CHECK(sys.has_cross);
  CHECK(sys.cross.cwiseAbs().maxCoeff() < 1e-10 * Eigen::MatrixXd(sys.interface_matrix).cwiseAbs().maxCoeff());
  FineFunction a = reconstruct(space, solve_coarse(space, sys), Part::total);
  FineFunction b = reconstruct(space, solve_combined(space, sys), Part::total);
  CHECK(fx.form.energy_norm(a - b) <= 1e-9 * fx.form.energy_norm(b));
  CHECK_THROWS_AS(solve_combined(space, assemble_coarse(space, fx.f)), InvalidArgument);
}

TEST_CASE("discrete energy decreases as edge degrees grow") {
  Fixture fx(ElementKind::quad, 4, 8, periodic_benchmark(1.0 / 8), constant_field(-1.0));
  double prev = 0.0;
  for (int n = 1; n <= 5; ++n) {
    double e = fx.form.energy(fx.solve(DegreeAssignment::uniform(fx.coarse, n, 0)));
    if (n > 1) CHECK(e <= prev + 1e-14 * std::abs(prev));
    prev = e;
  }
}

TEST_CASE("coefficients match the frozen benchmark snapshot") {
  Fixture fx(ElementKind::quad, 8, 16, periodic_benchmark(1.0 / 16), constant_field(-1.0));
  EnrichedSpace space(fx.problems, DegreeAssignment::uniform(fx.coarse, 4, 0));
  CoarseSolution s = solve_coarse(space, assemble_coarse(space, fx.f));
  std::ifstream in(std::string(LEMSFEM_TEST_DATA) + "/snapshot_eps16_H8_N4.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string dof, label, value;
    std::getline(row, dof, ',');
    std::getline(row, label, ',');
    std::getline(row, value, ',');
    int p = std::stoi(dof);
    REQUIRE(p < space.size());
    CHECK(space.function(p).label() == label);
    CHECK(std::abs(s.coefficients(p) - std::stod(value)) <= 1e-8 * std::max(1.0, std::abs(std::stod(value))));
    ++rows;
  }
  CHECK(rows == space.size());
}
