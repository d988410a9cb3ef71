#include "lemsfem/globalsolve.hpp"

#include <Eigen/Cholesky>

namespace lemsfem {

EnrichedSpace::EnrichedSpace(const LocalProblems& problems, const DegreeAssignment& degrees, int workers)
    : EnrichedSpace(problems, degrees, compute_all(problems, degrees, workers)) {}

EnrichedSpace::EnrichedSpace(const LocalProblems& problems, const DegreeAssignment& degrees, BasisCatalog catalog)
    : problems_(&problems), degrees_(degrees), catalog_(std::move(catalog)) {
  degrees_.validate(problems.coarse());
  const int expected = expected_dofs(problems.coarse(), degrees_);
  if (size() != expected)
    throw InvalidArgument("EnrichedSpace: catalog has " + std::to_string(size()) + " functions, degrees require " +
                          std::to_string(expected));
  index();
}

int EnrichedSpace::expected_dofs(const CoarseMesh& coarse, const DegreeAssignment& degrees) {
  int n = static_cast<int>(coarse.interior_vertices().size());
  for (int e : coarse.interior_edges()) n += degrees.edge_degree[static_cast<std::size_t>(e)] - 1;
  for (const Element& el : coarse.elements) {
    int m = degrees.element_degree[static_cast<std::size_t>(el.id)];
    if (m >= 1) n += BulkPolyBasis::dimension(coarse.kind, m);
  }
  return n;
}

void EnrichedSpace::index() {
  const std::size_t ne = problems_->coarse().elements.size();
  element_dofs_.assign(ne, {});
  bubble_ranges_.assign(ne, {0, 0});
  for (int p = 0; p < size(); ++p) {
    const BasisFunction& phi = function(p);
    if ((phi.kind == BasisKind::bubble) != (p >= interface_size()))
      throw InvalidArgument("EnrichedSpace: catalog is not ordered interface-first");
    for (std::size_t s = 0; s < phi.support.size(); ++s)
      element_dofs_[static_cast<std::size_t>(phi.support[s])].push_back({p, static_cast<int>(s)});
    if (phi.kind == BasisKind::bubble) {
      auto& range = bubble_ranges_[static_cast<std::size_t>(phi.entity)];
      if (range.second == 0) range.first = p;
      else if (range.first + range.second != p)
        throw InvalidArgument("EnrichedSpace: bubbles of element " + std::to_string(phi.entity) + " not contiguous");
      ++range.second;
    }
  }
}

CoarseSystems assemble_coarse(const EnrichedSpace& space, const ScalarField& f, bool assemble_cross, int workers) {
  const LocalProblems& problems = space.problems();
  const std::size_t ne = problems.coarse().elements.size();
  const int ni = space.interface_size();

  struct ElementBlock {
    Eigen::MatrixXd a;  // over element_dofs
    Eigen::VectorXd b;
  };
  std::vector<ElementBlock> blocks(ne);
  parallel_for(ne, workers, [&](std::size_t k) {
    const auto& dofs = space.element_dofs(static_cast<int>(k));
    const auto nv = static_cast<Eigen::Index>(problems.mesh(static_cast<int>(k)).size());
    Eigen::MatrixXd r(nv, static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t j = 0; j < dofs.size(); ++j)
      r.col(static_cast<Eigen::Index>(j)) =
          space.function(dofs[j].dof).restrictions[static_cast<std::size_t>(dofs[j].restriction)];
    Eigen::MatrixXd sr = problems.solver(static_cast<int>(k)).stiffness() * r;
    blocks[k].a = r.transpose() * sr;
    blocks[k].b = r.transpose() * problems.local_load(static_cast<int>(k), f);
  });

  CoarseSystems out;
  out.bubble_matrices.resize(ne);
  out.bubble_rhs.resize(ne);
  out.interface_rhs = Eigen::VectorXd::Zero(ni);
  if (assemble_cross) {
    out.has_cross = true;
    out.cross = Eigen::MatrixXd::Zero(space.bubble_size(), ni);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t k = 0; k < ne; ++k) {
    const auto& dofs = space.element_dofs(static_cast<int>(k));
    auto [first, count] = space.bubble_range(static_cast<int>(k));
    out.bubble_matrices[k] = Eigen::MatrixXd::Zero(count, count);
    out.bubble_rhs[k] = Eigen::VectorXd::Zero(count);
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      const int p = dofs[i].dof;
      const auto ii = static_cast<Eigen::Index>(i);
      if (p < ni) out.interface_rhs(p) += blocks[k].b(ii);
      else out.bubble_rhs[k](p - first) = blocks[k].b(ii);
      for (std::size_t j = 0; j < dofs.size(); ++j) {
        const int q = dofs[j].dof;
        const double v = blocks[k].a(ii, static_cast<Eigen::Index>(j));
        if (p < ni && q < ni) triplets.emplace_back(p, q, v);
        else if (p >= ni && q >= ni) out.bubble_matrices[k](p - first, q - first) = v;
        else if (assemble_cross && p >= ni) out.cross(p - ni, q) += v;
      }
    }
  }
  out.interface_matrix.resize(ni, ni);
  out.interface_matrix.setFromTriplets(triplets.begin(), triplets.end());
  // exact symmetry regardless of summation order
  SparseMatrix t = out.interface_matrix.transpose();
  out.interface_matrix = 0.5 * (out.interface_matrix + t);
  return out;
}

namespace {

SparseSpdSystem unconstrained(const SparseMatrix& a, const Eigen::VectorXd& b) {
  SparseSpdSystem sys;
  sys.matrix = a;
  sys.rhs = b;
  sys.free_index.resize(static_cast<std::size_t>(b.size()));
  for (std::size_t i = 0; i < sys.free_index.size(); ++i) sys.free_index[i] = static_cast<int>(i);
  sys.constrained = Eigen::VectorXd::Zero(b.size());
  return sys;
}

}  // namespace

CoarseSolution solve_coarse(const EnrichedSpace& space, const CoarseSystems& systems, double rel_tol) {
  CoarseSolution sol;
  sol.interface_size = space.interface_size();
  sol.coefficients = Eigen::VectorXd::Zero(space.size());
  if (sol.interface_size > 0) {
    SolveResult r = solve_spd(unconstrained(systems.interface_matrix, systems.interface_rhs), rel_tol);
    sol.coefficients.head(sol.interface_size) = r.solution;
    sol.cg_iterations = r.iterations;
    sol.cg_residual = r.residual;
  }
  const std::size_t ne = space.problems().coarse().elements.size();
  for (std::size_t k = 0; k < ne; ++k) {
    auto [first, count] = space.bubble_range(static_cast<int>(k));
    if (count == 0) continue;
    Eigen::LLT<Eigen::MatrixXd> llt(systems.bubble_matrices[k]);
    if (llt.info() != Eigen::Success)
      throw NumericalError("bubble system of element " + std::to_string(k) + " is not positive definite");
    sol.coefficients.segment(first, count) = llt.solve(systems.bubble_rhs[k]);
  }
  return sol;
}

CoarseSolution solve_combined(const EnrichedSpace& space, const CoarseSystems& systems) {
  if (!systems.has_cross) throw InvalidArgument("solve_combined: cross blocks were not assembled");
  const int ni = space.interface_size();
  const int n = space.size();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs(n);
  rhs.head(ni) = systems.interface_rhs;
  for (int c = 0; c < systems.interface_matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(systems.interface_matrix, c); it; ++it)
      triplets.emplace_back(static_cast<int>(it.row()), c, it.value());
  for (std::size_t k = 0; k < systems.bubble_matrices.size(); ++k) {
    auto [first, count] = space.bubble_range(static_cast<int>(k));
    for (int i = 0; i < count; ++i) {
      rhs(first + i) = systems.bubble_rhs[k](i);
      for (int j = 0; j < count; ++j) triplets.emplace_back(first + i, first + j, systems.bubble_matrices[k](i, j));
    }
  }
  for (int i = 0; i < space.bubble_size(); ++i)
    for (int j = 0; j < ni; ++j) {
      const double v = systems.cross(i, j);
      if (v == 0.0) continue;
      triplets.emplace_back(ni + i, j, v);
      triplets.emplace_back(j, ni + i, v);
    }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  SolveResult r = solve_direct(unconstrained(a, rhs));
  CoarseSolution sol;
  sol.interface_size = ni;
  sol.coefficients = r.solution;
  sol.cg_residual = r.residual;
  return sol;
}

FineFunction reconstruct(const EnrichedSpace& space, const CoarseSolution& solution, Part which) {
  if (solution.coefficients.size() != space.size())
    throw InvalidArgument("reconstruct: coefficient vector does not match the space");
  if (which == Part::total)
    return reconstruct(space, solution, Part::bubble) + reconstruct(space, solution, Part::interface);
  const FineMesh& fine = space.problems().fine();
  FineFunction u = FineFunction::Zero(static_cast<Eigen::Index>(fine.vertices.size()));
  std::vector<bool> written(fine.vertices.size(), false);
  const std::size_t ne = space.problems().coarse().elements.size();
  for (std::size_t k = 0; k < ne; ++k) {
    const Patch& patch = fine.patches[k];
    Eigen::VectorXd local = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(patch.vertices.size()));
    for (const auto& d : space.element_dofs(static_cast<int>(k))) {
      if (space.is_bubble(d.dof) != (which == Part::bubble)) continue;
      local += solution.coefficients(d.dof) *
               space.function(d.dof).restrictions[static_cast<std::size_t>(d.restriction)];
    }
    // shared skeleton vertices carry identical traces from every side; the first element wins
    for (std::size_t j = 0; j < patch.vertices.size(); ++j) {
      const int g = patch.vertices[j];
      if (written[static_cast<std::size_t>(g)]) continue;
      written[static_cast<std::size_t>(g)] = true;
      u(g) = local(static_cast<Eigen::Index>(j));
    }
  }
  return u;
}

}  // namespace lemsfem
