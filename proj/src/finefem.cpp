#include "lemsfem/finefem.hpp"

#include <cmath>
#include <string>

#include <Eigen/IterativeLinearSolvers>

namespace lemsfem {

TriangleMesh global_mesh(const FineMesh& fine) {
  TriangleMesh m;
  m.points = fine.vertices;
  m.triangles = fine.triangles;
  m.boundary = fine.on_domain_boundary;
  return m;
}

TriangleMesh patch_mesh(const FineMesh& fine, const Patch& patch) {
  TriangleMesh m;
  m.points.reserve(patch.vertices.size());
  for (int g : patch.vertices) m.points.push_back(fine.vertices[static_cast<std::size_t>(g)]);
  m.triangles = patch.triangles;
  m.boundary = patch.on_boundary;
  return m;
}

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

std::array<Vec2, 3> p1_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double twice = 2.0 * triangle_area(a, b, c);
  return {Vec2(b.y() - c.y(), c.x() - b.x()) / twice, Vec2(c.y() - a.y(), a.x() - c.x()) / twice,
          Vec2(a.y() - b.y(), b.x() - a.x()) / twice};
}

Mat2 cell_coefficient(const CoefficientField& coeff, const Vec2& a, const Vec2& b, const Vec2& c, CellRule rule) {
  if (rule == CellRule::centroid) return coeff((a + b + c) / 3.0);
  return (coeff(0.5 * (a + b)) + coeff(0.5 * (b + c)) + coeff(0.5 * (c + a))) / 3.0;
}

Eigen::Matrix3d p1_stiffness(const Vec2& a, const Vec2& b, const Vec2& c, const Mat2& coeff) {
  const auto grads = p1_gradients(a, b, c);
  const double area = std::abs(triangle_area(a, b, c));
  Mat2 sym = 0.5 * (coeff + coeff.transpose());
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      k(i, j) = area * grads[static_cast<std::size_t>(i)].dot(sym * grads[static_cast<std::size_t>(j)]);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Eigen::Vector3d p1_load(const Vec2& a, const Vec2& b, const Vec2& c, const ScalarField& f, CellRule rule) {
  const double area = std::abs(triangle_area(a, b, c));
  if (rule == CellRule::centroid) return Eigen::Vector3d::Constant(f((a + b + c) / 3.0) * area / 3.0);
  // edge-midpoint rule: each midpoint carries weight |T|/3 and psi = 1/2 at the two adjacent vertices
  double fab = f(0.5 * (a + b)), fbc = f(0.5 * (b + c)), fca = f(0.5 * (c + a));
  return Eigen::Vector3d(fab + fca, fab + fbc, fbc + fca) * (area / 6.0);
}

namespace {

const Vec2& pt(const TriangleMesh& mesh, int i) { return mesh.points[static_cast<std::size_t>(i)]; }

}  // namespace

SparseMatrix stiffness_matrix(const TriangleMesh& mesh, const CoefficientField& coeff, CellRule rule) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const Vec2 &a = pt(mesh, tri[0]), &b = pt(mesh, tri[1]), &c = pt(mesh, tri[2]);
    Eigen::Matrix3d k = p1_stiffness(a, b, c, cell_coefficient(coeff, a, b, c, rule));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        triplets.emplace_back(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>(j)], k(i, j));
  }
  const auto n = static_cast<Eigen::Index>(mesh.size());
  SparseMatrix s(n, n);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

Eigen::VectorXd load_vector(const TriangleMesh& mesh, const ScalarField& f, CellRule rule) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.size()));
  if (f.identically_zero) return b;
  for (const auto& tri : mesh.triangles) {
    Eigen::Vector3d l = p1_load(pt(mesh, tri[0]), pt(mesh, tri[1]), pt(mesh, tri[2]), f, rule);
    for (int i = 0; i < 3; ++i) b(tri[static_cast<std::size_t>(i)]) += l(i);
  }
  return b;
}

SparseSpdSystem assemble(const TriangleMesh& mesh, const CoefficientField& coeff, const ScalarField* f,
                         const std::map<int, double>& dirichlet, CellRule rule) {
  const std::size_t n = mesh.size();
  SparseSpdSystem sys;
  sys.constrained = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  sys.free_index.assign(n, 0);
  for (const auto& [v, value] : dirichlet) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) throw InvalidArgument("assemble: Dirichlet vertex out of range");
    sys.free_index[static_cast<std::size_t>(v)] = -1;
    sys.constrained(v) = value;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (mesh.boundary[v] && sys.free_index[v] >= 0)
      throw InvalidArgument("assemble: boundary vertex " + std::to_string(v) + " has no Dirichlet data");
  int next = 0;
  for (auto& idx : sys.free_index)
    if (idx >= 0) idx = next++;

  SparseMatrix full = stiffness_matrix(mesh, coeff, rule);
  Eigen::VectorXd load = f ? load_vector(mesh, *f, rule) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd lifted = load - full * sys.constrained;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int col = 0; col < full.outerSize(); ++col) {
    int jc = sys.free_index[static_cast<std::size_t>(col)];
    if (jc < 0) continue;
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      int ir = sys.free_index[static_cast<std::size_t>(it.row())];
      if (ir >= 0) triplets.emplace_back(ir, jc, it.value());
    }
  }
  sys.matrix.resize(next, next);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.rhs.resize(next);
  for (std::size_t v = 0; v < n; ++v)
    if (sys.free_index[v] >= 0) sys.rhs(sys.free_index[v]) = lifted(static_cast<Eigen::Index>(v));
  return sys;
}

FineFunction expand(const SparseSpdSystem& system, const Eigen::VectorXd& reduced) {
  FineFunction u = system.constrained;
  for (std::size_t v = 0; v < system.free_index.size(); ++v)
    if (system.free_index[v] >= 0) u(static_cast<Eigen::Index>(v)) = reduced(system.free_index[v]);
  return u;
}

namespace {

double relative_residual(const SparseSpdSystem& system, const Eigen::VectorXd& x) {
  double bnorm = system.rhs.norm();
  double r = (system.rhs - system.matrix * x).norm();
  return bnorm > 0.0 ? r / bnorm : r;
}

}  // namespace

SolveResult solve_spd(const SparseSpdSystem& system, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidArgument("solve_spd: rel_tol must lie in (0, 1)");
  SolveResult out;
  const Eigen::Index n = system.rhs.size();
  if (n == 0 || system.rhs.squaredNorm() == 0.0) {
    out.solution = expand(system, Eigen::VectorXd::Zero(n));
    return out;
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(rel_tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(std::ceil(50.0 * std::sqrt(static_cast<double>(n)))));
  cg.compute(system.matrix);
  Eigen::VectorXd x = cg.solve(system.rhs);
  out.iterations = static_cast<int>(cg.iterations());
  out.residual = relative_residual(system, x);
  if (cg.info() != Eigen::Success && out.residual > rel_tol)
    throw NumericalError("conjugate gradient did not converge after " + std::to_string(out.iterations) +
                             " iterations (relative residual " + std::to_string(out.residual) + ")",
                         out.residual);
  out.solution = expand(system, x);
  return out;
}

SolveResult solve_direct(const SparseSpdSystem& system) {
  SolveResult out;
  const Eigen::Index n = system.rhs.size();
  if (n == 0) {
    out.solution = system.constrained;
    return out;
  }
  Eigen::SimplicialLLT<SparseMatrix> llt(system.matrix);
  if (llt.info() != Eigen::Success) throw NumericalError("sparse Cholesky failed: matrix not SPD");
  Eigen::VectorXd x = llt.solve(system.rhs);
  out.residual = relative_residual(system, x);
  out.solution = expand(system, x);
  return out;
}

EnergyForm::EnergyForm(const TriangleMesh& mesh, const CoefficientField& coeff, const ScalarField& f,
                       CellRule rule)
    : stiffness_(stiffness_matrix(mesh, coeff, rule)),
      laplacian_(stiffness_matrix(mesh, identity_coefficient(), rule)),
      load_(lemsfem::load_vector(mesh, f, rule)) {}

void EnergyForm::check(const FineFunction& v) const {
  if (static_cast<std::size_t>(v.size()) != size())
    throw InvalidArgument("fine function has " + std::to_string(v.size()) + " values, mesh has " +
                          std::to_string(size()) + " vertices");
}

double EnergyForm::energy(const FineFunction& v) const {
  check(v);
  return 0.5 * v.dot(stiffness_ * v) - load_.dot(v);
}

double EnergyForm::energy_inner(const FineFunction& v, const FineFunction& w) const {
  check(v);
  check(w);
  return v.dot(stiffness_ * w);
}

double EnergyForm::energy_norm(const FineFunction& v) const { return std::sqrt(std::max(0.0, energy_inner(v, v))); }

double EnergyForm::h1_seminorm_squared(const FineFunction& v) const {
  check(v);
  return v.dot(laplacian_ * v);
}

double EnergyForm::load(const FineFunction& v) const {
  check(v);
  return load_.dot(v);
}

DirichletSolver::DirichletSolver(const TriangleMesh& mesh, const CoefficientField& coeff, CellRule rule)
    : stiffness_(stiffness_matrix(mesh, coeff, rule)) {
  const std::size_t n = mesh.size();
  free_index_.assign(n, -1);
  for (std::size_t v = 0; v < n; ++v) {
    if (mesh.boundary[v]) {
      free_index_[v] = static_cast<int>(boundary_.size());
      boundary_.push_back(static_cast<int>(v));
    } else {
      free_index_[v] = static_cast<int>(interior_.size());
      interior_.push_back(static_cast<int>(v));
    }
  }
  std::vector<Eigen::Triplet<double>> ii, ib;
  for (int col = 0; col < stiffness_.outerSize(); ++col) {
    const bool col_boundary = mesh.boundary[static_cast<std::size_t>(col)];
    const int jc = free_index_[static_cast<std::size_t>(col)];
    for (SparseMatrix::InnerIterator it(stiffness_, col); it; ++it) {
      if (mesh.boundary[static_cast<std::size_t>(it.row())]) continue;
      const int ir = free_index_[static_cast<std::size_t>(it.row())];
      (col_boundary ? ib : ii).emplace_back(ir, jc, it.value());
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior_.size());
  interior_block_.resize(ni, ni);
  interior_block_.setFromTriplets(ii.begin(), ii.end());
  coupling_.resize(ni, static_cast<Eigen::Index>(boundary_.size()));
  coupling_.setFromTriplets(ib.begin(), ib.end());
  if (ni > 0) {
    factor_.compute(interior_block_);
    if (factor_.info() != Eigen::Success) throw NumericalError("local Dirichlet problem is not SPD");
  }
}

FineFunction DirichletSolver::solve(const Eigen::VectorXd& trace, const Eigen::VectorXd& load) const {
  const auto n = static_cast<Eigen::Index>(size());
  if (trace.size() != n || load.size() != n) throw InvalidArgument("DirichletSolver: data length mismatch");
  FineFunction u(n);
  Eigen::VectorXd ub(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t k = 0; k < boundary_.size(); ++k) {
    ub(static_cast<Eigen::Index>(k)) = trace(boundary_[k]);
    u(boundary_[k]) = trace(boundary_[k]);
  }
  if (interior_.empty()) return u;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t k = 0; k < interior_.size(); ++k) rhs(static_cast<Eigen::Index>(k)) = load(interior_[k]);
  rhs -= coupling_ * ub;
  Eigen::VectorXd ui = factor_.solve(rhs);
  for (std::size_t k = 0; k < interior_.size(); ++k) u(interior_[k]) = ui(static_cast<Eigen::Index>(k));
  return u;
}

FineFunction DirichletSolver::harmonic_extension(const Eigen::VectorXd& trace) const {
  return solve(trace, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size())));
}

FineFunction DirichletSolver::zero_trace_solve(const Eigen::VectorXd& load) const {
  return solve(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size())), load);
}

}  // namespace lemsfem
