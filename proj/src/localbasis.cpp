#include "lemsfem/localbasis.hpp"

#include <algorithm>
#include <ostream>

#include "lemsfem/csv.hpp"

namespace lemsfem {

FineFunction BasisFunction::to_global(std::size_t fine_vertex_count) const {
  FineFunction out = FineFunction::Zero(static_cast<Eigen::Index>(fine_vertex_count));
  for (std::size_t j = 0; j < global_vertices.size(); ++j)
    out(global_vertices[j]) = global_values(static_cast<Eigen::Index>(j));
  return out;
}

std::string BasisFunction::label() const {
  switch (kind) {
    case BasisKind::nodal: return "nodal:" + std::to_string(entity);
    case BasisKind::edge: return "edge:" + std::to_string(entity) + ":" + std::to_string(index);
    case BasisKind::bubble: return "bubble:" + std::to_string(entity) + ":" + std::to_string(index);
  }
  return {};
}

int BasisCatalog::find(BasisKind kind, int entity, int index) const {
  for (std::size_t p = 0; p < functions.size(); ++p) {
    const BasisFunction& f = functions[p];
    if (f.kind == kind && f.entity == entity && f.index == index) return static_cast<int>(p);
  }
  return -1;
}

LocalProblems::LocalProblems(const CoarseMesh& coarse, const FineMesh& fine, const CoefficientField& coeff,
                             CellRule rule, int workers)
    : coarse_(&coarse), fine_(&fine), coeff_(&coeff), rule_(rule) {
  if (fine.patches.size() != coarse.elements.size())
    throw InvalidArgument("LocalProblems: fine mesh does not refine this coarse mesh");
  meshes_.resize(coarse.elements.size());
  solvers_.resize(coarse.elements.size());
  parallel_for(coarse.elements.size(), workers, [&](std::size_t k) {
    meshes_[k] = patch_mesh(fine, fine.patches[k]);
    solvers_[k] = std::make_unique<DirichletSolver>(meshes_[k], coeff, rule);
  });
}

Eigen::VectorXd LocalProblems::local_load(int element, const ScalarField& f) const {
  return load_vector(mesh(element), f, rule_);
}

namespace {

void finalize(BasisFunction& phi, const FineMesh& fine) {
  std::vector<std::pair<int, double>> values;
  for (std::size_t s = 0; s < phi.support.size(); ++s) {
    const Patch& patch = fine.patches[static_cast<std::size_t>(phi.support[s])];
    for (std::size_t j = 0; j < patch.vertices.size(); ++j)
      values.emplace_back(patch.vertices[j], phi.restrictions[s](static_cast<Eigen::Index>(j)));
  }
  std::stable_sort(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  values.erase(std::unique(values.begin(), values.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
               values.end());
  phi.global_vertices.resize(values.size());
  phi.global_values.resize(static_cast<Eigen::Index>(values.size()));
  for (std::size_t j = 0; j < values.size(); ++j) {
    phi.global_vertices[j] = values[j].first;
    phi.global_values(static_cast<Eigen::Index>(j)) = values[j].second;
  }
}

}  // namespace

BasisFunction compute_nodal(int vertex, const LocalProblems& problems) {
  const CoarseMesh& coarse = problems.coarse();
  const FineMesh& fine = problems.fine();
  if (vertex < 0 || static_cast<std::size_t>(vertex) >= coarse.vertices.size())
    throw InvalidArgument("compute_nodal: vertex out of range");
  if (coarse.boundary_vertex[static_cast<std::size_t>(vertex)])
    throw InvalidArgument("compute_nodal: vertex " + std::to_string(vertex) + " lies on the domain boundary");

  BasisFunction phi;
  phi.kind = BasisKind::nodal;
  phi.entity = vertex;
  phi.support = coarse.elements_of_vertex(vertex);
  for (int k : phi.support) {
    const Patch& patch = fine.patches[static_cast<std::size_t>(k)];
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(patch.vertices.size()));
    for (int e : coarse.elements[static_cast<std::size_t>(k)].edges) {
      const Edge& edge = coarse.edges[static_cast<std::size_t>(e)];
      if (edge.vertices[0] != vertex && edge.vertices[1] != vertex) continue;
      const auto& list = fine.edge_vertices[static_cast<std::size_t>(e)];
      const double n = static_cast<double>(list.size() - 1);
      for (std::size_t t = 0; t < list.size(); ++t) {
        double frac = static_cast<double>(t) / n;
        trace(patch.local_index(list[t])) = edge.vertices[0] == vertex ? 1.0 - frac : frac;
      }
    }
    phi.restrictions.push_back(problems.solver(k).harmonic_extension(trace));
  }
  finalize(phi, fine);
  return phi;
}

BasisFunction compute_edge_enrichment(int edge_id, int k, const LocalProblems& problems) {
  const CoarseMesh& coarse = problems.coarse();
  const FineMesh& fine = problems.fine();
  if (edge_id < 0 || static_cast<std::size_t>(edge_id) >= coarse.edges.size())
    throw InvalidArgument("compute_edge_enrichment: edge out of range");
  const Edge& edge = coarse.edges[static_cast<std::size_t>(edge_id)];
  if (edge.boundary) throw InvalidArgument("compute_edge_enrichment: edge " + std::to_string(edge_id) + " is on the boundary");
  if (k < 2) throw InvalidArgument("compute_edge_enrichment: degree must be >= 2");

  const auto& list = fine.edge_vertices[static_cast<std::size_t>(edge_id)];
  const double n = static_cast<double>(list.size() - 1);
  std::vector<double> samples(list.size());
  for (std::size_t t = 0; t < list.size(); ++t) samples[t] = internal_basis(k, -1.0 + 2.0 * static_cast<double>(t) / n);

  BasisFunction phi;
  phi.kind = BasisKind::edge;
  phi.entity = edge_id;
  phi.index = k;
  phi.support = edge.elements;
  for (int el : phi.support) {
    const Patch& patch = fine.patches[static_cast<std::size_t>(el)];
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(patch.vertices.size()));
    for (std::size_t t = 0; t < list.size(); ++t) trace(patch.local_index(list[t])) = samples[t];
    phi.restrictions.push_back(problems.solver(el).harmonic_extension(trace));
  }
  finalize(phi, fine);
  return phi;
}

std::vector<BasisFunction> compute_bubbles(int element, int degree, const LocalProblems& problems) {
  const CoarseMesh& coarse = problems.coarse();
  if (element < 0 || static_cast<std::size_t>(element) >= coarse.elements.size())
    throw InvalidArgument("compute_bubbles: element out of range");
  if (degree < 1) throw InvalidArgument("compute_bubbles: bulk degree must be >= 1 (degree 0 means no bubbles)");

  const Element& el = coarse.elements[static_cast<std::size_t>(element)];
  const TriangleMesh& mesh = problems.mesh(element);
  BulkPolyBasis basis(coarse.kind, degree);
  const int count = basis.size();
  const auto nv = static_cast<Eigen::Index>(mesh.size());
  Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(nv, count);

  // int_T P_i psi_j with the same per-cell rule as the stiffness
  for (const auto& tri : mesh.triangles) {
    const Vec2& a = mesh.points[static_cast<std::size_t>(tri[0])];
    const Vec2& b = mesh.points[static_cast<std::size_t>(tri[1])];
    const Vec2& c = mesh.points[static_cast<std::size_t>(tri[2])];
    const double area = std::abs(triangle_area(a, b, c));
    if (problems.rule() == CellRule::centroid) {
      Eigen::RowVectorXd p = basis.evaluate_physical(el, (a + b + c) / 3.0).transpose() * (area / 3.0);
      for (int v : tri) loads.row(v) += p;
    } else {
      Eigen::RowVectorXd pab = basis.evaluate_physical(el, 0.5 * (a + b)).transpose();
      Eigen::RowVectorXd pbc = basis.evaluate_physical(el, 0.5 * (b + c)).transpose();
      Eigen::RowVectorXd pca = basis.evaluate_physical(el, 0.5 * (c + a)).transpose();
      loads.row(tri[0]) += (pab + pca) * (area / 6.0);
      loads.row(tri[1]) += (pab + pbc) * (area / 6.0);
      loads.row(tri[2]) += (pbc + pca) * (area / 6.0);
    }
  }

  std::vector<BasisFunction> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    BasisFunction phi;
    phi.kind = BasisKind::bubble;
    phi.entity = element;
    phi.index = i + 1;
    phi.support = {element};
    phi.restrictions.push_back(problems.solver(element).zero_trace_solve(loads.col(i)));
    finalize(phi, problems.fine());
    out.push_back(std::move(phi));
  }
  return out;
}

BasisFunction compute_bubble(int element, int i, int degree, const LocalProblems& problems) {
  if (degree < 1) throw InvalidArgument("compute_bubble: bulk degree must be >= 1 (degree 0 means no bubbles)");
  const int count = BulkPolyBasis::dimension(problems.coarse().kind, degree);
  if (i < 1 || i > count) throw InvalidArgument("compute_bubble: index out of range");
  return std::move(compute_bubbles(element, degree, problems)[static_cast<std::size_t>(i - 1)]);
}

BasisCatalog compute_all(const LocalProblems& problems, const DegreeAssignment& degrees, int workers) {
  const CoarseMesh& coarse = problems.coarse();
  degrees.validate(coarse);

  struct Task {
    BasisKind kind;
    int entity;
    int index;
  };
  std::vector<Task> tasks;
  for (int v : coarse.interior_vertices()) tasks.push_back({BasisKind::nodal, v, 0});
  for (int e : coarse.interior_edges())
    for (int k = 2; k <= degrees.edge_degree[static_cast<std::size_t>(e)]; ++k) tasks.push_back({BasisKind::edge, e, k});
  for (const Element& el : coarse.elements)
    if (degrees.element_degree[static_cast<std::size_t>(el.id)] >= 1) tasks.push_back({BasisKind::bubble, el.id, 0});

  std::vector<std::vector<BasisFunction>> results(tasks.size());
  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const Task& task = tasks[t];
    switch (task.kind) {
      case BasisKind::nodal: results[t].push_back(compute_nodal(task.entity, problems)); break;
      case BasisKind::edge: results[t].push_back(compute_edge_enrichment(task.entity, task.index, problems)); break;
      case BasisKind::bubble:
        results[t] = compute_bubbles(task.entity, degrees.element_degree[static_cast<std::size_t>(task.entity)], problems);
        break;
    }
  });

  BasisCatalog catalog;
  for (auto& group : results) {
    for (auto& phi : group) {
      switch (phi.kind) {
        case BasisKind::nodal: ++catalog.nodal_count; break;
        case BasisKind::edge: ++catalog.edge_count; break;
        case BasisKind::bubble: ++catalog.bubble_count; break;
      }
      catalog.functions.push_back(std::move(phi));
    }
  }
  return catalog;
}

void write_basis_csv(std::ostream& os, const BasisFunction& phi, const FineMesh& fine) {
  os << "x,y,value\n";
  for (std::size_t j = 0; j < phi.global_vertices.size(); ++j) {
    const Vec2& p = fine.vertices[static_cast<std::size_t>(phi.global_vertices[j])];
    os << format_double(p.x()) << ',' << format_double(p.y()) << ','
       << format_double(phi.global_values(static_cast<Eigen::Index>(j))) << '\n';
  }
}

}  // namespace lemsfem
