#include "lemsfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include <Eigen/SVD>

namespace lemsfem {

namespace {

constexpr double kRefDiameter = 1.4142135623730951;  // sqrt(2), both reference elements

void set_affine_map(ElementKind kind, const std::vector<Vec2>& xs, Element& el) {
  const Vec2& p0 = xs[static_cast<std::size_t>(el.vertices[0])];
  const Vec2& p1 = xs[static_cast<std::size_t>(el.vertices[1])];
  const Vec2& plast = xs[static_cast<std::size_t>(el.vertices.back())];
  el.offset = p0;
  el.jacobian.col(0) = p1 - p0;
  el.jacobian.col(1) = (kind == ElementKind::quad ? plast : xs[static_cast<std::size_t>(el.vertices[2])]) - p0;
  double diam = 0.0;
  for (int a : el.vertices)
    for (int b : el.vertices)
      diam = std::max(diam, (xs[static_cast<std::size_t>(a)] - xs[static_cast<std::size_t>(b)]).norm());
  el.diameter = diam;
}

double spectral_norm(const Mat2& m) {
  Eigen::JacobiSVD<Mat2> svd(m);
  return svd.singularValues()(0);
}

long long pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
}

}  // namespace

std::string to_string(ElementKind kind) { return kind == ElementKind::quad ? "quad" : "triangle"; }

ElementKind element_kind_from_string(const std::string& name) {
  if (name == "quad") return ElementKind::quad;
  if (name == "triangle") return ElementKind::triangle;
  throw InvalidArgument("unknown element kind '" + name + "' (expected quad or triangle)");
}

std::vector<int> CoarseMesh::interior_vertices() const {
  std::vector<int> out;
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (!boundary_vertex[v]) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<int> CoarseMesh::interior_edges() const {
  std::vector<int> out;
  for (const Edge& e : edges)
    if (!e.boundary) out.push_back(e.id);
  return out;
}

std::vector<int> CoarseMesh::elements_of_vertex(int v) const {
  std::vector<int> out;
  for (const Element& el : elements)
    if (std::find(el.vertices.begin(), el.vertices.end(), v) != el.vertices.end()) out.push_back(el.id);
  return out;
}

int CoarseMesh::interior_edge_count(int k) const {
  int count = 0;
  for (int e : elements[static_cast<std::size_t>(k)].edges)
    if (!edges[static_cast<std::size_t>(e)].boundary) ++count;
  return count;
}

Vec2 CoarseMesh::edge_point(int e, double s) const {
  const Edge& edge = edges[static_cast<std::size_t>(e)];
  return 0.5 * (1.0 - s) * vertices[static_cast<std::size_t>(edge.vertices[0])] +
         0.5 * (1.0 + s) * vertices[static_cast<std::size_t>(edge.vertices[1])];
}

double CoarseMesh::max_diameter() const {
  double d = 0.0;
  for (const Element& el : elements) d = std::max(d, el.diameter);
  return d;
}

int Patch::local_index(int g) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), g);
  if (it == vertices.end() || *it != g) return -1;
  return static_cast<int>(it - vertices.begin());
}

CoarseMesh build_coarse(ElementKind kind, int nx, int ny, const Rectangle& domain) {
  if (nx < 1 || ny < 1) throw InvalidArgument("build_coarse: cell counts must be >= 1");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw InvalidArgument("build_coarse: empty domain");

  CoarseMesh mesh;
  mesh.kind = kind;
  mesh.domain = domain;
  mesh.nx = nx;
  mesh.ny = ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(domain.x0 + (static_cast<double>(i) / nx) * domain.width(),
                                 domain.y0 + (static_cast<double>(j) / ny) * domain.height());
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  for (int cj = 0; cj < ny; ++cj) {
    for (int ci = 0; ci < nx; ++ci) {
      int v00 = vid(ci, cj), v10 = vid(ci + 1, cj), v11 = vid(ci + 1, cj + 1), v01 = vid(ci, cj + 1);
      if (kind == ElementKind::quad) {
        Element el;
        el.vertices = {v00, v10, v11, v01};
        mesh.elements.push_back(el);
      } else {
        Element lower, upper;
        lower.vertices = {v00, v10, v11};
        upper.vertices = {v00, v11, v01};
        mesh.elements.push_back(lower);
        mesh.elements.push_back(upper);
      }
    }
  }

  std::map<std::pair<int, int>, int> edge_ids;
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
    Element& el = mesh.elements[k];
    el.id = static_cast<int>(k);
    set_affine_map(kind, mesh.vertices, el);
    const std::size_t nv = el.vertices.size();
    for (std::size_t i = 0; i < nv; ++i) {
      int a = el.vertices[i], b = el.vertices[(i + 1) % nv];
      std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = edge_ids.try_emplace(key, static_cast<int>(mesh.edges.size()));
      if (inserted) {
        Edge e;
        e.id = it->second;
        e.vertices = {key.first, key.second};
        e.length = (mesh.vertices[static_cast<std::size_t>(key.first)] -
                    mesh.vertices[static_cast<std::size_t>(key.second)])
                       .norm();
        mesh.edges.push_back(e);
      }
      mesh.edges[static_cast<std::size_t>(it->second)].elements.push_back(el.id);
      el.edges.push_back(it->second);
    }
  }

  mesh.boundary_vertex.assign(mesh.vertices.size(), false);
  for (Edge& e : mesh.edges) {
    e.boundary = e.elements.size() == 1;
    if (e.boundary)
      for (int v : e.vertices) mesh.boundary_vertex[static_cast<std::size_t>(v)] = true;
  }
  return mesh;
}

FineMesh refine_to_fine(const CoarseMesh& coarse, int n_sub) {
  if (n_sub < 2) throw InvalidArgument("refine_to_fine: n_sub must be >= 2");

  FineMesh fine;
  fine.n_sub = n_sub;
  fine.cells_x = coarse.nx * n_sub;
  fine.cells_y = coarse.ny * n_sub;
  const Rectangle& d = coarse.domain;
  fine.h = std::max(d.width() / fine.cells_x, d.height() / fine.cells_y);

  const int px = fine.cells_x + 1;
  for (int j = 0; j <= fine.cells_y; ++j)
    for (int i = 0; i <= fine.cells_x; ++i)
      fine.vertices.emplace_back(d.x0 + (static_cast<double>(i) / fine.cells_x) * d.width(),
                                 d.y0 + (static_cast<double>(j) / fine.cells_y) * d.height());
  auto vid = [px](int i, int j) { return j * px + i; };

  for (int j = 0; j < fine.cells_y; ++j) {
    for (int i = 0; i < fine.cells_x; ++i) {
      int ci = i / n_sub, cj = j / n_sub, li = i % n_sub, lj = j % n_sub;
      int p00 = vid(i, j), p10 = vid(i + 1, j), p11 = vid(i + 1, j + 1), p01 = vid(i, j + 1);
      int cell = cj * coarse.nx + ci;
      int tag_lower = cell, tag_upper = cell;
      if (coarse.kind == ElementKind::triangle) {
        // coarse lower triangle (v00,v10,v11) is the region below the cell diagonal
        tag_lower = 2 * cell + (li >= lj ? 0 : 1);
        tag_upper = 2 * cell + (li > lj ? 0 : 1);
      }
      fine.triangles.push_back({p00, p10, p11});
      fine.element_of.push_back(tag_lower);
      fine.triangles.push_back({p00, p11, p01});
      fine.element_of.push_back(tag_upper);
    }
  }

  fine.on_domain_boundary.assign(fine.vertices.size(), false);
  for (int j = 0; j <= fine.cells_y; ++j)
    for (int i = 0; i <= fine.cells_x; ++i)
      if (i == 0 || j == 0 || i == fine.cells_x || j == fine.cells_y)
        fine.on_domain_boundary[static_cast<std::size_t>(vid(i, j))] = true;

  // Coarse vertex (I, J) sits at fine lattice point (I*n_sub, J*n_sub).
  fine.on_skeleton.assign(fine.vertices.size(), false);
  fine.edge_vertices.resize(coarse.edges.size());
  for (const Edge& e : coarse.edges) {
    int a = e.vertices[0], b = e.vertices[1];
    int ia = a % (coarse.nx + 1), ja = a / (coarse.nx + 1);
    int ib = b % (coarse.nx + 1), jb = b / (coarse.nx + 1);
    auto& list = fine.edge_vertices[static_cast<std::size_t>(e.id)];
    for (int t = 0; t <= n_sub; ++t) {
      int fv = vid(ia * n_sub + t * (ib - ia), ja * n_sub + t * (jb - ja));
      list.push_back(fv);
      if (!e.boundary) fine.on_skeleton[static_cast<std::size_t>(fv)] = true;
    }
  }

  std::unordered_map<long long, std::array<int, 2>> fine_edges;
  fine_edges.reserve(fine.triangles.size() * 2);
  for (std::size_t t = 0; t < fine.triangles.size(); ++t) {
    const auto& tri = fine.triangles[t];
    for (int i = 0; i < 3; ++i) {
      auto [it, inserted] = fine_edges.try_emplace(pair_key(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>((i + 1) % 3)]),
                                                   std::array<int, 2>{-1, -1});
      (it->second[0] < 0 ? it->second[0] : it->second[1]) = static_cast<int>(t);
    }
  }

  fine.edge_segments.resize(coarse.edges.size());
  for (const Edge& e : coarse.edges) {
    const auto& list = fine.edge_vertices[static_cast<std::size_t>(e.id)];
    for (std::size_t s = 0; s + 1 < list.size(); ++s) {
      EdgeSegment seg;
      seg.a = list[s];
      seg.b = list[s + 1];
      for (int t : fine_edges.at(pair_key(seg.a, seg.b))) {
        if (t < 0) continue;
        int owner = fine.element_of[static_cast<std::size_t>(t)];
        for (std::size_t side = 0; side < e.elements.size(); ++side)
          if (e.elements[side] == owner) seg.triangles[side] = t;
      }
      fine.edge_segments[static_cast<std::size_t>(e.id)].push_back(seg);
    }
  }

  fine.patches.resize(coarse.elements.size());
  for (std::size_t k = 0; k < coarse.elements.size(); ++k) fine.patches[k].element = static_cast<int>(k);
  for (std::size_t t = 0; t < fine.triangles.size(); ++t) {
    Patch& p = fine.patches[static_cast<std::size_t>(fine.element_of[t])];
    p.global_triangles.push_back(static_cast<int>(t));
    for (int v : fine.triangles[t]) p.vertices.push_back(v);
  }
  for (Patch& p : fine.patches) {
    std::sort(p.vertices.begin(), p.vertices.end());
    p.vertices.erase(std::unique(p.vertices.begin(), p.vertices.end()), p.vertices.end());
    for (int t : p.global_triangles) {
      const auto& tri = fine.triangles[static_cast<std::size_t>(t)];
      p.triangles.push_back({p.local_index(tri[0]), p.local_index(tri[1]), p.local_index(tri[2])});
    }
    p.on_boundary.assign(p.vertices.size(), false);
    for (int e : coarse.elements[static_cast<std::size_t>(p.element)].edges)
      for (int fv : fine.edge_vertices[static_cast<std::size_t>(e)])
        p.on_boundary[static_cast<std::size_t>(p.local_index(fv))] = true;
  }
  return fine;
}

double check_regularity(const CoarseMesh& coarse) {
  double gamma = 0.0;
  for (const Element& original : coarse.elements) {
    Element el = original;
    set_affine_map(coarse.kind, coarse.vertices, el);
    double det = el.jacobian.determinant();
    if (!(el.diameter > 0.0) || std::abs(det) <= 1e-14 * el.diameter * el.diameter)
      throw InvalidArgument("check_regularity: degenerate element " + std::to_string(el.id));
    double forward = spectral_norm(el.jacobian) * kRefDiameter / el.diameter;
    double inverse = spectral_norm(el.jacobian.inverse()) * el.diameter / kRefDiameter;
    gamma = std::max({gamma, forward, inverse});
  }
  return gamma;
}

DegreeAssignment DegreeAssignment::uniform(const CoarseMesh& coarse, int n, int m) {
  DegreeAssignment d;
  d.edge_degree.assign(coarse.edges.size(), n);
  d.element_degree.assign(coarse.elements.size(), m);
  return d;
}

void DegreeAssignment::validate(const CoarseMesh& coarse) const {
  if (edge_degree.size() != coarse.edges.size())
    throw InvalidArgument("degree assignment does not cover every edge");
  if (element_degree.size() != coarse.elements.size())
    throw InvalidArgument("degree assignment does not cover every element");
  for (const Edge& e : coarse.edges)
    if (!e.boundary && edge_degree[static_cast<std::size_t>(e.id)] < 1)
      throw InvalidArgument("edge degree must be >= 1 on interior edge " + std::to_string(e.id));
  for (std::size_t k = 0; k < element_degree.size(); ++k)
    if (element_degree[k] < 0) throw InvalidArgument("element degree must be >= 0 on element " + std::to_string(k));
}

std::vector<DegreeViolation> check_degree_compat(const CoarseMesh& coarse, const DegreeAssignment& degrees,
                                                 double gamma) {
  const double root = std::sqrt(gamma);
  std::vector<std::vector<int>> incident(coarse.vertices.size());
  for (const Edge& e : coarse.edges)
    if (!e.boundary)
      for (int v : e.vertices) incident[static_cast<std::size_t>(v)].push_back(e.id);

  std::set<std::pair<int, int>> seen;
  std::vector<DegreeViolation> out;
  for (const auto& list : incident) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        int a = std::min(list[i], list[j]), b = std::max(list[i], list[j]);
        if (!seen.insert({a, b}).second) continue;
        double na = degrees.edge_degree[static_cast<std::size_t>(a)];
        double nb = degrees.edge_degree[static_cast<std::size_t>(b)];
        const double slack = 1e-12 * std::max(na, nb);
        if (nb > root * na + slack || na > root * nb + slack) out.push_back({a, b});
      }
    }
  }
  return out;
}

void dump_mesh(std::ostream& os, const CoarseMesh& coarse) {
  os << "# kind " << to_string(coarse.kind) << " nx " << coarse.nx << " ny " << coarse.ny << '\n';
  os << "vertices " << coarse.vertices.size() << '\n';
  for (std::size_t v = 0; v < coarse.vertices.size(); ++v)
    os << v << ' ' << coarse.vertices[v].x() << ' ' << coarse.vertices[v].y()
       << (coarse.boundary_vertex[v] ? " boundary" : " interior") << '\n';
  os << "elements " << coarse.elements.size() << '\n';
  for (const Element& el : coarse.elements) {
    os << el.id << " v";
    for (int v : el.vertices) os << ' ' << v;
    os << " e";
    for (int e : el.edges) os << ' ' << e;
    os << " diam " << el.diameter << '\n';
  }
  os << "edges " << coarse.edges.size() << '\n';
  for (const Edge& e : coarse.edges) {
    os << e.id << ' ' << e.vertices[0] << ' ' << e.vertices[1] << (e.boundary ? " boundary" : " interior")
       << " elements";
    for (int k : e.elements) os << ' ' << k;
    os << " length " << e.length << '\n';
  }
}

}  // namespace lemsfem
