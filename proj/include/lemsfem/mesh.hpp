#ifndef LEMSFEM_MESH_HPP_
#define LEMSFEM_MESH_HPP_

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lemsfem/common.hpp"

namespace lemsfem {

enum class ElementKind { quad, triangle };

std::string to_string(ElementKind kind);
ElementKind element_kind_from_string(const std::string& name);

struct Rectangle {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  bool operator==(const Rectangle&) const = default;
};

/**
 * Coarse element. Vertices are counterclockwise and edge i joins vertex i to
 * vertex i+1 (cyclically).
 *
 * The affine map sends the reference element onto the element,
 * x = jacobian * xi + offset, with the reference square [0,1]^2 for quads and
 * the unit right triangle (0,0), (1,0), (0,1) for triangles. Reference vertex
 * i maps to vertices[i].
 */
struct Element {
  int id = 0;
  std::vector<int> vertices;
  std::vector<int> edges;
  double diameter = 0.0;
  Mat2 jacobian = Mat2::Zero();
  Vec2 offset = Vec2::Zero();

  Vec2 map(const Vec2& xi) const { return jacobian * xi + offset; }
  Vec2 pull_back(const Vec2& x) const { return jacobian.inverse() * (x - offset); }
};

/// Coarse edge, oriented from vertices[0] to vertices[1] with vertices[0] < vertices[1].
/// The edge-local coordinate s in [-1, 1] sends -1 to vertices[0] and +1 to vertices[1].
struct Edge {
  int id = 0;
  std::array<int, 2> vertices{};
  bool boundary = false;
  std::vector<int> elements;  // ascending ids; 1 entry on the boundary, 2 inside
  double length = 0.0;
};

struct CoarseMesh {
  ElementKind kind = ElementKind::quad;
  Rectangle domain;
  int nx = 0, ny = 0;
  std::vector<Vec2> vertices;
  std::vector<Element> elements;
  std::vector<Edge> edges;
  std::vector<bool> boundary_vertex;

  std::vector<int> interior_vertices() const;
  std::vector<int> interior_edges() const;
  /// Elements having vertex v as a corner, ascending.
  std::vector<int> elements_of_vertex(int v) const;
  /// Number of edges of element k lying on the interior skeleton.
  int interior_edge_count(int k) const;
  /// Point on edge e at edge-local coordinate s.
  Vec2 edge_point(int e, double s) const;
  /// Largest element diameter.
  double max_diameter() const;
};

/// One segment of the fine mesh lying on a coarse edge, with the fine triangle
/// on each side (ordered like Edge::elements; -1 when the side is outside the domain).
struct EdgeSegment {
  int a = 0, b = 0;
  std::array<int, 2> triangles{-1, -1};
};

/// Fine triangles of one coarse element, in a local vertex numbering.
struct Patch {
  int element = 0;
  std::vector<int> vertices;                   // global fine ids, ascending
  std::vector<std::array<int, 3>> triangles;   // local ids, counterclockwise
  std::vector<int> global_triangles;           // fine triangle ids, parallel to `triangles`
  std::vector<bool> on_boundary;               // local vertex lies on the element boundary

  /// Local index of global fine vertex g, or -1.
  int local_index(int g) const;
};

struct FineMesh {
  int n_sub = 0;
  int cells_x = 0, cells_y = 0;  // fine lattice cells per direction
  double h = 0.0;                // largest fine cell side
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> element_of;   // coarse element tag per fine triangle
  std::vector<bool> on_domain_boundary;
  std::vector<bool> on_skeleton;  // lies on an interior coarse edge
  /// Fine vertex ids along each coarse edge, from Edge::vertices[0] to [1].
  std::vector<std::vector<int>> edge_vertices;
  /// Fine segments along each coarse edge, same order as edge_vertices.
  std::vector<std::vector<EdgeSegment>> edge_segments;
  std::vector<Patch> patches;  // one per coarse element
};

CoarseMesh build_coarse(ElementKind kind, int nx, int ny, const Rectangle& domain = {});

FineMesh refine_to_fine(const CoarseMesh& coarse, int n_sub);

/**
 * Mesh regularity constant.
 *
 * For each element, gamma_K = max(|DF| * diam(K_ref) / H_K, |DF^-1| * H_K / diam(K_ref))
 * with spectral norms, H_K the element diameter and diam(K_ref) = sqrt(2) for
 * both reference elements. F is the map stored on the element, so the value
 * depends on which vertex is listed first. A uniform square mesh gives 1 and
 * the diagonal-split triangle mesh gives the golden ratio.
 */
double check_regularity(const CoarseMesh& coarse);

struct DegreeAssignment {
  std::vector<int> edge_degree;     // N_e, indexed by edge id (ignored on boundary edges)
  std::vector<int> element_degree;  // M_K, 0 disables bubbles on K

  static DegreeAssignment uniform(const CoarseMesh& coarse, int n, int m);
  void validate(const CoarseMesh& coarse) const;
};

struct DegreeViolation {
  int edge_a = 0, edge_b = 0;
};

/// Every pair of interior edges sharing a vertex with N_b outside [N_a/sqrt(gamma), sqrt(gamma) N_a].
std::vector<DegreeViolation> check_degree_compat(const CoarseMesh& coarse,
                                                 const DegreeAssignment& degrees, double gamma);

/// Debug listing of vertices, elements and edges. Not a stable format.
void dump_mesh(std::ostream& os, const CoarseMesh& coarse);

}  // namespace lemsfem

#endif  // LEMSFEM_MESH_HPP_
