#pragma once

#include "septop/geometry.hpp"

#include <array>
#include <map>
#include <vector>

namespace septop {

// Plain triangle mesh shared by the structured domain mesh and the exterior
// meshes. Triangles store vertex indices in counter-clockwise order.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_elements() const { return static_cast<int>(triangles.size()); }
  Triangle triangle_of(int elem) const {
    const auto& t = triangles[elem];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
};

enum class EdgeSide { left, bottom, right, top };

struct BoundaryEdge {
  int a = 0, b = 0;  // vertex indices
  EdgeSide side = EdgeSide::left;
};

// Structured triangulation of the unit square. Each grid square is split by
// the diagonal from its bottom-left to its top-right corner, producing
// isosceles right triangles of two types: type 1 with the right angle at the
// bottom-right vertex, type 2 with the right angle at the top-left vertex.
struct Mesh2D {
  int n_ref = 0;
  double h = 0.0;  // grid spacing 2^-n_ref
  TriMesh grid;
  std::vector<int> elem_type;           // 1 or 2 per element
  std::vector<bool> boundary_vertex;    // vertex lies on the unit-square boundary
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::vector<int>> vertex_elements;  // elements incident to a vertex

  int num_vertices() const { return grid.num_vertices(); }
  int num_elements() const { return grid.num_elements(); }

  // True when no vertex of the element lies on the boundary of the square.
  bool element_is_interior(int elem) const;
  // True when at least one vertex of the element lies on the given side.
  bool element_touches_side(int elem, EdgeSide side) const;
};

struct ElementGeometry {
  double area = 0.0;
  Eigen::Matrix<double, 3, 2> D;  // local stiffness factor, K_loc = D D^T
  Vec2 centroid;
  std::array<int, 3> local_to_global{};
};

struct Mesh1D {
  int m = 0;  // element count
  std::vector<double> vertices;
  double h() const { return 1.0 / m; }
};

struct ElementGeometry1D {
  double length = 0.0;
  Eigen::Vector2d D;
  double midpoint = 0.0;
  std::array<int, 2> local_to_global{};
};

Mesh2D build_structured_mesh(int n_ref);
Mesh1D build_uniform_mesh_1d(int m);

ElementGeometry element_geometry(const Mesh2D& mesh, int elem);
ElementGeometry element_geometry(const TriMesh& mesh, int elem);
ElementGeometry1D element_geometry(const Mesh1D& mesh, int elem);

// All elements sharing at least one vertex with the given element, the
// element itself excluded. Sorted ascending.
std::vector<int> vertex_neighbors(const Mesh2D& mesh, int elem);

// Per-neighbor area fractions w_{S_j,T} of the three sectors anchored at the
// element's angle-bisector frame. Computed by exact polygon clipping; the
// three weights of each neighbor sum to one. Boundary elements are rejected
// unless allow_boundary is set (their neighborhood is truncated by the
// domain boundary).
std::map<int, std::array<double, 3>> sector_weights(const Mesh2D& mesh, int elem,
                                                    bool allow_boundary = false);

}  // namespace septop
