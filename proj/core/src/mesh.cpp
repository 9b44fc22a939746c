#include "septop/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace septop {

namespace {
constexpr double kBoundaryTol = 1e-12;

bool on_side(const Vec2& v, EdgeSide side) {
  switch (side) {
    case EdgeSide::left: return std::abs(v.x()) < kBoundaryTol;
    case EdgeSide::bottom: return std::abs(v.y()) < kBoundaryTol;
    case EdgeSide::right: return std::abs(v.x() - 1.0) < kBoundaryTol;
    case EdgeSide::top: return std::abs(v.y() - 1.0) < kBoundaryTol;
  }
  return false;
}
}  // namespace

bool Mesh2D::element_is_interior(int elem) const {
  for (int v : grid.triangles[elem]) {
    if (boundary_vertex[v]) return false;
  }
  return true;
}

bool Mesh2D::element_touches_side(int elem, EdgeSide side) const {
  for (int v : grid.triangles[elem]) {
    if (on_side(grid.vertices[v], side)) return true;
  }
  return false;
}

Mesh2D build_structured_mesh(int n_ref) {
  if (n_ref < 2 || n_ref > 10) {
    throw std::invalid_argument("build_structured_mesh: n_ref must be in [2, 10]");
  }
  Mesh2D mesh;
  mesh.n_ref = n_ref;
  const int s = 1 << n_ref;
  mesh.h = 1.0 / s;

  mesh.grid.vertices.reserve((s + 1) * (s + 1));
  for (int iy = 0; iy <= s; ++iy) {
    for (int ix = 0; ix <= s; ++ix) {
      mesh.grid.vertices.emplace_back(static_cast<double>(ix) / s,
                                      static_cast<double>(iy) / s);
    }
  }
  auto vid = [s](int ix, int iy) { return iy * (s + 1) + ix; };

  mesh.grid.triangles.reserve(2 * s * s);
  mesh.elem_type.reserve(2 * s * s);
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i < s; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.grid.triangles.push_back({v00, v10, v11});
      mesh.elem_type.push_back(1);
      mesh.grid.triangles.push_back({v00, v11, v01});
      mesh.elem_type.push_back(2);
    }
  }

  mesh.boundary_vertex.assign(mesh.grid.vertices.size(), false);
  for (std::size_t v = 0; v < mesh.grid.vertices.size(); ++v) {
    const Vec2& p = mesh.grid.vertices[v];
    mesh.boundary_vertex[v] = on_side(p, EdgeSide::left) || on_side(p, EdgeSide::right) ||
                              on_side(p, EdgeSide::bottom) || on_side(p, EdgeSide::top);
  }

  for (int i = 0; i < s; ++i) {
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), EdgeSide::bottom});
    mesh.boundary_edges.push_back({vid(i, s), vid(i + 1, s), EdgeSide::top});
    mesh.boundary_edges.push_back({vid(0, i), vid(0, i + 1), EdgeSide::left});
    mesh.boundary_edges.push_back({vid(s, i), vid(s, i + 1), EdgeSide::right});
  }

  mesh.vertex_elements.assign(mesh.grid.vertices.size(), {});
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int v : mesh.grid.triangles[e]) mesh.vertex_elements[v].push_back(e);
  }
  return mesh;
}

Mesh1D build_uniform_mesh_1d(int m) {
  if (m < 2) throw std::invalid_argument("build_uniform_mesh_1d: need at least 2 elements");
  Mesh1D mesh;
  mesh.m = m;
  mesh.vertices.resize(m + 1);
  for (int i = 0; i <= m; ++i) mesh.vertices[i] = static_cast<double>(i) / m;
  return mesh;
}

ElementGeometry element_geometry(const TriMesh& mesh, int elem) {
  if (elem < 0 || elem >= mesh.num_elements()) {
    throw std::out_of_range("element_geometry: element index out of range");
  }
  const auto& tri = mesh.triangles[elem];
  const Triangle t = mesh.triangle_of(elem);

  ElementGeometry geo;
  geo.local_to_global = tri;
  geo.centroid = triangle_centroid(t);

  Mat2 J;
  J.col(0) = t[1] - t[0];
  J.col(1) = t[2] - t[0];
  const double det = J.determinant();
  if (det <= 0.0) throw std::runtime_error("element_geometry: degenerate or flipped element");
  geo.area = 0.5 * det;

  Eigen::Matrix<double, 3, 2> C;
  C << -1, -1, 1, 0, 0, 1;
  geo.D = std::sqrt(0.5 * det) * C * J.inverse();
  return geo;
}

ElementGeometry element_geometry(const Mesh2D& mesh, int elem) {
  return element_geometry(mesh.grid, elem);
}

ElementGeometry1D element_geometry(const Mesh1D& mesh, int elem) {
  if (elem < 0 || elem >= mesh.m) {
    throw std::out_of_range("element_geometry: element index out of range");
  }
  ElementGeometry1D geo;
  geo.length = mesh.vertices[elem + 1] - mesh.vertices[elem];
  geo.D = Eigen::Vector2d(-1.0, 1.0) / std::sqrt(geo.length);
  geo.midpoint = 0.5 * (mesh.vertices[elem] + mesh.vertices[elem + 1]);
  geo.local_to_global = {elem, elem + 1};
  return geo;
}

std::vector<int> vertex_neighbors(const Mesh2D& mesh, int elem) {
  if (elem < 0 || elem >= mesh.num_elements()) {
    throw std::out_of_range("vertex_neighbors: element index out of range");
  }
  std::set<int> acc;
  for (int v : mesh.grid.triangles[elem]) {
    for (int e : mesh.vertex_elements[v]) {
      if (e != elem) acc.insert(e);
    }
  }
  return {acc.begin(), acc.end()};
}

std::map<int, std::array<double, 3>> sector_weights(const Mesh2D& mesh, int elem,
                                                    bool allow_boundary) {
  if (!allow_boundary && !mesh.element_is_interior(elem)) {
    throw std::domain_error("sector_weights: boundary element without boundary variant");
  }
  const SectorFrame frame = make_sector_frame(mesh.grid.triangle_of(elem));
  std::map<int, std::array<double, 3>> weights;
  for (int nb : vertex_neighbors(mesh, elem)) {
    const Triangle t = mesh.grid.triangle_of(nb);
    weights[nb] = sector_area_fractions(frame, {t[0], t[1], t[2]});
  }
  return weights;
}

}  // namespace septop
