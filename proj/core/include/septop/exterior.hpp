#pragma once

#include "septop/fem.hpp"
#include "septop/mesh.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace septop {

enum class BcType { dirichlet, neumann };

// Interior elements see the full truncated plane; elements touching one side
// of the unit square see a truncated half plane whose straight boundary runs
// through the outermost vertices of the reference triangle on that side.
struct ExteriorVariant {
  bool boundary = false;
  EdgeSide side = EdgeSide::top;
  BcType bc = BcType::neumann;

  static ExteriorVariant interior() { return {}; }
  static ExteriorVariant half(EdgeSide side, BcType bc) { return {true, side, bc}; }
};

bool operator==(const ExteriorVariant& a, const ExteriorVariant& b);

struct ExteriorMeshOptions {
  double growth_aspect = 0.8;   // radial step as a fraction of the local edge target
  double edge_factor = 0.40;    // in-ring edge target relative to ring radius
  double min_edge = 0.5;        // edge target near the reference triangle
  int min_rim_segments = 128;   // polygonal resolution of the circular rim
  double blend_lo = 1.0;        // ring radius where the triangle shape starts
  double blend_hi = 5.0;        // morphing into a circle, fully circular beyond
};

enum class SectorTag : int { hat = -1, s1 = 0, s2 = 1, s3 = 2 };

struct ExteriorMesh {
  double R = 30.0;
  int elem_type = 1;
  ExteriorVariant variant;
  TriMesh mesh;
  int hat_element = 0;
  std::vector<SectorTag> sector_tag;   // per element
  std::vector<bool> dirichlet_node;    // circular rim, plus straight edge if Dirichlet
  std::vector<bool> straight_edge_node;
  SectorFrame frame;                   // sector wedges of the reference triangle
  std::uint64_t content_hash = 0;

  Triangle hat_triangle() const { return mesh.triangle_of(hat_element); }
};

ExteriorMesh build_exterior_mesh(double R, int elem_type,
                                 const ExteriorVariant& variant = ExteriorVariant::interior(),
                                 const ExteriorMeshOptions& options = {});

// Conductivities of the four-material configuration: one value inside the
// reference triangle, one per sector.
struct SectorMaterials {
  double hat = 1.0;
  std::array<double, 3> sector{1.0, 1.0, 1.0};

  static SectorMaterials uniform(double v) { return {v, {v, v, v}}; }
};

// Reusable solver for one exterior mesh; changing materials re-factorizes
// on the cached sparsity pattern.
class HatProblem {
 public:
  explicit HatProblem(const ExteriorMesh& ext);

  // Transmission solve with a unit-strength forcing over the reference
  // triangle in coordinate direction k (0 or 1).
  Eigen::VectorXd solve_W(const SectorMaterials& mats, int k);

  // Corrector for switching the triangle material from mats.hat to
  // lambda_in: same operator with lambda_in inside the triangle, right-hand
  // side scaled by -(lambda_in - mats.hat).
  Eigen::VectorXd solve_corrector(const SectorMaterials& mats, double lambda_in, int k);

  Mat2 gamma(const SectorMaterials& mats);
  Mat2 polarization(const SectorMaterials& mats, double lambda_in);

  // Mean gradient of a nodal field over the reference triangle.
  Vec2 hat_gradient(const Eigen::VectorXd& field) const;

  const ExteriorMesh& mesh() const { return ext_; }

 private:
  void prepare(const Eigen::VectorXd& lambda);
  Eigen::VectorXd base_rhs(int k) const;

  const ExteriorMesh& ext_;
  Eigen::VectorXd elem_lambda_;
  std::optional<DiffusionSystem> system_;
};

// One-shot wrappers.
Eigen::VectorXd solve_W(const ExteriorMesh& ext, const SectorMaterials& mats, int k);
Eigen::VectorXd solve_corrector_K(const ExteriorMesh& ext, const SectorMaterials& mats,
                                  double lambda_in, int k);
Mat2 gamma_hat(const ExteriorMesh& ext, const SectorMaterials& mats);
Mat2 polarization_hat(const ExteriorMesh& ext, const SectorMaterials& mats, double lambda_in);

// Element/vertex listing with sector tags, for inspection.
void dump_exterior_mesh_csv(const ExteriorMesh& ext, std::ostream& vertices_out,
                            std::ostream& elements_out);

}  // namespace septop
