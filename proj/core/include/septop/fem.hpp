#pragma once

#include "septop/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <set>
#include <vector>

namespace septop {

using SpMat = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Vec2&)>;

struct MaterialField {
  Eigen::VectorXd values;
  double lb = 1.0;
  double ub = 1000.0;

  void validate(int expected_size) const;
};

MaterialField homogeneous_field(int m, double value, double lb, double ub);

struct BoundaryData {
  std::set<EdgeSide> dirichlet_sides;
  ScalarField dirichlet_value;  // g_D
  std::set<EdgeSide> neumann_sides;
  ScalarField neumann_flux;  // g_N
  ScalarField source;        // f
};

// Dirichlet on the left and bottom edges with g_D = 0, Neumann flux
// g_N(x) = x1*x2 on the top and right edges, unit volumetric source.
BoundaryData default_boundary_data();

// Generic P1 diffusion solve on a triangle mesh: per-element conductivity,
// nodal Dirichlet set, assembled right-hand side. Dirichlet conditions are
// incorporated symmetrically (rows/columns cleared, unit diagonal), which
// keeps the matrix SPD. Solves run through a Cholesky-type factorization
// plus a few steps of iterative refinement with extended-precision
// residuals, so forward errors stay near machine precision even for large
// material contrast.
class DiffusionSystem {
 public:
  DiffusionSystem(const TriMesh& mesh, const Eigen::VectorXd& lambda,
                  const std::vector<bool>& dirichlet_node);

  // Re-factorize after changing conductivities; the sparsity pattern is reused.
  void update_lambda(const Eigen::VectorXd& lambda);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, int refine_steps = 2) const;

  const SpMat& matrix() const { return K_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  const std::vector<bool>& dirichlet() const { return dirichlet_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }
  int num_nodes() const { return static_cast<int>(dirichlet_.size()); }

  // Geometry factor of one element with rows belonging to Dirichlet nodes
  // cleared; this is the factor entering rank-d stiffness updates of the
  // constrained system.
  Eigen::Matrix<double, 3, 2> constrained_factor(int elem) const;
  const ElementGeometry& geometry(int elem) const { return geo_[elem]; }

  // Apply the factorization as a preconditioner (single back-substitution).
  Eigen::VectorXd precondition(const Eigen::VectorXd& r) const;

 private:
  void assemble_and_factor();

  const TriMesh& mesh_;
  Eigen::VectorXd lambda_;
  std::vector<bool> dirichlet_;
  std::vector<ElementGeometry> geo_;
  SpMat K_;
  Eigen::VectorXd diag_;
  Eigen::SimplicialLDLT<SpMat> solver_;
  bool pattern_ready_ = false;
};

struct StateSolution {
  Eigen::VectorXd u;
  double compliance = 0.0;
  std::vector<Vec2> grad;  // constant gradient per element
};

// Interior-domain problem: structured mesh, material field, boundary data.
struct AssembledSystem {
  const Mesh2D* mesh = nullptr;
  MaterialField material;
  BoundaryData bc;
  Eigen::VectorXd f;
  std::vector<bool> dirichlet_node;
  std::shared_ptr<DiffusionSystem> system;

  const SpMat& K() const { return system->matrix(); }
};

AssembledSystem assemble(const Mesh2D& mesh, const MaterialField& lambda,
                         const BoundaryData& bc);

StateSolution solve_state(const AssembledSystem& sys);

// Exact per-element response matrix, two solves with the factorized system.
Mat2 exact_gamma(const AssembledSystem& sys, int elem);

// Diagonal-stiffness surrogate; O(1) per element given the matrix diagonal.
Mat2 diag_gamma(const AssembledSystem& sys, int elem);

// Ground-truth compliance after perturbing one element's conductivity:
// rebuild the stiffness matrix for the perturbed field and solve again.
double compliance_resolve_oracle(const Mesh2D& mesh, const MaterialField& lambda,
                                 const BoundaryData& bc, int elem, double eta);

// Batched oracle evaluations sharing one expansion point. The fast mode
// solves each perturbed system by conjugate gradients on the re-assembled
// matrix, preconditioned with the expansion-point factorization and iterated
// to near machine precision (direct fallback if it stalls); the exact mode
// re-factorizes every perturbed matrix and refines.
class ComplianceOracle {
 public:
  enum class Mode { fast, exact };

  ComplianceOracle(const Mesh2D& mesh, const MaterialField& lambda,
                   const BoundaryData& bc, Mode mode = Mode::fast);

  double evaluate(int elem, double eta) const;

  // Compliance for a fully re-assembled field (used by design-flip checks).
  double evaluate_field(const Eigen::VectorXd& lambda_values) const;

  const AssembledSystem& base() const { return base_; }
  double base_compliance() const { return base_compliance_; }
  Mode mode() const { return mode_; }

  // Per-thread scratch state for batched evaluations; the matrix copy and
  // iteration vectors persist across calls.
  class Worker {
   public:
    explicit Worker(const ComplianceOracle& oracle);
    double evaluate(int elem, double eta);

   private:
    const ComplianceOracle* o_;
    SpMat Kp_;
    std::vector<double> base_values_;
    Eigen::VectorXd x_, r_, z_, p_, kp_;
  };
  Worker make_worker() const { return Worker(*this); }

 private:
  friend class Worker;
  AssembledSystem base_;
  Mode mode_;
  Eigen::VectorXd base_u_;
  double base_compliance_ = 0.0;
};

// One-dimensional verification of the diagonal model: on a uniform mesh with
// homogeneous material the per-element response reduces to -1/lambda_out and
// the diagonal model coincides with the discretized interval-inclusion
// topological derivative model.
struct Report1D {
  int m = 0;
  double lambda_out = 0.0;
  double lambda_in = 0.0;
  double max_gamma_error = 0.0;        // | Gamma_diag + 1/lambda_out |
  double max_model_vs_closed_form = 0.0;
  double max_model_vs_td_model = 0.0;
  bool pass(double tol = 1e-12) const;
};

Report1D solve_1d_models(int m, double lambda_out, double lambda_in);

// Nodal solution of the 1D Poisson problem with unit source and homogeneous
// Dirichlet ends, conductivity lambda per element.
Eigen::VectorXd solve_1d_poisson(const Mesh1D& mesh, const Eigen::VectorXd& lambda,
                                 double& compliance);

}  // namespace septop
