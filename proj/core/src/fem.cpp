#include "septop/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace septop {

namespace {

// Degree-2 exact quadrature on the reference triangle (barycentric points).
constexpr double kTriPts[3][3] = {
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
};
constexpr double kTriWt = 1.0 / 3.0;

// Two-point Gauss rule on [0,1].
const double kEdgeT[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

Eigen::VectorXd residual_extended(const SpMat& K, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& b) {
  std::vector<long double> acc(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) acc[i] = b[i];
  for (int col = 0; col < K.outerSize(); ++col) {
    const long double xj = x[col];
    for (SpMat::InnerIterator it(K, col); it; ++it) {
      acc[it.row()] -= static_cast<long double>(it.value()) * xj;
    }
  }
  Eigen::VectorXd r(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[i]);
  return r;
}

}  // namespace

void MaterialField::validate(int expected_size) const {
  if (values.size() != expected_size) {
    throw std::invalid_argument("MaterialField: length does not match element count");
  }
  if (!(lb > 0.0) || !(lb <= ub)) {
    throw std::invalid_argument("MaterialField: bounds must satisfy 0 < lb <= ub");
  }
  const double slack = 1e-12 * ub;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] >= lb - slack) || !(values[i] <= ub + slack)) {
      throw std::invalid_argument("MaterialField: value outside [lb, ub]");
    }
  }
}

MaterialField homogeneous_field(int m, double value, double lb, double ub) {
  MaterialField field;
  field.values = Eigen::VectorXd::Constant(m, value);
  field.lb = lb;
  field.ub = ub;
  return field;
}

BoundaryData default_boundary_data() {
  BoundaryData bc;
  bc.dirichlet_sides = {EdgeSide::left, EdgeSide::bottom};
  bc.dirichlet_value = [](const Vec2&) { return 0.0; };
  bc.neumann_sides = {EdgeSide::top, EdgeSide::right};
  bc.neumann_flux = [](const Vec2& x) { return x.x() * x.y(); };
  bc.source = [](const Vec2&) { return 1.0; };
  return bc;
}

DiffusionSystem::DiffusionSystem(const TriMesh& mesh, const Eigen::VectorXd& lambda,
                                 const std::vector<bool>& dirichlet_node)
    : mesh_(mesh), lambda_(lambda), dirichlet_(dirichlet_node) {
  if (lambda_.size() != mesh_.num_elements()) {
    throw std::invalid_argument("DiffusionSystem: lambda length mismatch");
  }
  if (static_cast<int>(dirichlet_.size()) != mesh_.num_vertices()) {
    throw std::invalid_argument("DiffusionSystem: dirichlet mask length mismatch");
  }
  bool any = false;
  for (bool d : dirichlet_) any = any || d;
  if (!any) {
    throw std::runtime_error("DiffusionSystem: singular system, no Dirichlet nodes");
  }
  geo_.reserve(mesh_.num_elements());
  for (int e = 0; e < mesh_.num_elements(); ++e) geo_.push_back(element_geometry(mesh_, e));
  assemble_and_factor();
}

void DiffusionSystem::update_lambda(const Eigen::VectorXd& lambda) {
  if (lambda.size() != lambda_.size()) {
    throw std::invalid_argument("update_lambda: length mismatch");
  }
  lambda_ = lambda;
  assemble_and_factor();
}

void DiffusionSystem::assemble_and_factor() {
  const int n = mesh_.num_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh_.num_elements() + n);
  for (int e = 0; e < mesh_.num_elements(); ++e) {
    const auto& g = geo_[e];
    const Eigen::Matrix3d kloc = lambda_[e] * (g.D * g.D.transpose());
    for (int i = 0; i < 3; ++i) {
      const int gi = g.local_to_global[i];
      if (dirichlet_[gi]) continue;
      for (int j = 0; j < 3; ++j) {
        const int gj = g.local_to_global[j];
        if (dirichlet_[gj]) continue;
        trips.emplace_back(gi, gj, kloc(i, j));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (dirichlet_[i]) trips.emplace_back(i, i, 1.0);
  }
  K_.resize(n, n);
  K_.setFromTriplets(trips.begin(), trips.end());
  K_.makeCompressed();
  diag_ = K_.diagonal();

  if (!pattern_ready_) {
    solver_.analyzePattern(K_);
    pattern_ready_ = true;
  }
  solver_.factorize(K_);
  if (solver_.info() != Eigen::Success) {
    throw std::runtime_error("DiffusionSystem: factorization failed");
  }
}

Eigen::VectorXd DiffusionSystem::solve(const Eigen::VectorXd& rhs, int refine_steps) const {
  Eigen::VectorXd x = solver_.solve(rhs);
  for (int s = 0; s < refine_steps; ++s) {
    const Eigen::VectorXd r = residual_extended(K_, x, rhs);
    x += solver_.solve(r);
  }
  return x;
}

Eigen::Matrix<double, 3, 2> DiffusionSystem::constrained_factor(int elem) const {
  Eigen::Matrix<double, 3, 2> B = geo_[elem].D;
  for (int i = 0; i < 3; ++i) {
    if (dirichlet_[geo_[elem].local_to_global[i]]) B.row(i).setZero();
  }
  return B;
}

Eigen::VectorXd DiffusionSystem::precondition(const Eigen::VectorXd& r) const {
  return solver_.solve(r);
}

AssembledSystem assemble(const Mesh2D& mesh, const MaterialField& lambda,
                         const BoundaryData& bc) {
  lambda.validate(mesh.num_elements());
  if (bc.dirichlet_sides.empty()) {
    throw std::runtime_error("assemble: all-Neumann boundary leaves the system singular");
  }

  AssembledSystem sys;
  sys.mesh = &mesh;
  sys.material = lambda;
  sys.bc = bc;

  const int n = mesh.num_vertices();
  sys.dirichlet_node.assign(n, false);
  for (const auto& edge : mesh.boundary_edges) {
    if (bc.dirichlet_sides.count(edge.side)) {
      sys.dirichlet_node[edge.a] = true;
      sys.dirichlet_node[edge.b] = true;
    }
  }

  // Load vector: volumetric source with the degree-2 triangle rule, Neumann
  // flux with two-point Gauss per boundary edge.
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Triangle t = mesh.grid.triangle_of(e);
    const double area = triangle_area(t);
    for (const auto& bary : kTriPts) {
      const Vec2 x = bary[0] * t[0] + bary[1] * t[1] + bary[2] * t[2];
      const double fx = bc.source ? bc.source(x) : 0.0;
      for (int i = 0; i < 3; ++i) {
        f[mesh.grid.triangles[e][i]] += area * kTriWt * fx * bary[i];
      }
    }
  }
  for (const auto& edge : mesh.boundary_edges) {
    if (!bc.neumann_sides.count(edge.side) || !bc.neumann_flux) continue;
    const Vec2& a = mesh.grid.vertices[edge.a];
    const Vec2& b = mesh.grid.vertices[edge.b];
    const double len = (b - a).norm();
    for (double t : kEdgeT) {
      const Vec2 x = (1.0 - t) * a + t * b;
      const double g = bc.neumann_flux(x);
      f[edge.a] += 0.5 * len * g * (1.0 - t);
      f[edge.b] += 0.5 * len * g * t;
    }
  }

  // Symmetric elimination of Dirichlet values: move K*g to the right-hand
  // side (element-wise, no full assembly needed), then pin the nodes.
  Eigen::VectorXd gval = Eigen::VectorXd::Zero(n);
  bool any_nonzero_g = false;
  for (int i = 0; i < n; ++i) {
    if (!sys.dirichlet_node[i]) continue;
    gval[i] = bc.dirichlet_value ? bc.dirichlet_value(mesh.grid.vertices[i]) : 0.0;
    any_nonzero_g = any_nonzero_g || gval[i] != 0.0;
  }
  if (any_nonzero_g) {
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const ElementGeometry geom = element_geometry(mesh, e);
      Eigen::Vector3d gloc;
      for (int i = 0; i < 3; ++i) gloc[i] = gval[geom.local_to_global[i]];
      if (gloc.isZero()) continue;
      const Eigen::Vector3d corr = lambda.values[e] * (geom.D * (geom.D.transpose() * gloc));
      for (int i = 0; i < 3; ++i) f[geom.local_to_global[i]] -= corr[i];
    }
  }
  for (int i = 0; i < n; ++i) {
    if (sys.dirichlet_node[i]) f[i] = gval[i];
  }
  sys.f = f;

  sys.system = std::make_shared<DiffusionSystem>(mesh.grid, lambda.values, sys.dirichlet_node);
  return sys;
}

StateSolution solve_state(const AssembledSystem& sys) {
  StateSolution st;
  st.u = sys.system->solve(sys.f);
  const double rnorm = (sys.K() * st.u - sys.f).norm();
  if (rnorm > 1e-10 * std::max(sys.f.norm(), 1.0)) {
    throw std::runtime_error("solve_state: residual bound violated");
  }
  st.compliance = sys.f.dot(st.u);
  st.grad.resize(sys.mesh->num_elements());
  for (int e = 0; e < sys.mesh->num_elements(); ++e) {
    const ElementGeometry geom = sys.system->geometry(e);
    Eigen::Vector3d uloc;
    for (int i = 0; i < 3; ++i) uloc[i] = st.u[geom.local_to_global[i]];
    st.grad[e] = geom.D.transpose() * uloc / std::sqrt(geom.area);
  }
  return st;
}

Mat2 exact_gamma(const AssembledSystem& sys, int elem) {
  const auto B = sys.system->constrained_factor(elem);
  const auto& conn = sys.mesh->grid.triangles[elem];
  Mat2 gamma;
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.system->num_nodes());
    for (int i = 0; i < 3; ++i) rhs[conn[i]] += B(i, k);
    const Eigen::VectorXd w = sys.system->solve(rhs);
    for (int j = 0; j < 2; ++j) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) acc += B(i, j) * w[conn[i]];
      gamma(j, k) = -acc;
    }
  }
  return gamma;
}

Mat2 diag_gamma(const AssembledSystem& sys, int elem) {
  const auto B = sys.system->constrained_factor(elem);
  const auto& conn = sys.mesh->grid.triangles[elem];
  const Eigen::VectorXd& d = sys.system->diagonal();
  Mat2 gamma = Mat2::Zero();
  for (int i = 0; i < 3; ++i) {
    const double di = d[conn[i]];
    if (di == 0.0) throw std::runtime_error("diag_gamma: zero diagonal entry");
    gamma -= B.row(i).transpose() * B.row(i) / di;
  }
  return gamma;
}

double compliance_resolve_oracle(const Mesh2D& mesh, const MaterialField& lambda,
                                 const BoundaryData& bc, int elem, double eta) {
  ComplianceOracle oracle(mesh, lambda, bc, ComplianceOracle::Mode::exact);
  return oracle.evaluate(elem, eta);
}

ComplianceOracle::ComplianceOracle(const Mesh2D& mesh, const MaterialField& lambda,
                                   const BoundaryData& bc, Mode mode)
    : base_(assemble(mesh, lambda, bc)), mode_(mode) {
  base_u_ = base_.system->solve(base_.f);
  base_compliance_ = base_.f.dot(base_u_);
}

ComplianceOracle::Worker::Worker(const ComplianceOracle& oracle) : o_(&oracle) {
  Kp_ = oracle.base_.K();
  base_values_.assign(Kp_.valuePtr(), Kp_.valuePtr() + Kp_.nonZeros());
  const int n = oracle.base_.system->num_nodes();
  x_.resize(n);
  r_.resize(n);
  z_.resize(n);
  p_.resize(n);
  kp_.resize(n);
}

double ComplianceOracle::Worker::evaluate(int elem, double eta) {
  const AssembledSystem& base = o_->base_;
  if (elem < 0 || elem >= base.mesh->num_elements()) {
    throw std::out_of_range("ComplianceOracle: element index out of range");
  }
  const MaterialField& mat = base.material;
  const double slack = 1e-12 * mat.ub;
  if (eta < mat.lb - slack || eta > mat.ub + slack) {
    throw std::invalid_argument("ComplianceOracle: eta outside material bounds");
  }
  const double delta = eta - mat.values[elem];
  if (delta == 0.0) return o_->base_compliance_;

  if (o_->mode_ == Mode::fast) {
    // Re-assemble the perturbed matrix (only one element's entries move)
    // and solve it with preconditioned CG iterated to near machine
    // precision; fresh factorization as fallback if the iteration stalls.
    std::copy(base_values_.begin(), base_values_.end(), Kp_.valuePtr());
    const auto B = base.system->constrained_factor(elem);
    const auto& conn = base.mesh->grid.triangles[elem];
    const Eigen::Matrix3d upd = delta * (B * B.transpose());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (upd(i, j) != 0.0) Kp_.coeffRef(conn[i], conn[j]) += upd(i, j);
      }
    }

    const Eigen::VectorXd& b = base.f;
    const double bnorm = b.norm();
    x_ = o_->base_u_;
    r_.noalias() = b - Kp_ * x_;
    bool converged = r_.norm() <= 1e-13 * bnorm;
    if (!converged) {
      z_ = base.system->precondition(r_);
      p_ = z_;
      double rz = r_.dot(z_);
      for (int it = 0; it < 30; ++it) {
        kp_.noalias() = Kp_ * p_;
        const double pkp = p_.dot(kp_);
        if (pkp <= 0.0) break;
        const double alpha = rz / pkp;
        x_ += alpha * p_;
        r_ -= alpha * kp_;
        if (r_.norm() <= 1e-13 * bnorm) {
          converged = true;
          break;
        }
        z_ = base.system->precondition(r_);
        const double rz_new = r_.dot(z_);
        p_ = z_ + (rz_new / rz) * p_;
        rz = rz_new;
      }
    }
    if (converged) return b.dot(x_);
  }

  Eigen::VectorXd values = mat.values;
  values[elem] = eta;
  DiffusionSystem pert(base.mesh->grid, values, base.dirichlet_node);
  const Eigen::VectorXd u = pert.solve(base.f);
  return base.f.dot(u);
}

double ComplianceOracle::evaluate(int elem, double eta) const {
  Worker worker(*this);
  return worker.evaluate(elem, eta);
}

double ComplianceOracle::evaluate_field(const Eigen::VectorXd& lambda_values) const {
  DiffusionSystem pert(base_.mesh->grid, lambda_values, base_.dirichlet_node);
  const Eigen::VectorXd u = pert.solve(base_.f);
  return base_.f.dot(u);
}

bool Report1D::pass(double tol) const {
  return max_gamma_error <= tol && max_model_vs_closed_form <= tol &&
         max_model_vs_td_model <= tol;
}

Eigen::VectorXd solve_1d_poisson(const Mesh1D& mesh, const Eigen::VectorXd& lambda,
                                 double& compliance) {
  const int m = mesh.m;
  if (lambda.size() != m) throw std::invalid_argument("solve_1d_poisson: lambda length");
  const int n = m + 1;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < m; ++e) {
    const double h = mesh.vertices[e + 1] - mesh.vertices[e];
    const double k = lambda[e] / h;
    const bool dir_a = (e == 0), dir_b = (e == m - 1);
    if (!dir_a) trips.emplace_back(e, e, k);
    if (!dir_b) trips.emplace_back(e + 1, e + 1, k);
    if (!dir_a && !dir_b) {
      trips.emplace_back(e, e + 1, -k);
      trips.emplace_back(e + 1, e, -k);
    }
    f[e] += 0.5 * h;
    f[e + 1] += 0.5 * h;
  }
  trips.emplace_back(0, 0, 1.0);
  trips.emplace_back(n - 1, n - 1, 1.0);
  f[0] = 0.0;
  f[n - 1] = 0.0;

  SpMat K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SpMat> solver(K);
  if (solver.info() != Eigen::Success) throw std::runtime_error("solve_1d_poisson: factorization failed");
  Eigen::VectorXd u = solver.solve(f);
  // One refinement step keeps the verification identities at machine precision.
  u += solver.solve(residual_extended(K, u, f));
  compliance = f.dot(u);
  return u;
}

Report1D solve_1d_models(int m, double lambda_out, double lambda_in) {
  Report1D report;
  report.m = m;
  report.lambda_out = lambda_out;
  report.lambda_in = lambda_in;

  const Mesh1D mesh = build_uniform_mesh_1d(m);
  const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(m, lambda_out);
  double compliance = 0.0;
  const Eigen::VectorXd u = solve_1d_poisson(mesh, lambda, compliance);
  const double h = mesh.h();
  const double delta = lambda_in - lambda_out;

  for (int e = 1; e + 1 < m; ++e) {
    const double du = (u[e + 1] - u[e]) / h;
    // Response of the diagonal surrogate: both nodes of the element carry
    // diagonal entries (lambda_left + lambda_right)/h.
    const double d_left = (lambda[e - 1] + lambda[e]) / h;
    const double d_right = (lambda[e] + lambda[e + 1]) / h;
    const double gamma_diag = -(1.0 / h) * (1.0 / d_left + 1.0 / d_right);
    report.max_gamma_error =
        std::max(report.max_gamma_error, std::abs(gamma_diag + 1.0 / lambda_out));

    const double model = compliance - h * delta * du * du / (1.0 - delta * gamma_diag);
    const double closed_form =
        compliance - h * (lambda_out / lambda_in) * delta * du * du;
    report.max_model_vs_closed_form =
        std::max(report.max_model_vs_closed_form, std::abs(model - closed_form));

    // Interval-inclusion topological derivative route: polarization
    // -(delta)/lambda_in, adjoint gradient -u'.
    const double polarization = -delta / lambda_in;
    const double td_density = delta * du * (1.0 + polarization) * (-du);
    const double td_model = compliance + h * td_density;
    report.max_model_vs_td_model =
        std::max(report.max_model_vs_td_model, std::abs(model - td_model));
  }
  return report;
}

}  // namespace septop
