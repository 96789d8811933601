#include "abplab/pde.hpp"

#include <cmath>
#include <map>

namespace abp {

namespace {

void require_positive(const ScalarField& f) {
  if (f.size() == 0 || !(f.minCoeff() > 0.0) || !f.allFinite()) {
    throw PdeError(PdeError::Kind::NonPositiveDensity, "density must be finite and positive at every vertex");
  }
}

void remove_weighted_mean(Eigen::VectorXd& x, const Eigen::VectorXd& mass) {
  x.array() -= x.dot(mass) / mass.sum();
}

}  // namespace

ScalarField sobolev_integrand(const Mesh& mesh, const ScalarField& f, const ShapeData& shape) {
  const AmbientVectorField grad = vertex_gradient(mesh, shape.frames, f);
  const Eigen::VectorXd grad_sq = grad.rowwise().squaredNorm();
  const Eigen::VectorXd h_sq = shape.mean_curvature.rowwise().squaredNorm();
  return (grad_sq.array() + f.array().square() * h_sq.array()).sqrt().matrix();
}

NormalizedDensity normalize_density(const Mesh& mesh, const ScalarField& f, const ShapeData& shape, int n) {
  require_positive(f);
  NormalizedDensity out;
  out.lhs = integrate(mesh, sobolev_integrand(mesh, f, shape)) + boundary_integrate(mesh, f);
  out.rhs = n * integrate(mesh, f.array().pow(density_exponent(n)).matrix());
  out.c = std::pow(out.lhs / out.rhs, n - 1);
  out.f = out.c * f;
  return out;
}

Eigen::SparseMatrix<double> assemble_weighted_stiffness(const Mesh& mesh, const ScalarField& f) {
  if (f.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "density size does not match vertex count");
  }
  const auto& F = mesh.triangles();
  Eigen::VectorXd face_weight(mesh.num_faces());
  for (int t = 0; t < mesh.num_faces(); ++t) face_weight[t] = (f[F(t, 0)] + f[F(t, 1)] + f[F(t, 2)]) / 3.0;
  return cotan_stiffness(mesh, face_weight);
}

ScalarField neumann_load(const Mesh& mesh, const ScalarField& f, const ShapeData& shape, int n,
                         const Eigen::VectorXd& mass) {
  const ScalarField source =
      (n * f.array().pow(density_exponent(n))).matrix() - sobolev_integrand(mesh, f, shape);
  ScalarField load = -(source.array() * (mass.size() ? mass : mesh.lumped_mass()).array()).matrix();
  for (const auto& [a, b] : mesh.boundary_edges()) {
    const double half_length = 0.5 * (mesh.vertices().row(a) - mesh.vertices().row(b)).norm();
    load[a] += half_length * f[a];
    load[b] += half_length * f[b];
  }
  return load;
}

NeumannSolution solve_neumann(const Mesh& mesh, const ScalarField& f, const ShapeData& shape,
                              const SolverConfig& config, int n, const ScalarField& initial_guess) {
  require_positive(f);
  if (mesh.num_components() != 1) {
    throw PdeError(PdeError::Kind::DisconnectedMesh,
                   "mesh has " + std::to_string(mesh.num_components()) +
                       " components; solve each connected component separately");
  }
  const Eigen::SparseMatrix<double> K = assemble_weighted_stiffness(mesh, f);
  const Eigen::VectorXd& mass = mesh.lumped_mass();
  {
    // Compatibility is a statement about the quadrature used for normalization.
    // The scale is the volume term alone: on a sphere the two source terms
    // cancel pointwise and |load| is itself roundoff.
    const Eigen::VectorXd check = neumann_load(mesh, f, shape, n);
    const double scale = n * mass.dot(f.array().pow(density_exponent(n)).matrix());
    if (std::abs(check.sum()) > 1e-8 * std::max(scale, check.cwiseAbs().sum())) {
      throw PdeError(PdeError::Kind::CompatibilityViolation,
                     "load does not integrate to zero; was the density normalized?");
    }
  }
  // The solve itself uses the dual cell mass; the O(h^2) difference in total
  // is removed in proportion to mass.
  const Eigen::VectorXd dual = dual_cell_mass(mesh);
  Eigen::VectorXd b = neumann_load(mesh, f, shape, n, dual);
  b -= dual * (b.sum() / dual.sum());

  const int nv = mesh.num_vertices();
  const int max_iters = config.max_iters > 0 ? config.max_iters : 10 * nv;
  const Eigen::VectorXd inv_diag =
      config.precond == Preconditioner::Jacobi ? Eigen::VectorXd(K.diagonal().cwiseInverse())
                                               : Eigen::VectorXd::Ones(nv);

  NeumannSolution sol;
  Eigen::VectorXd x = initial_guess.size() == nv ? initial_guess : Eigen::VectorXd::Zero(nv);
  remove_weighted_mean(x, mass);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    sol.u = Eigen::VectorXd::Zero(nv);
  } else {
    Eigen::VectorXd r = b - K * x;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    int iter = 0;
    while (r.norm() > config.cg_tol * b_norm) {
      if (iter >= max_iters) {
        throw PdeError(PdeError::Kind::NoConvergence,
                       "CG did not converge in " + std::to_string(max_iters) + " iterations");
      }
      const Eigen::VectorXd Kp = K * p;
      const double alpha = rz / p.dot(Kp);
      x += alpha * p;
      r -= alpha * Kp;
      r.array() -= r.mean();
      remove_weighted_mean(x, mass);
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
      ++iter;
    }
    sol.u = x;
    sol.cg_iterations = iter;
    sol.linear_residual = (b - K * x).norm() / b_norm;
  }

  const ResidualReport residual = pde_residual(mesh, f, sol.u, shape, n);
  sol.interior_pde_residual = residual.interior_pde_residual;
  sol.boundary_flux_error = residual.boundary_flux_error;
  return sol;
}

ResidualReport pde_residual(const Mesh& mesh, const ScalarField& f, const ScalarField& u,
                            const ShapeData& shape, int n) {
  ResidualReport report;
  const AmbientVectorField grad_u = vertex_gradient(mesh, shape.frames, u);
  const AmbientVectorField grad_f = vertex_gradient(mesh, shape.frames, f);
  const ScalarField integrand = sobolev_integrand(mesh, f, shape);
  const Eigen::VectorXd& mass = mesh.lumped_mass();

  double residual_sq = 0.0;
  double source_sq = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!shape.pointwise_ok[v]) continue;
    const double laplacian = LocalQuadraticFits::hessian(shape.fits.fit(v, u)).trace();
    const double divergence = f[v] * laplacian + grad_f.row(v).dot(grad_u.row(v));
    const double leading = n * std::pow(f[v], density_exponent(n));
    const double r = divergence - (leading - integrand[v]);
    residual_sq += mass[v] * r * r;
    source_sq += mass[v] * leading * leading;
  }
  report.interior_pde_residual = std::sqrt(residual_sq);
  report.relative_interior_residual = source_sq > 0.0 ? std::sqrt(residual_sq / source_sq) : 0.0;

  // Each boundary edge lies in exactly one face; its conormal is the in-plane
  // unit vector orthogonal to the edge pointing away from the opposite vertex.
  std::map<std::pair<int, int>, int> owner;
  const auto& F = mesh.triangles();
  for (int t = 0; t < mesh.num_faces(); ++t) {
    for (int k = 0; k < 3; ++k) owner[{F(t, k), F(t, (k + 1) % 3)}] = t;
  }
  const TangentVectorField face_grad = face_gradient(mesh, u);
  for (const auto& [a, b] : mesh.boundary_edges()) {
    const int t = owner.at({a, b});
    int opposite = F(t, 0);
    for (int k = 0; k < 3; ++k) {
      if (F(t, k) != a && F(t, k) != b) opposite = F(t, k);
    }
    const Eigen::VectorXd edge = (mesh.position(b) - mesh.position(a)).normalized();
    Eigen::VectorXd to_opposite = mesh.position(opposite) - mesh.position(a);
    Eigen::VectorXd eta = -(to_opposite - to_opposite.dot(edge) * edge);
    eta.normalize();
    const double flux = face_grad.row(t).dot(eta.transpose());
    report.boundary_flux_error = std::max(report.boundary_flux_error, std::abs(flux - 1.0));
  }
  return report;
}

}  // namespace abp
