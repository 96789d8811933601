#include "abplab/harness.hpp"

#include "abplab/pde.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace abp {

SobolevLhs sobolev_lhs(const Mesh& mesh, const ScalarField& f, const ShapeData& shape) {
  SobolevLhs out;
  out.curvature_term = integrate(mesh, sobolev_integrand(mesh, f, shape));
  out.boundary_term = boundary_integrate(mesh, f);
  return out;
}

double sobolev_rhs(const Mesh& mesh, const ScalarField& f, int n, int m) {
  const double integral = integrate(mesh, f.array().pow(density_exponent(n)).matrix());
  return sobolev_constant(n, std::max(m, 2)) * std::pow(integral, (n - 1.0) / n);
}

double default_tol_disc(const Mesh& mesh) { return 5.0 * relative_mesh_size(mesh); }

InequalityReport deficit(const Mesh& mesh, const ScalarField& f, int n, int m, const ShapeData& shape,
                         double tol_disc) {
  if (f.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "density size does not match vertex count");
  }
  InequalityReport report;
  report.n = n;
  report.m_requested = m;
  report.m = std::max(m, 2);
  if (m < 2) {
    report.note = "codimension " + std::to_string(m) + " evaluated with the codimension 2 constant";
  }
  const SobolevLhs lhs = sobolev_lhs(mesh, f, shape);
  report.curvature_term = lhs.curvature_term;
  report.boundary_term = lhs.boundary_term;
  report.lhs = lhs.total();
  report.f_power_integral = integrate(mesh, f.array().pow(density_exponent(n)).matrix());
  report.constant = sobolev_constant(n, report.m);
  report.rhs = report.constant * std::pow(report.f_power_integral, (n - 1.0) / n);
  report.deficit = report.lhs / report.rhs;
  report.tol_disc = tol_disc > 0.0 ? tol_disc : default_tol_disc(mesh);
  report.pass = report.deficit >= 1.0 - report.tol_disc;
  return report;
}

IsoperimetricReport isoperimetric_report(const Mesh& mesh, const ShapeData& shape) {
  IsoperimetricReport report;
  report.area = mesh.total_area();
  for (const auto& loop : mesh.boundary_loops()) report.boundary_length += loop.length;
  report.ratio = report.boundary_length / (sobolev_constant(2, 2) * std::sqrt(report.area));
  report.ratio_sq = report.boundary_length * report.boundary_length / (4.0 * std::numbers::pi * report.area);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!shape.pointwise_ok[v]) continue;
    report.max_interior_mean_curvature =
        std::max(report.max_interior_mean_curvature, shape.mean_curvature.row(v).norm());
  }
  return report;
}

EqualityDiagnostics equality_diagnostics(const Mesh& mesh, const ScalarField& f, const TransportState& state,
                                         const ShapeData& shape, double deficit_value, double eps_eq,
                                         double tolerance) {
  EqualityDiagnostics out;
  out.deficit = deficit_value;
  out.tolerance = tolerance;
  const int nv = mesh.num_vertices();
  const int n = state.n;

  for (int v = 0; v < nv; ++v) {
    if (shape.pointwise_ok[v]) {
      out.max_second_fundamental = std::max(out.max_second_fundamental, shape.second_fundamental_norm(v));
    }
  }
  out.f_variation = (f.maxCoeff() - f.minCoeff()) / (f.maxCoeff() + f.minCoeff());
  for (int v = 0; v < nv; ++v) {
    if (!state.omega[v]) continue;
    const double scale = std::pow(state.f[v], 1.0 / (n - 1));
    out.hessian_deviation =
        std::max(out.hessian_deviation, (state.hess_u[v] - scale * Eigen::Matrix2d::Identity()).norm());
  }

  // Best-fit plane P by principal components.
  const Eigen::MatrixXd& X = mesh.vertices();
  const Eigen::RowVectorXd centroid = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - centroid;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
  const Eigen::MatrixXd plane = eig.eigenvectors().rightCols(n);
  const Eigen::MatrixXd z = centered * plane;  // coordinates in P
  out.flatness = std::sqrt((centered - z * plane.transpose()).rowwise().squaredNorm().mean());

  // u ~ a + <b, z> + q |z|^2, i.e. lambda = 2q, p = -b / lambda, c = a - lambda |p|^2 / 2.
  Eigen::MatrixXd design(nv, n + 2);
  design.col(0).setOnes();
  design.middleCols(1, n) = z;
  design.col(n + 1) = z.rowwise().squaredNorm();
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(state.u);
  QuadraticFit& fit = out.quadratic_fit;
  fit.lambda = 2.0 * coef[n + 1];
  fit.ok = fit.lambda > 0.0;
  const Eigen::VectorXd p_local = fit.ok ? Eigen::VectorXd(-coef.segment(1, n) / fit.lambda)
                                         : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  fit.p = centroid.transpose() + plane * p_local;
  fit.c = coef[0] - 0.5 * fit.lambda * p_local.squaredNorm();
  fit.residual = std::sqrt((design * coef - state.u).squaredNorm() / nv);

  if (fit.ok) {
    for (int v = 0; v < nv; ++v) {
      const double dist = (z.row(v).transpose() - p_local).norm();
      out.containment = std::max(out.containment, fit.lambda * dist - 1.0);
    }
  }

  out.near_equality = deficit_value <= 1.0 + eps_eq && fit.ok && out.max_second_fundamental <= tolerance &&
                      out.f_variation <= tolerance && out.hessian_deviation <= tolerance &&
                      out.flatness <= tolerance && out.containment <= tolerance;
  return out;
}

}  // namespace abp
