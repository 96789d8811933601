#include "abplab/transport.hpp"

#include "abplab/ball.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace abp {

namespace {

// Ambient tangent vectors of the fitted graph chart at v, and the normal
// frame carried to (s, t) by projecting out the tangent plane.
struct ChartPoint {
  Eigen::MatrixXd tangent;  // d x 2, coordinate vectors d x / d(s, t)
  Eigen::MatrixXd normal;   // d x m, orthonormal
};

ChartPoint chart_point(const TransportState& state, int v, const std::vector<LocalQuadraticFits::Coefficients>& height,
                       const Eigen::Vector2d& st) {
  const auto T = state.shape->frames.tangent(v);
  const auto N = state.shape->frames.normal(v);
  const int m = static_cast<int>(N.cols());
  ChartPoint out;
  out.tangent = T;
  for (int a = 0; a < m; ++a) {
    const Eigen::Vector2d slope =
        LocalQuadraticFits::gradient(height[a]) + LocalQuadraticFits::hessian(height[a]) * st;
    out.tangent += N.col(a) * slope.transpose();
  }
  // Orthonormal basis of the tangent plane, then Gram-Schmidt the old normals against it.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.tangent);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(out.tangent.rows(), 2);
  out.normal.resize(N.rows(), m);
  for (int a = 0; a < m; ++a) {
    Eigen::VectorXd nu = N.col(a);
    nu -= q * (q.transpose() * nu);
    for (int b = 0; b < a; ++b) nu -= out.normal.col(b) * out.normal.col(b).dot(nu);
    out.normal.col(a) = nu.normalized();
  }
  return out;
}

std::vector<LocalQuadraticFits::Coefficients> height_fits(const TransportState& state, int v) {
  const auto N = state.shape->frames.normal(v);
  std::vector<LocalQuadraticFits::Coefficients> out;
  for (int a = 0; a < N.cols(); ++a) {
    out.push_back(state.shape->fits.fit_height(v, state.mesh->vertices(), N.col(a)));
  }
  return out;
}

double min_eigenvalue(const Eigen::Matrix2d& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

double TransportState::jacobian_bound(int v) const { return std::pow(f[v], density_exponent(n)); }

double TransportState::psd_slack(int v) const {
  return tol.tol_psd * (std::pow(f[v], 1.0 / (n - 1)) + shape->second_fundamental_norm(v));
}

double TransportState::fiber_radius(int v) const {
  return std::sqrt(std::max(0.0, 1.0 - grad_u.row(v).squaredNorm()));
}

double TransportState::reconstruction_tolerance() const {
  return tol.tol_reconstruction > 0.0 ? tol.tol_reconstruction : 5.0 * relative_mesh_size(*mesh);
}

std::vector<char> omega_mask(const TransportState& state) {
  const Mesh& mesh = *state.mesh;
  std::vector<char> omega(mesh.num_vertices(), 0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    omega[v] = state.shape->pointwise_ok[v] && state.grad_u.row(v).norm() < 1.0 - state.tol.tol_open;
  }
  return omega;
}

TransportState build_transport_state(const Mesh& mesh, const ScalarField& f, const NeumannSolution& solution,
                                     const ShapeData& shape, const TransportTolerances& tol, int n) {
  if (f.size() != mesh.num_vertices() || solution.u.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "density or potential size does not match vertex count");
  }
  TransportState state;
  state.mesh = &mesh;
  state.shape = &shape;
  state.n = n;
  state.f = f;
  state.u = solution.u;
  state.tol = tol;
  state.grad_u = vertex_gradient(mesh, shape.frames, solution.u);
  state.hess_u = vertex_hessian(shape.fits, solution.u).values;
  state.omega = omega_mask(state);
  return state;
}

PhiValue phi_eval(const TransportState& state, int v, const Eigen::VectorXd& y) {
  PhiValue out;
  out.point = state.grad_u.row(v).transpose() + state.shape->frames.normal(v) * y;
  out.outside_u = state.grad_u.row(v).squaredNorm() + y.squaredNorm() >= 1.0;
  return out;
}

Eigen::Matrix2d transport_hessian(const TransportState& state, int v, const Eigen::VectorXd& y) {
  return state.hess_u[v] - state.shape->second_fundamental_along(v, y);
}

double jacobian_det(const TransportState& state, int v, const Eigen::VectorXd& y) {
  return transport_hessian(state, v, y).determinant();
}

double jacobian_det_finite_difference(const TransportState& state, int v, const Eigen::VectorXd& y, double step) {
  const auto height = height_fits(state, v);
  const LocalQuadraticFits::Coefficients ufit = state.shape->fits.fit(v, state.u);
  const Eigen::Vector2d du = LocalQuadraticFits::gradient(ufit);
  const Eigen::Matrix2d d2u = LocalQuadraticFits::hessian(ufit);

  auto phi = [&](const Eigen::Vector2d& st) {
    const ChartPoint chart = chart_point(state, v, height, st);
    const Eigen::Matrix2d gram = chart.tangent.transpose() * chart.tangent;
    const Eigen::VectorXd grad = chart.tangent * gram.inverse() * (du + d2u * st);
    return Eigen::VectorXd(grad + chart.normal * y);
  };

  const double delta = step * state.shape->fits.stencil_radius(v);
  const int d = state.ambient_dim();
  const ChartPoint origin = chart_point(state, v, height, Eigen::Vector2d::Zero());
  Eigen::MatrixXd jac(d, d);
  for (int i = 0; i < 2; ++i) {
    const Eigen::Vector2d e = delta * Eigen::Vector2d::Unit(i);
    jac.col(i) = (phi(e) - phi(-e)) / (2.0 * delta);
  }
  jac.rightCols(d - 2) = origin.normal;

  // Express in the vertex frame and divide by the chart's area element.
  const Eigen::MatrixXd& frame = state.shape->frames.frame[v];
  const double area_element = std::sqrt((origin.tangent.transpose() * origin.tangent).determinant());
  return (frame.transpose() * jac).determinant() / area_element;
}

JacobianFormulaReport jacobian_formula_check(const TransportState& state, int samples_per_vertex,
                                             std::uint64_t seed) {
  JacobianFormulaReport report;
  for (int v = 0; v < state.mesh->num_vertices(); ++v) {
    if (!state.omega[v]) continue;
    std::mt19937_64 rng = sample_stream(seed, static_cast<std::uint64_t>(v));
    for (int k = 0; k < samples_per_vertex; ++k) {
      const Eigen::VectorXd y = state.fiber_radius(v) * sample_unit_ball(rng, state.codim());
      const double exact = jacobian_det(state, v, y);
      const double fd = jacobian_det_finite_difference(state, v, y);
      const double error = std::abs(fd - exact) / std::max(std::abs(exact), state.jacobian_bound(v));
      ++report.samples;
      if (error > report.max_relative_error || report.worst_vertex < 0) {
        report.max_relative_error = error;
        report.worst_vertex = v;
      }
    }
  }
  return report;
}

PreimageDiagnostics locate_preimage(const TransportState& state, const Eigen::VectorXd& xi) {
  const Mesh& mesh = *state.mesh;
  const ShapeData& shape = *state.shape;
  PreimageDiagnostics out;

  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double w = state.u[v] - mesh.vertices().row(v).dot(xi.transpose());
    if (w < best) {
      best = w;
      out.vertex = v;
    }
  }
  const int v = out.vertex;
  out.interior = !mesh.is_boundary_vertex(v);

  const auto T = shape.frames.tangent(v);
  const auto N = shape.frames.normal(v);
  Eigen::VectorXd grad = state.grad_u.row(v).transpose();
  Eigen::MatrixXd normal = N;
  out.x = mesh.position(v);

  // One Newton step for w in the tangent chart: grad_st w = T^T (grad u - xi),
  // Hess w = D^2 u - <II, xi>.
  if (out.interior && shape.fits.valid(v)) {
    const Eigen::VectorXd xi_normal = N.transpose() * xi;
    const Eigen::Matrix2d hess_w = state.hess_u[v] - shape.second_fundamental_along(v, xi_normal);
    const Eigen::Vector2d grad_w = T.transpose() * (grad - xi);
    const Eigen::LLT<Eigen::Matrix2d> llt(hess_w);
    if (llt.info() == Eigen::Success) {
      const Eigen::Vector2d step = -llt.solve(grad_w);
      if (step.norm() <= shape.fits.stencil_radius(v)) {
        const auto height = height_fits(state, v);
        const ChartPoint chart = chart_point(state, v, height, step);
        Eigen::VectorXd offset = T * step;
        for (int a = 0; a < N.cols(); ++a) {
          const auto& c = height[a];
          offset += N.col(a) * (LocalQuadraticFits::gradient(c).dot(step) +
                                0.5 * step.dot(LocalQuadraticFits::hessian(c) * step));
        }
        out.x += offset;
        const Eigen::Matrix2d gram = chart.tangent.transpose() * chart.tangent;
        grad = chart.tangent * gram.inverse() *
               (T.transpose() * state.grad_u.row(v).transpose() + state.hess_u[v] * step);
        normal = chart.normal;
        out.newton_applied = true;
      }
    }
  }

  out.y = normal.transpose() * (xi - grad);
  out.radius_sq = grad.squaredNorm() + out.y.squaredNorm();
  out.min_eigenvalue = min_eigenvalue(transport_hessian(state, v, out.y));
  out.reconstruction_error = (grad + normal * out.y - xi).norm();
  return out;
}

std::string to_string(CoverageFailure reason) {
  switch (reason) {
    case CoverageFailure::MinimizerOnBoundary:
      return "minimizer-on-boundary";
    case CoverageFailure::PsdViolation:
      return "psd-violation";
    case CoverageFailure::RadiusViolation:
      return "radius-violation";
    case CoverageFailure::ReconstructionError:
      return "reconstruction-error";
  }
  return "unknown";
}

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Eigen::VectorXd sample_unit_ball(std::mt19937_64& rng, int dim) {
  Eigen::VectorXd p(dim);
  do {
    for (int i = 0; i < dim; ++i) p[i] = 2.0 * unit_double(rng) - 1.0;
  } while (p.squaredNorm() >= 1.0);
  return p;
}

CoverageReport coverage_check(const TransportState& state, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("coverage_check: sample_count must be at least 1");
  CoverageReport report;
  report.samples = sample_count;
  const double tol_recon = state.reconstruction_tolerance();
  for (int i = 0; i < sample_count; ++i) {
    std::mt19937_64 rng = sample_stream(seed, static_cast<std::uint64_t>(i));
    const Eigen::VectorXd xi = sample_unit_ball(rng, state.ambient_dim());
    const PreimageDiagnostics diag = locate_preimage(state, xi);

    bool hit = true;
    CoverageFailure reason{};
    if (!diag.interior) {
      hit = false;
      reason = CoverageFailure::MinimizerOnBoundary;
    } else if (diag.min_eigenvalue < -state.psd_slack(diag.vertex)) {
      hit = false;
      reason = CoverageFailure::PsdViolation;
    } else if (diag.radius_sq >= 1.0) {
      hit = false;
      reason = CoverageFailure::RadiusViolation;
    } else if (diag.reconstruction_error > tol_recon) {
      hit = false;
      reason = CoverageFailure::ReconstructionError;
    }

    const bool near_boundary = xi.norm() > 0.98;
    report.near_boundary_samples += near_boundary;
    if (hit) {
      ++report.hits;
      report.near_boundary_hits += near_boundary;
      report.max_reconstruction_error = std::max(report.max_reconstruction_error, diag.reconstruction_error);
    } else {
      report.failures.push_back({xi, reason});
    }
  }
  report.fraction = static_cast<double>(report.hits) / report.samples;
  return report;
}

JacobianBoundReport jacobian_bound_check(const TransportState& state, int samples_per_vertex, std::uint64_t seed,
                                         double tol_jac) {
  JacobianBoundReport report;
  report.min_det = std::numeric_limits<double>::infinity();
  const int m = state.codim();
  for (int v = 0; v < state.mesh->num_vertices(); ++v) {
    if (!state.omega[v]) continue;
    const double radius = state.fiber_radius(v) - state.tol.tol_open;
    if (radius <= 0.0) continue;
    std::mt19937_64 rng = sample_stream(seed, static_cast<std::uint64_t>(v));
    for (int k = 0; k < samples_per_vertex; ++k) {
      const Eigen::VectorXd y = radius * sample_unit_ball(rng, m);
      ++report.samples;
      const Eigen::Matrix2d A = transport_hessian(state, v, y);
      if (min_eigenvalue(A) < -state.psd_slack(v)) continue;
      ++report.samples_in_a;
      const double det = A.determinant();
      report.min_det = std::min(report.min_det, det);
      const double ratio = det / state.jacobian_bound(v);
      if (ratio > report.max_ratio || report.argmax_vertex < 0) {
        report.max_ratio = ratio;
        report.argmax_vertex = v;
        report.argmax_y = y;
      }
    }
  }
  if (report.samples_in_a == 0) report.min_det = 0.0;
  report.pass = report.max_ratio <= 1.0 + tol_jac;
  return report;
}

double omega_integral(const TransportState& state, const std::function<double(int, double)>& integrand) {
  const Mesh& mesh = *state.mesh;
  ScalarField values = ScalarField::Zero(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const int source = state.shape->extension_source[v];
    if (!state.omega[source]) continue;
    values[v] = integrand(v, state.grad_u.row(source).squaredNorm());
  }
  return integrate(mesh, values);
}

ChainReport annulus_chain_check(const TransportState& state, const std::vector<double>& sigmas, double tol) {
  const int n = state.n;
  const int m = state.codim();
  const double half_m = 0.5 * m;
  const double ball_nm = ball_volume(n + m);
  const double ball_m = ball_volume(m);
  const double mass = omega_integral(state, [&](int v, double) { return state.jacobian_bound(v); });

  ChainReport report;
  report.tol = tol;
  report.monotone = true;
  for (double sigma : sigmas) {
    if (sigma < 0.0 || sigma >= 1.0) throw std::invalid_argument("annulus_chain_check: sigma must lie in [0, 1)");
    ChainRow row;
    row.sigma = sigma;
    row.lhs = ball_nm * (1.0 - std::pow(sigma, n + m));
    row.middle = ball_m * omega_integral(state, [&](int v, double g2) {
      const double outer = std::pow(std::max(0.0, 1.0 - g2), half_m);
      const double inner = std::pow(std::max(0.0, sigma * sigma - g2), half_m);
      return (outer - inner) * state.jacobian_bound(v);
    });
    row.rhs = half_m * ball_m * (1.0 - sigma * sigma) * mass;
    row.monotone = row.lhs <= row.middle * (1.0 + tol) && row.middle <= row.rhs * (1.0 + tol);
    report.monotone = report.monotone && row.monotone;
    report.rows.push_back(row);
  }
  if (!report.rows.empty()) {
    const ChainRow& last = *std::max_element(report.rows.begin(), report.rows.end(),
                                             [](const ChainRow& a, const ChainRow& b) { return a.sigma < b.sigma; });
    report.lhs_slope = last.lhs / (1.0 - last.sigma);
    report.rhs_slope = last.rhs / (1.0 - last.sigma);
  }
  report.lhs_limit = (n + m) * ball_nm;
  report.rhs_limit = m * ball_m * mass;
  return report;
}

}  // namespace abp
