#pragma once

#include "abplab/mesh.hpp"
#include "abplab/pde.hpp"
#include "abplab/shape.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace abp {

struct TransportTolerances {
  /// Eigenvalue slack for A-membership, relative to f^{1/(n-1)} + |II| at the vertex.
  double tol_psd = 1e-6;
  /// Omega keeps interior vertices with |grad u| < 1 - tol_open.
  double tol_open = 1e-3;
  /// Allowed |Phi(x, y) - xi| for a coverage hit; 0 means 5 h.
  double tol_reconstruction = 0.0;
};

/// Fields on which the transport map is evaluated. Holds references to the
/// mesh and shape data, which must outlive the state.
struct TransportState {
  const Mesh* mesh = nullptr;
  const ShapeData* shape = nullptr;
  int n = 2;
  ScalarField f;  // normalized density
  ScalarField u;
  AmbientVectorField grad_u;             // vertex gradients, tangent to the vertex plane
  std::vector<Eigen::Matrix2d> hess_u;   // D^2 u in the vertex tangent basis
  std::vector<char> omega;               // interior, fit valid, |grad u| < 1 - tol_open
  TransportTolerances tol;

  int codim() const { return shape->codim(); }
  int ambient_dim() const { return mesh->ambient_dim(); }
  /// f^{n/(n-1)} at v: the pointwise Jacobian bound.
  double jacobian_bound(int v) const;
  /// Absolute PSD slack at v.
  double psd_slack(int v) const;
  /// Normal-coordinate radius sqrt(1 - |grad u|^2) of the fiber of U over v (0 if empty).
  double fiber_radius(int v) const;
  double reconstruction_tolerance() const;
};

TransportState build_transport_state(const Mesh& mesh, const ScalarField& f, const NeumannSolution& solution,
                                     const ShapeData& shape, const TransportTolerances& tol = {}, int n = 2);

/// Recomputes Omega from grad_u and the fit flags.
std::vector<char> omega_mask(const TransportState& state);

struct PhiValue {
  Eigen::VectorXd point;
  bool outside_u = false;  // |grad u|^2 + |y|^2 >= 1
};

/// grad u(x) + sum_alpha y_alpha nu_alpha(x).
PhiValue phi_eval(const TransportState& state, int v, const Eigen::VectorXd& y);

/// D^2 u(x) - <II(x), y> in the vertex tangent basis.
Eigen::Matrix2d transport_hessian(const TransportState& state, int v, const Eigen::VectorXd& y);

/// det(D^2 u - <II, y>), the Jacobian determinant of Phi at (x, y).
double jacobian_det(const TransportState& state, int v, const Eigen::VectorXd& y);

/// Determinant of central differences of Phi over the chart
/// (s, t, y) -> grad u(x(s, t)) + sum y_alpha nu_alpha(s, t), where x(s, t)
/// is the fitted local graph over the tangent plane at v and grad u, nu are
/// carried along the chart. `step` is relative to the stencil radius.
double jacobian_det_finite_difference(const TransportState& state, int v, const Eigen::VectorXd& y,
                                      double step = 1e-3);

struct JacobianFormulaReport {
  /// max |fd - det| / max(|det|, f^{n/(n-1)}) over the samples.
  double max_relative_error = 0.0;
  int worst_vertex = -1;
  int samples = 0;
};

/// Compares jacobian_det with jacobian_det_finite_difference at sampled
/// (x, y) with x in Omega and y in the fiber of U.
JacobianFormulaReport jacobian_formula_check(const TransportState& state, int samples_per_vertex,
                                             std::uint64_t seed);

struct PreimageDiagnostics {
  int vertex = -1;             // vertex minimizing w = u - <x, xi>
  Eigen::VectorXd x;           // refined minimizer after one Newton step
  Eigen::VectorXd y;           // normal coordinates of xi - grad u(x)
  bool interior = false;
  bool newton_applied = false;
  double radius_sq = 0.0;      // |grad u(x)|^2 + |y|^2
  double min_eigenvalue = 0.0; // of D^2 u - <II, y>
  double reconstruction_error = 0.0;
};

PreimageDiagnostics locate_preimage(const TransportState& state, const Eigen::VectorXd& xi);

enum class CoverageFailure { MinimizerOnBoundary, PsdViolation, RadiusViolation, ReconstructionError };

std::string to_string(CoverageFailure reason);

struct CoverageFailureRecord {
  Eigen::VectorXd xi;
  CoverageFailure reason;
};

struct CoverageReport {
  int samples = 0;
  int hits = 0;
  double fraction = 0.0;
  std::vector<CoverageFailureRecord> failures;
  double max_reconstruction_error = 0.0;  // over hits
  /// Targets with |xi| > 0.98, where the boundary argument degenerates at finite resolution.
  int near_boundary_samples = 0;
  int near_boundary_hits = 0;
};

/// Deterministic generator for stream `index` under `seed`.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index);

/// Uniform point in the open unit ball of R^dim by rejection from the cube.
Eigen::VectorXd sample_unit_ball(std::mt19937_64& rng, int dim);

CoverageReport coverage_check(const TransportState& state, int sample_count, std::uint64_t seed);

struct JacobianBoundReport {
  double max_ratio = 0.0;  // max det / f^{n/(n-1)} over sampled A-points
  int argmax_vertex = -1;
  Eigen::VectorXd argmax_y;
  double min_det = 0.0;    // over sampled A-points
  int samples = 0;
  int samples_in_a = 0;
  bool pass = false;       // max_ratio <= 1 + tol_jac
};

/// Samples y uniformly in the normal disk of radius sqrt(1 - |grad u|^2) - tol_open
/// at each Omega vertex and compares det D Phi with f^{n/(n-1)} on the points of A.
JacobianBoundReport jacobian_bound_check(const TransportState& state, int samples_per_vertex,
                                         std::uint64_t seed, double tol_jac = 0.02);

struct ChainRow {
  double sigma = 0.0;
  double lhs = 0.0;     // |B^{n+m}| (1 - sigma^{n+m})
  double middle = 0.0;  // |B^m| int_Omega [(1-|grad u|^2)^{m/2} - (sigma^2-|grad u|^2)_+^{m/2}] f^{n/(n-1)}
  double rhs = 0.0;     // (m/2) |B^m| (1 - sigma^2) int_Omega f^{n/(n-1)}
  bool monotone = false;
};

struct ChainReport {
  std::vector<ChainRow> rows;
  double tol = 0.0;
  /// Divided differences at the largest sigma and their common limit candidates.
  double lhs_slope = 0.0;
  double rhs_slope = 0.0;
  double lhs_limit = 0.0;  // (n+m) |B^{n+m}|
  double rhs_limit = 0.0;  // m |B^m| int_Omega f^{n/(n-1)}
  bool monotone = false;
};

/// Omega-weighted integral of a per-vertex quantity. Boundary vertices take
/// the gradient of their interior extension source, so the integral covers
/// the whole surface when Omega contains every interior vertex.
double omega_integral(const TransportState& state, const std::function<double(int v, double grad_sq)>& integrand);

ChainReport annulus_chain_check(const TransportState& state, const std::vector<double>& sigmas, double tol);

}  // namespace abp
