#pragma once

#include "abplab/ball.hpp"
#include "abplab/mesh.hpp"
#include "abplab/shape.hpp"
#include "abplab/transport.hpp"

#include <Eigen/Core>

#include <string>

namespace abp {

/// n ((n+m) |B^{n+m}| / (m |B^m|))^{1/n}. For m = 2 this is n |B^n|^{1/n}.
template <typename Scalar = double>
Scalar sobolev_constant(int n, int m) {
  using std::pow;
  return Scalar(n) * pow(Scalar(n + m) * ball_volume<Scalar>(n + m) / (Scalar(m) * ball_volume<Scalar>(m)),
                         Scalar(1) / Scalar(n));
}

struct SobolevLhs {
  double curvature_term = 0.0;  // int sqrt(|grad f|^2 + f^2 |H|^2)
  double boundary_term = 0.0;   // int_boundary f
  double total() const { return curvature_term + boundary_term; }
};

SobolevLhs sobolev_lhs(const Mesh& mesh, const ScalarField& f, const ShapeData& shape);

/// Constant times (int f^{n/(n-1)})^{(n-1)/n}; m = 1 is evaluated with m = 2.
double sobolev_rhs(const Mesh& mesh, const ScalarField& f, int n, int m);

struct InequalityReport {
  int n = 2;
  int m = 2;            // codimension used for the constant
  int m_requested = 2;
  std::string note;     // set when m was promoted
  double lhs = 0.0;
  double rhs = 0.0;
  double deficit = 0.0;  // lhs / rhs
  double constant = 0.0;
  double f_power_integral = 0.0;  // int f^{n/(n-1)}
  double curvature_term = 0.0;
  double boundary_term = 0.0;
  double tol_disc = 0.0;
  bool pass = false;  // deficit >= 1 - tol_disc
};

/// Default discretization tolerance: 5 h with h the relative mesh size.
double default_tol_disc(const Mesh& mesh);

/// `tol_disc` <= 0 selects default_tol_disc.
InequalityReport deficit(const Mesh& mesh, const ScalarField& f, int n, int m, const ShapeData& shape,
                         double tol_disc = 0.0);

struct IsoperimetricReport {
  double area = 0.0;
  double boundary_length = 0.0;
  double ratio = 0.0;     // |dS| / (n |B^n|^{1/n} |S|^{(n-1)/n})
  double ratio_sq = 0.0;  // |dS|^2 / (4 pi |S|)
  double max_interior_mean_curvature = 0.0;
};

IsoperimetricReport isoperimetric_report(const Mesh& mesh, const ShapeData& shape);

struct QuadraticFit {
  double lambda = 0.0;
  Eigen::VectorXd p;  // ambient point on the plane P
  double c = 0.0;
  double residual = 0.0;  // RMS of u - (lambda/2 |x - p|^2 + c)
  bool ok = false;        // lambda > 0
};

struct EqualityDiagnostics {
  double max_second_fundamental = 0.0;
  double f_variation = 0.0;  // (max f - min f) / (max f + min f)
  double hessian_deviation = 0.0;  // max over Omega of |D^2 u - f^{1/(n-1)} g|_F
  QuadraticFit quadratic_fit;
  double flatness = 0.0;     // RMS distance to the best-fit plane P
  double containment = 0.0;  // max over vertices of (lambda |x_P - p| - 1)_+
  double deficit = 0.0;
  double tolerance = 0.0;
  bool near_equality = false;
};

/// `tolerance` bounds every deviation; `deficit_value` is compared with 1 + eps_eq.
EqualityDiagnostics equality_diagnostics(const Mesh& mesh, const ScalarField& f, const TransportState& state,
                                         const ShapeData& shape, double deficit_value, double eps_eq,
                                         double tolerance);

}  // namespace abp
