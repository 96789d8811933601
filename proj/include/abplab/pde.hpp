#pragma once

#include "abplab/mesh.hpp"
#include "abplab/shape.hpp"

#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace abp {

class PdeError : public std::runtime_error {
 public:
  enum class Kind { NonPositiveDensity, DisconnectedMesh, CompatibilityViolation, NoConvergence };

  PdeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Exponent n / (n - 1) applied to the density on the right-hand side.
inline double density_exponent(int n) { return static_cast<double>(n) / (n - 1); }

/// sqrt(|grad f|^2 + f^2 |H|^2) per vertex, with vertex-averaged gradients.
ScalarField sobolev_integrand(const Mesh& mesh, const ScalarField& f, const ShapeData& shape);

struct NormalizedDensity {
  ScalarField f;
  double c = 1.0;    // scale applied to the input density
  double lhs = 0.0;  // int sqrt(|grad f|^2 + f^2|H|^2) + int_boundary f, before scaling
  double rhs = 0.0;  // n int f^{n/(n-1)}, before scaling
};

/// Rescales f so that lhs = rhs. Since lhs is 1-homogeneous and rhs is
/// n/(n-1)-homogeneous the scale is c = (lhs / rhs)^(n-1).
NormalizedDensity normalize_density(const Mesh& mesh, const ScalarField& f, const ShapeData& shape,
                                    int n = 2);

/// K_ij = int f <grad phi_i, grad phi_j> with f taken per face as the vertex mean.
Eigen::SparseMatrix<double> assemble_weighted_stiffness(const Mesh& mesh, const ScalarField& f);

enum class Preconditioner { Jacobi, None };

struct SolverConfig {
  double cg_tol = 1e-10;
  int max_iters = 0;  // 0 means 10 * vertex count
  Preconditioner precond = Preconditioner::Jacobi;
};

struct NeumannSolution {
  ScalarField u;  // lumped-mass mean zero
  int cg_iterations = 0;
  double linear_residual = 0.0;
  double interior_pde_residual = 0.0;
  double boundary_flux_error = 0.0;
  double normalization_constant = 1.0;
};

/// Weak-form load: -(n f^{n/(n-1)} - sqrt(...)) * mass + boundary f, lumped.
/// An empty `mass` means the barycentric lumped mass.
ScalarField neumann_load(const Mesh& mesh, const ScalarField& f, const ShapeData& shape, int n = 2,
                         const Eigen::VectorXd& mass = {});

/// Solves div(f grad u) = n f^{n/(n-1)} - sqrt(|grad f|^2 + f^2 |H|^2) with
/// <grad u, eta> = 1 on the boundary, by projected preconditioned CG.
/// `f` must already be normalized; the mesh must be connected.
NeumannSolution solve_neumann(const Mesh& mesh, const ScalarField& f, const ShapeData& shape,
                              const SolverConfig& config = {}, int n = 2,
                              const ScalarField& initial_guess = {});

struct ResidualReport {
  /// L2 (lumped mass) norm over interior vertices of f tr(D^2 u) + <grad f, grad u> - rhs.
  double interior_pde_residual = 0.0;
  /// interior_pde_residual divided by the L2 norm of n f^{n/(n-1)}.
  double relative_interior_residual = 0.0;
  /// max over boundary edges of |<grad u, eta> - 1|, using the face gradient.
  double boundary_flux_error = 0.0;
};

ResidualReport pde_residual(const Mesh& mesh, const ScalarField& f, const ScalarField& u,
                            const ShapeData& shape, int n = 2);

}  // namespace abp
