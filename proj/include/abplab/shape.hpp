#pragma once

#include "abplab/mesh.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace abp {

/// Per-vertex orthonormal frames: columns 0 and 1 span the tangent plane,
/// the remaining d - 2 columns are the normal frame nu_1..nu_m.
struct VertexFrames {
  std::vector<Eigen::MatrixXd> frame;

  int codim() const { return frame.empty() ? 0 : static_cast<int>(frame.front().cols()) - 2; }
  auto tangent(int v) const { return frame[v].leftCols<2>(); }
  auto normal(int v) const { return frame[v].rightCols(frame[v].cols() - 2); }
};

/// Tangent plane from the area-weighted average of incident face-plane
/// projectors, oriented like the incident faces. In R^3 the normal is
/// t1 x t2; in R^4 it is completed by Gram-Schmidt from the coordinate axes.
VertexFrames vertex_frames(const Mesh& mesh);

/// Symmetric 2x2 tensors in the per-vertex tangent basis of a VertexFrames.
struct SymTensorField {
  std::vector<Eigen::Matrix2d> values;
  std::vector<char> valid;  // 0 where the local fit was rank deficient
};

/// Weighted least-squares quadratic fits over 2-ring neighborhoods in
/// tangent-plane coordinates. Per vertex the model is
///   q(s, t) = g_s s + g_t t + (a s^2 + 2 b s t + c t^2) / 2
/// relative to the value at the vertex itself.
class LocalQuadraticFits {
 public:
  using Coefficients = Eigen::Matrix<double, 5, 1>;

  LocalQuadraticFits() = default;
  LocalQuadraticFits(const Mesh& mesh, const VertexFrames& frames);

  bool valid(int v) const { return patches_[v].valid; }
  const std::vector<int>& neighbors(int v) const { return patches_[v].neighbors; }
  /// Mean distance from the vertex to its stencil.
  double stencil_radius(int v) const { return patches_[v].radius; }

  /// Fit of a per-vertex field around v.
  Coefficients fit(int v, const Eigen::Ref<const Eigen::VectorXd>& values) const;
  /// Fit of the ambient offsets x_j - x_v projected on `direction`.
  Coefficients fit_height(int v, const Eigen::MatrixXd& vertices,
                          const Eigen::Ref<const Eigen::VectorXd>& direction) const;

  static Eigen::Vector2d gradient(const Coefficients& c) { return c.head<2>(); }
  static Eigen::Matrix2d hessian(const Coefficients& c) {
    Eigen::Matrix2d h;
    h << c[2], c[3], c[3], c[4];
    return h;
  }

 private:
  struct Patch {
    std::vector<int> neighbors;
    Eigen::Matrix<double, 5, Eigen::Dynamic> solve;
    double radius = 0.0;
    bool valid = false;
  };
  std::vector<Patch> patches_;
};

/// Discrete extrinsic geometry of a mesh.
struct ShapeData {
  VertexFrames frames;
  LocalQuadraticFits fits;
  /// Mean curvature vector per vertex (rows); boundary rows copied from
  /// `extension_source`.
  AmbientVectorField mean_curvature;
  /// II per vertex: codim() symmetric matrices <II, nu_alpha> in the tangent basis.
  std::vector<std::vector<Eigen::Matrix2d>> second_fundamental;
  /// Outward unit conormal at boundary vertices, zero rows elsewhere.
  AmbientVectorField conormal;
  /// Nearest interior vertex for boundary vertices, identity otherwise.
  std::vector<int> extension_source;
  /// 1 where H was taken from the trace of the fitted II.
  std::vector<char> curvature_from_fit;
  /// 1 for interior vertices with a well-conditioned fit.
  std::vector<char> pointwise_ok;

  int codim() const { return frames.codim(); }
  /// sqrt(sum_alpha |<II, nu_alpha>|_F^2).
  double second_fundamental_norm(int v) const;
  /// <II, y> for y given in the normal frame at v.
  Eigen::Matrix2d second_fundamental_along(int v, const Eigen::Ref<const Eigen::VectorXd>& y) const;
};

/// K_ij = sum_f w_f <grad phi_i, grad phi_j> area_f for P1 hat functions.
Eigen::SparseMatrix<double> cotan_stiffness(const Mesh& mesh, const Eigen::VectorXd& face_weight);

/// Per-face gradient of the piecewise-linear interpolant.
TangentVectorField face_gradient(const Mesh& mesh, const ScalarField& field);

/// Area-weighted average of incident face gradients, projected to the
/// vertex tangent plane.
AmbientVectorField vertex_gradient(const Mesh& mesh, const VertexFrames& frames,
                                   const ScalarField& field);

SymTensorField vertex_hessian(const LocalQuadraticFits& fits, const ScalarField& field);
SymTensorField vertex_hessian(const Mesh& mesh, const ScalarField& field);

/// Circumcentric dual cell areas, the lumped mass under which the cotangent
/// Laplacian of a quadratic on a flat mesh is exact. Vertices whose signed
/// dual area drops below half the barycentric mass (badly obtuse fans) fall
/// back to the barycentric mass.
Eigen::VectorXd dual_cell_mass(const Mesh& mesh);

/// Delta_Sigma x by cotangent weights over the dual cell mass, before
/// boundary extension.
AmbientVectorField mean_curvature_vector(const Mesh& mesh);

/// Nearest interior vertex (hop distance first, then Euclidean) for each
/// boundary vertex; components without interior vertices map to themselves.
std::vector<int> interior_extension(const Mesh& mesh);

AmbientVectorField conormal(const Mesh& mesh, const VertexFrames& frames);

/// Frames, fits, H, II and conormal in one pass.
ShapeData second_fundamental_form(const Mesh& mesh);

}  // namespace abp
