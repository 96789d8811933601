#include "abplab/shape.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace abp {

namespace {

// Orthonormal basis (d x 2) of the plane of triangle f.
Eigen::MatrixXd face_basis(const Mesh& mesh, int f) {
  const auto& F = mesh.triangles();
  const Eigen::VectorXd p0 = mesh.position(F(f, 0));
  Eigen::VectorXd e1 = mesh.position(F(f, 1)) - p0;
  Eigen::VectorXd e2 = mesh.position(F(f, 2)) - p0;
  e1.normalize();
  e2 -= e2.dot(e1) * e1;
  e2.normalize();
  Eigen::MatrixXd E(mesh.ambient_dim(), 2);
  E << e1, e2;
  return E;
}

Eigen::VectorXd cross3(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Vector3d c = Eigen::Vector3d(a[0], a[1], a[2]).cross(Eigen::Vector3d(b[0], b[1], b[2]));
  return Eigen::VectorXd(c);
}

}  // namespace

VertexFrames vertex_frames(const Mesh& mesh) {
  const int d = mesh.ambient_dim();
  const auto& F = mesh.triangles();
  const auto& area = mesh.face_areas();

  std::vector<Eigen::MatrixXd> face_planes(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) face_planes[f] = face_basis(mesh, f);

  VertexFrames frames;
  frames.frame.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Eigen::MatrixXd projector = Eigen::MatrixXd::Zero(d, d);
    for (int f : mesh.vertex_faces()[v]) {
      projector.noalias() += area[f] * face_planes[f] * face_planes[f].transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(projector);
    const Eigen::MatrixXd plane = eig.eigenvectors().rightCols(2);

    // Align t1 with the coordinate axis that projects most strongly onto the plane.
    Eigen::Index axis = 0;
    plane.rowwise().squaredNorm().maxCoeff(&axis);
    Eigen::Vector2d a = plane.row(axis).transpose().normalized();
    Eigen::VectorXd t1 = plane * a;
    Eigen::VectorXd t2 = plane * Eigen::Vector2d(-a[1], a[0]);

    double orientation = 0.0;
    for (int f : mesh.vertex_faces()[v]) {
      const Eigen::VectorXd p0 = mesh.position(F(f, 0));
      const Eigen::VectorXd e1 = mesh.position(F(f, 1)) - p0;
      const Eigen::VectorXd e2 = mesh.position(F(f, 2)) - p0;
      orientation += e1.dot(t1) * e2.dot(t2) - e1.dot(t2) * e2.dot(t1);
    }
    if (orientation < 0.0) t2 = -t2;

    Eigen::MatrixXd frame(d, d);
    frame.col(0) = t1;
    frame.col(1) = t2;
    if (d == 3) {
      frame.col(2) = cross3(t1, t2).normalized();
    } else {
      std::vector<char> used(d, 0);
      for (int k = 2; k < d; ++k) {
        int best = -1;
        Eigen::VectorXd best_vec;
        double best_norm = -1.0;
        for (int e = 0; e < d; ++e) {
          if (used[e]) continue;
          Eigen::VectorXd c = Eigen::VectorXd::Unit(d, e);
          c -= frame.leftCols(k) * (frame.leftCols(k).transpose() * c);
          if (c.norm() > best_norm + 1e-12) {
            best = e;
            best_norm = c.norm();
            best_vec = c;
          }
        }
        used[best] = 1;
        best_vec /= best_norm;
        // one more pass for orthogonality in floating point
        best_vec -= frame.leftCols(k) * (frame.leftCols(k).transpose() * best_vec);
        frame.col(k) = best_vec.normalized();
      }
    }
    frames.frame[v] = std::move(frame);
  }
  return frames;
}

LocalQuadraticFits::LocalQuadraticFits(const Mesh& mesh, const VertexFrames& frames) {
  const auto& adjacency = mesh.vertex_neighbors();
  const auto& V = mesh.vertices();
  patches_.resize(mesh.num_vertices());

  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::set<int> ring;
    for (int a : adjacency[v]) {
      ring.insert(a);
      for (int b : adjacency[a]) ring.insert(b);
    }
    ring.erase(v);
    Patch& patch = patches_[v];
    patch.neighbors.assign(ring.begin(), ring.end());
    const int k = static_cast<int>(patch.neighbors.size());

    const auto tangent = frames.tangent(v);
    Eigen::MatrixXd local(k, 2);
    Eigen::VectorXd dist(k);
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd offset = (V.row(patch.neighbors[j]) - V.row(v)).transpose();
      local.row(j) = (tangent.transpose() * offset).transpose();
      dist[j] = offset.norm();
    }
    patch.radius = dist.mean();
    const double rho = patch.radius;

    Eigen::MatrixXd design(k, 5);
    Eigen::VectorXd sqrt_weight(k);
    for (int j = 0; j < k; ++j) {
      const double s = local(j, 0) / rho;
      const double t = local(j, 1) / rho;
      design.row(j) << s, t, 0.5 * s * s, s * t, 0.5 * t * t;
      sqrt_weight[j] = std::sqrt(rho / dist[j]);
    }
    const Eigen::MatrixXd weighted = sqrt_weight.asDiagonal() * design;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = 1e-10 * sigma[0];
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma[i] > cutoff) inv[i] = 1.0 / sigma[i];
    }
    patch.valid = k >= 6 && sigma.size() == 5 && sigma[4] > 1e-6 * sigma[0];

    Eigen::Matrix<double, 5, Eigen::Dynamic> solve =
        svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * sqrt_weight.asDiagonal();
    solve.topRows<2>() /= rho;
    solve.bottomRows<3>() /= rho * rho;
    patch.solve = std::move(solve);
  }
}

LocalQuadraticFits::Coefficients LocalQuadraticFits::fit(
    int v, const Eigen::Ref<const Eigen::VectorXd>& values) const {
  const Patch& patch = patches_[v];
  Eigen::VectorXd rhs(patch.neighbors.size());
  for (std::size_t j = 0; j < patch.neighbors.size(); ++j) rhs[j] = values[patch.neighbors[j]] - values[v];
  return patch.solve * rhs;
}

LocalQuadraticFits::Coefficients LocalQuadraticFits::fit_height(
    int v, const Eigen::MatrixXd& vertices, const Eigen::Ref<const Eigen::VectorXd>& direction) const {
  const Patch& patch = patches_[v];
  Eigen::VectorXd rhs(patch.neighbors.size());
  for (std::size_t j = 0; j < patch.neighbors.size(); ++j) {
    rhs[j] = (vertices.row(patch.neighbors[j]) - vertices.row(v)).dot(direction.transpose());
  }
  return patch.solve * rhs;
}

double ShapeData::second_fundamental_norm(int v) const {
  double sq = 0.0;
  for (const auto& m : second_fundamental[v]) sq += m.squaredNorm();
  return std::sqrt(sq);
}

Eigen::Matrix2d ShapeData::second_fundamental_along(int v, const Eigen::Ref<const Eigen::VectorXd>& y) const {
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  for (int a = 0; a < codim(); ++a) out += y[a] * second_fundamental[v][a];
  return out;
}

Eigen::SparseMatrix<double> cotan_stiffness(const Mesh& mesh, const Eigen::VectorXd& face_weight) {
  const auto& F = mesh.triangles();
  const auto& area = mesh.face_areas();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int corner = F(f, k);
      const int i = F(f, (k + 1) % 3);
      const int j = F(f, (k + 2) % 3);
      const Eigen::VectorXd ei = mesh.position(i) - mesh.position(corner);
      const Eigen::VectorXd ej = mesh.position(j) - mesh.position(corner);
      const double half_cot = 0.5 * face_weight[f] * ei.dot(ej) / (2.0 * area[f]);
      triplets.emplace_back(i, j, -half_cot);
      triplets.emplace_back(j, i, -half_cot);
      triplets.emplace_back(i, i, half_cot);
      triplets.emplace_back(j, j, half_cot);
    }
  }
  Eigen::SparseMatrix<double> K(mesh.num_vertices(), mesh.num_vertices());
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

TangentVectorField face_gradient(const Mesh& mesh, const ScalarField& field) {
  if (field.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "field size does not match vertex count");
  }
  const auto& F = mesh.triangles();
  TangentVectorField grad(mesh.num_faces(), mesh.ambient_dim());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Eigen::VectorXd p0 = mesh.position(F(f, 0));
    Eigen::MatrixXd E(mesh.ambient_dim(), 2);
    E << mesh.position(F(f, 1)) - p0, mesh.position(F(f, 2)) - p0;
    const Eigen::Matrix2d gram = E.transpose() * E;
    const Eigen::Vector2d du(field[F(f, 1)] - field[F(f, 0)], field[F(f, 2)] - field[F(f, 0)]);
    grad.row(f) = (E * gram.inverse() * du).transpose();
  }
  return grad;
}

AmbientVectorField vertex_gradient(const Mesh& mesh, const VertexFrames& frames, const ScalarField& field) {
  const TangentVectorField per_face = face_gradient(mesh, field);
  const auto& area = mesh.face_areas();
  AmbientVectorField grad(mesh.num_vertices(), mesh.ambient_dim());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(mesh.ambient_dim());
    double weight = 0.0;
    for (int f : mesh.vertex_faces()[v]) {
      sum += area[f] * per_face.row(f).transpose();
      weight += area[f];
    }
    const auto tangent = frames.tangent(v);
    grad.row(v) = (tangent * (tangent.transpose() * (sum / weight))).transpose();
  }
  return grad;
}

SymTensorField vertex_hessian(const LocalQuadraticFits& fits, const ScalarField& field) {
  SymTensorField out;
  const int nv = static_cast<int>(field.size());
  out.values.resize(nv);
  out.valid.resize(nv);
  for (int v = 0; v < nv; ++v) {
    out.values[v] = LocalQuadraticFits::hessian(fits.fit(v, field));
    out.valid[v] = fits.valid(v) ? 1 : 0;
  }
  return out;
}

SymTensorField vertex_hessian(const Mesh& mesh, const ScalarField& field) {
  if (field.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "field size does not match vertex count");
  }
  const VertexFrames frames = vertex_frames(mesh);
  return vertex_hessian(LocalQuadraticFits(mesh, frames), field);
}

Eigen::VectorXd dual_cell_mass(const Mesh& mesh) {
  const auto& F = mesh.triangles();
  const auto& area = mesh.face_areas();
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    Eigen::Vector3d cot;
    Eigen::Vector3d sq;  // squared length of the edge opposite corner k
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd e1 = mesh.position(F(f, (k + 1) % 3)) - mesh.position(F(f, k));
      const Eigen::VectorXd e2 = mesh.position(F(f, (k + 2) % 3)) - mesh.position(F(f, k));
      cot[k] = e1.dot(e2) / (2.0 * area[f]);
      sq[k] = (e2 - e1).squaredNorm();
    }
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3;
      const int j = (k + 2) % 3;
      mass[F(f, k)] += (sq[j] * cot[j] + sq[i] * cot[i]) / 8.0;
    }
  }
  const Eigen::VectorXd& lumped = mesh.lumped_mass();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mass[v] < 0.5 * lumped[v]) mass[v] = lumped[v];
  }
  return mass;
}

AmbientVectorField mean_curvature_vector(const Mesh& mesh) {
  const Eigen::SparseMatrix<double> K = cotan_stiffness(mesh, Eigen::VectorXd::Ones(mesh.num_faces()));
  AmbientVectorField H = -(K * mesh.vertices());
  H.array().colwise() /= dual_cell_mass(mesh).array();
  return H;
}

std::vector<int> interior_extension(const Mesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<int> source(nv);
  for (int v = 0; v < nv; ++v) source[v] = v;
  const auto& adjacency = mesh.vertex_neighbors();

  for (int b = 0; b < nv; ++b) {
    if (!mesh.is_boundary_vertex(b)) continue;
    std::set<int> visited{b};
    std::vector<int> frontier{b};
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int v : frontier) {
        for (int w : adjacency[v]) {
          if (visited.insert(w).second) next.push_back(w);
        }
      }
      std::sort(next.begin(), next.end());
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (int w : next) {
        if (mesh.is_boundary_vertex(w)) continue;
        const double dist = (mesh.vertices().row(w) - mesh.vertices().row(b)).norm();
        if (dist < best_dist * (1.0 - 1e-9)) {
          best = w;
          best_dist = dist;
        }
      }
      if (best >= 0) {
        source[b] = best;
        break;
      }
      frontier = std::move(next);
    }
  }
  return source;
}

AmbientVectorField conormal(const Mesh& mesh, const VertexFrames& frames) {
  AmbientVectorField eta = AmbientVectorField::Zero(mesh.num_vertices(), mesh.ambient_dim());
  const auto& F = mesh.triangles();
  for (const BoundaryLoop& loop : mesh.boundary_loops()) {
    const int n = static_cast<int>(loop.vertices.size());
    for (int k = 0; k < n; ++k) {
      const int v = loop.vertices[k];
      const int prev = loop.vertices[(k + n - 1) % n];
      const int next = loop.vertices[(k + 1) % n];
      const auto tangent = frames.tangent(v);
      const Eigen::Vector2d tau = tangent.transpose() * (mesh.position(next) - mesh.position(prev));
      Eigen::VectorXd out = tangent * Eigen::Vector2d(tau[1], -tau[0]).normalized();

      Eigen::VectorXd inward = Eigen::VectorXd::Zero(mesh.ambient_dim());
      for (int f : mesh.vertex_faces()[v]) {
        inward += (mesh.position(F(f, 0)) + mesh.position(F(f, 1)) + mesh.position(F(f, 2))) / 3.0 -
                  mesh.position(v);
      }
      if (out.dot(inward) > 0.0) out = -out;
      eta.row(v) = out.transpose();
    }
  }
  return eta;
}

ShapeData second_fundamental_form(const Mesh& mesh) {
  ShapeData shape;
  shape.frames = vertex_frames(mesh);
  shape.fits = LocalQuadraticFits(mesh, shape.frames);
  shape.extension_source = interior_extension(mesh);

  const int m = shape.frames.codim();
  shape.second_fundamental.resize(mesh.num_vertices());
  shape.pointwise_ok.resize(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    auto& components = shape.second_fundamental[v];
    components.resize(m);
    for (int a = 0; a < m; ++a) {
      const Eigen::VectorXd nu = shape.frames.normal(v).col(a);
      components[a] = LocalQuadraticFits::hessian(shape.fits.fit_height(v, mesh.vertices(), nu));
    }
    shape.pointwise_ok[v] = (!mesh.is_boundary_vertex(v) && shape.fits.valid(v)) ? 1 : 0;
  }

  // The cotangent Laplacian is not pointwise consistent at irregular fans
  // (its error there does not shrink under refinement). Where it disagrees
  // with the trace of the fitted II by more than the fit's own O(h) error
  // scale, the fit trace is used instead.
  AmbientVectorField H = mean_curvature_vector(mesh);
  shape.curvature_from_fit.assign(mesh.num_vertices(), 0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!shape.pointwise_ok[v]) continue;
    Eigen::VectorXd traced = Eigen::VectorXd::Zero(mesh.ambient_dim());
    for (int a = 0; a < m; ++a) traced += shape.second_fundamental[v][a].trace() * shape.frames.normal(v).col(a);
    const double scale = 0.25 * shape.fits.stencil_radius(v) * (1.0 + shape.second_fundamental_norm(v));
    if ((H.row(v).transpose() - traced).norm() > scale) {
      H.row(v) = traced.transpose();
      shape.curvature_from_fit[v] = 1;
    }
  }
  shape.mean_curvature.resize(H.rows(), H.cols());
  for (int v = 0; v < mesh.num_vertices(); ++v) shape.mean_curvature.row(v) = H.row(shape.extension_source[v]);
  shape.conormal = conormal(mesh, shape.frames);
  return shape;
}

}  // namespace abp
