#include "abplab/shape.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace abp;

namespace {

// Largest deviation over vertices with a usable interior fit.
template <typename F>
double max_over_fit_vertices(const Mesh& m, const ShapeData& s, F&& f) {
  double worst = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (s.pointwise_ok[v]) worst = std::max(worst, f(v));
  }
  return worst;
}

}  // namespace

TEST_CASE("face gradients") {
  const Mesh& m = testing::surface("flat_disk", 2).mesh;
  const double h = relative_mesh_size(m);
  const TangentVectorField g = face_gradient(m, m.vertices().col(0));
  for (int f = 0; f < m.num_faces(); ++f) {
    CHECK((g.row(f) - Eigen::RowVector4d(1, 0, 0, 0)).norm() < 1e-12);
  }
  CHECK(face_gradient(m, ScalarField::Constant(m.num_vertices(), 3.0)).norm() < 1e-12);

  const ScalarField q = 0.5 * m.vertices().rowwise().squaredNorm();
  const TangentVectorField gq = face_gradient(m, q);
  double worst = 0.0;
  for (int f = 0; f < m.num_faces(); ++f) {
    Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(4);
    for (int k = 0; k < 3; ++k) centroid += m.vertices().row(m.triangles()(f, k)) / 3.0;
    worst = std::max(worst, (gq.row(f) - centroid).norm());
  }
  CHECK(worst < h);
}

TEST_CASE("vertex Hessians of quadratics on the flat disk") {
  const Mesh& m = testing::surface("flat_disk", 2).mesh;
  const double h = relative_mesh_size(m);
  const VertexFrames frames = vertex_frames(m);
  const auto& X = m.vertices();

  const SymTensorField round = vertex_hessian(m, 0.5 * X.rowwise().squaredNorm());
  const SymTensorField saddle = vertex_hessian(m, (X.col(0).array().square() - X.col(1).array().square()).matrix());
  const SymTensorField linear = vertex_hessian(m, (2.0 * X.col(0) - X.col(1)).eval());
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!round.valid[v]) continue;
    CHECK((round.values[v] - Eigen::Matrix2d::Identity()).norm() < h);
    // diag(2, -2) expressed in the vertex tangent basis
    const Eigen::Matrix<double, 2, 2> T = frames.tangent(v).topRows<2>();
    const Eigen::Matrix2d expected = T.transpose() * Eigen::Vector2d(2, -2).asDiagonal() * T;
    CHECK((saddle.values[v] - expected).norm() < h);
    CHECK(linear.values[v].norm() < h);
  }
}

TEST_CASE("frames are orthonormal") {
  for (const char* name : {"catenoid", "holomorphic", "sphere"}) {
    const Mesh& m = testing::surface(name, 1).mesh;
    const VertexFrames frames = vertex_frames(m);
    for (int v = 0; v < m.num_vertices(); ++v) {
      const Eigen::MatrixXd& E = frames.frame[v];
      CHECK((E.transpose() * E - Eigen::MatrixXd::Identity(E.cols(), E.cols())).norm() < 1e-10);
    }
  }
}

TEST_CASE("mean curvature of flat, round and minimal surfaces") {
  {
    const Mesh& m = testing::surface("flat_disk", 2).mesh;
    const ShapeData s = second_fundamental_form(m);
    CHECK(max_over_fit_vertices(m, s, [&](int v) { return s.mean_curvature.row(v).norm(); }) < 1e-9);
  }
  {
    const Mesh& m = testing::surface("sphere", 3).mesh;
    const double h = relative_mesh_size(m);
    const ShapeData s = second_fundamental_form(m);
    // H = -2x: inward with length 2
    for (int v = 0; v < m.num_vertices(); ++v) {
      CHECK((s.mean_curvature.row(v) + 2.0 * m.vertices().row(v)).norm() < 2 * h * h);
    }
  }
  double previous = 1e300;
  for (int level = 1; level <= 3; ++level) {
    const Mesh& m = testing::surface("catenoid", level).mesh;
    const ShapeData s = second_fundamental_form(m);
    const double worst = max_over_fit_vertices(m, s, [&](int v) { return s.mean_curvature.row(v).norm(); });
    CHECK(worst < previous / 2);
    previous = worst;
  }
}

TEST_CASE("second fundamental form sign and size") {
  const Mesh& m = testing::surface("sphere", 3).mesh;
  const double h = relative_mesh_size(m);
  const ShapeData s = second_fundamental_form(m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const Eigen::VectorXd nu = s.frames.normal(v).col(0);
    const double outward = nu.dot(m.position(v)) > 0 ? 1.0 : -1.0;
    CHECK((outward * s.second_fundamental[v][0] + Eigen::Matrix2d::Identity()).norm() < h);
    CHECK(std::pow(s.second_fundamental_norm(v), 2) == doctest::Approx(2.0).epsilon(2 * h));
  }

  const Mesh& g = testing::surface("holomorphic", 3).mesh;
  const ShapeData sg = second_fundamental_form(g);
  REQUIRE(sg.pointwise_ok[0]);  // ring-disk center
  CHECK(std::pow(sg.second_fundamental_norm(0), 2) == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("trace of II matches H and Hessians of linear functions give II") {
  for (const char* name : {"catenoid", "enneper", "holomorphic", "sphere"}) {
    CAPTURE(name);
    const Mesh m = testing::surface(name, 3).mesh;
    const double h = relative_mesh_size(m);
    const ShapeData s = second_fundamental_form(m);
    const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(m.ambient_dim(), 0.3, -0.7);
    const SymTensorField hc = vertex_hessian(s.fits, m.vertices() * c);
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (!s.pointwise_ok[v]) continue;
      const double scale = 1.0 + s.second_fundamental_norm(v);
      Eigen::Matrix2d along = Eigen::Matrix2d::Zero();
      for (int a = 0; a < s.codim(); ++a) {
        const Eigen::VectorXd nu = s.frames.normal(v).col(a);
        CHECK(std::abs(s.second_fundamental[v][a].trace() - s.mean_curvature.row(v).dot(nu)) < 2 * h * scale);
        along += c.dot(nu) * s.second_fundamental[v][a];
      }
      // D^2 <x, c> = <II, c^perp>
      CHECK((hc.values[v] - along).norm() < 1e-8 * scale);
    }
  }
}

TEST_CASE("conormals") {
  const Mesh& d = testing::surface("flat_disk", 2).mesh;
  const double h = relative_mesh_size(d);
  const ShapeData sd = second_fundamental_form(d);
  for (int v : d.boundary_loops()[0].vertices) {
    const Eigen::VectorXd x = d.position(v);
    CHECK((sd.conormal.row(v).transpose() - x / x.norm()).norm() < h);
  }
  const Mesh& c = testing::surface("catenoid", 2).mesh;
  const ShapeData sc = second_fundamental_form(c);
  for (int v = 0; v < c.num_vertices(); ++v) {
    if (!c.is_boundary_vertex(v)) continue;
    CHECK(sc.conormal.row(v).norm() == doctest::Approx(1.0));
    const double z = c.vertices()(v, 2);
    CHECK(sc.conormal(v, 2) * z > 0.0);  // outward along the surface
  }
  const Mesh& s = testing::surface("sphere", 1).mesh;
  CHECK(second_fundamental_form(s).conormal.norm() == 0.0);
}

TEST_CASE("curvature scalars are invariant under rotation") {
  const Mesh m = testing::surface("catenoid", 2).mesh;
  const Eigen::Matrix3d R = testing::some_rotation();
  const Mesh r = rigid_transform(m, R, Eigen::Vector3d(0.5, 1, -1));
  const ShapeData a = second_fundamental_form(m);
  const ShapeData b = second_fundamental_form(r);
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK((a.mean_curvature.row(v) * R.transpose() - b.mean_curvature.row(v)).norm() < 1e-10);
    CHECK(std::abs(a.second_fundamental_norm(v) - b.second_fundamental_norm(v)) < 1e-10);
    CHECK((a.conormal.row(v) * R.transpose() - b.conormal.row(v)).norm() < 1e-10);
  }
}

TEST_CASE("boundary values are extended from interior vertices") {
  const Mesh& m = testing::surface("catenoid", 1).mesh;
  const ShapeData s = second_fundamental_form(m);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const int src = s.extension_source[v];
    CHECK(!m.is_boundary_vertex(src));
    CHECK((s.mean_curvature.row(v) - s.mean_curvature.row(src)).norm() == 0.0);
    if (m.is_boundary_vertex(v)) CHECK(!s.pointwise_ok[v]);
  }
}
