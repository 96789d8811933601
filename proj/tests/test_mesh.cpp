#include "abplab/mesh.hpp"
#include "abplab/mesh_io.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace abp;
using std::numbers::pi;

namespace {

Mesh single_triangle() {
  Points V(3, 3);
  V << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  Triangles F(1, 3);
  F << 0, 1, 2;
  return build_mesh(3, V, F);
}

int euler_characteristic(const Mesh& m) { return m.num_vertices() - m.num_edges() + m.num_faces(); }

}  // namespace

TEST_CASE("single triangle has one boundary loop of three edges") {
  const Mesh m = single_triangle();
  CHECK(m.boundary_edges().size() == 3);
  REQUIRE(m.boundary_loops().size() == 1);
  CHECK(m.boundary_loops()[0].vertices.size() == 3);
  CHECK(m.boundary_loops()[0].length == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK(m.total_area() == doctest::Approx(0.5));
}

TEST_CASE("opposite winding is repaired") {
  Points V(4, 3);
  V << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  Triangles F(2, 3);
  F << 0, 1, 2, 0, 2, 3;
  F.row(1) << 0, 3, 2;  // flipped
  const Mesh m = build_mesh(3, V, F);
  CHECK(m.orientation_repaired());
  CHECK(m.boundary_edges().size() == 4);
  REQUIRE(m.boundary_loops().size() == 1);
  // Every interior edge is traversed once in each direction.
  const auto& T = m.triangles();
  int agree = 0;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      if (T(0, k) == T(1, (l + 1) % 3) && T(0, (k + 1) % 3) == T(1, l)) ++agree;
    }
  }
  CHECK(agree == 1);
}

TEST_CASE("an edge in three triangles is rejected") {
  Points V(5, 3);
  V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1;
  Triangles F(3, 3);
  F << 0, 1, 2, 1, 0, 3, 0, 1, 4;
  try {
    build_mesh(3, V, F);
    FAIL("expected NonManifoldEdge");
  } catch (const MeshError& e) {
    CHECK(e.kind() == MeshError::Kind::NonManifoldEdge);
  }
}

TEST_CASE("degenerate triangles and bad indices are rejected") {
  Points V(4, 3);
  V << 0, 0, 0, 1, 0, 0, 2, 0, 0, 0, 1, 0;
  Triangles F(2, 3);
  F << 0, 1, 3, 0, 1, 2;
  CHECK_THROWS_AS(build_mesh(3, V, F), MeshError);
  F << 0, 1, 3, 1, 2, 7;
  CHECK_THROWS_AS(build_mesh(3, V, F), MeshError);
  CHECK_THROWS_AS(build_mesh(5, Points::Zero(3, 5), Triangles(0, 3)), MeshError);
}

TEST_CASE("boundary loops of disk, sphere and catenoid band") {
  const auto disk = testing::surface("flat_disk", 2);
  REQUIRE(disk.mesh.boundary_loops().size() == 1);
  // inscribed polygon with one edge per loop vertex
  const double sides = static_cast<double>(disk.mesh.boundary_loops()[0].vertices.size());
  CHECK(disk.mesh.boundary_loops()[0].length == doctest::Approx(2 * sides * std::sin(pi / sides)).epsilon(1e-12));
  CHECK(boundary_extract(testing::surface("sphere", 1).mesh).empty());
  CHECK(testing::surface("catenoid", 1).mesh.boundary_loops().size() == 2);
}

TEST_CASE("boundary loops keep the surface on their left") {
  const Mesh& m = testing::surface("flat_disk", 1).mesh;
  const auto& loop = m.boundary_loops()[0].vertices;
  double signed_area = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto a = m.position(loop[i]);
    const auto b = m.position(loop[(i + 1) % loop.size()]);
    signed_area += 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }
  // Faces of the disk are counter-clockwise iff the loop is.
  const auto& T = m.triangles();
  const Eigen::VectorXd e1 = m.position(T(0, 1)) - m.position(T(0, 0));
  const Eigen::VectorXd e2 = m.position(T(0, 2)) - m.position(T(0, 0));
  CHECK((signed_area > 0) == (e1[0] * e2[1] - e1[1] * e2[0] > 0));
}

TEST_CASE("lumped integrals on the disk") {
  const Mesh& m = testing::surface("flat_disk", 3).mesh;
  const ScalarField ones = ScalarField::Ones(m.num_vertices());
  const double h = relative_mesh_size(m);
  CHECK(std::abs(integrate(m, ones) - pi) / pi < h * h);
  CHECK(std::abs(boundary_integrate(m, ones) - 2 * pi) / (2 * pi) < h * h);
  CHECK(std::abs(integrate(m, m.vertices().col(0))) < 1e-12);
  CHECK(integrate(m, 3.0 * ones) == doctest::Approx(3.0 * integrate(m, ones)).epsilon(1e-13));
  CHECK_THROWS_AS(integrate(m, ScalarField::Ones(3)), MeshError);
}

TEST_CASE("catenoid area against a one-dimensional quadrature oracle") {
  // 2 pi int_{-1}^{1} cosh(z) sqrt(1 + sinh(z)^2) dz
  const double oracle = 2 * pi * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                     [](double z) { return std::cosh(z) * std::cosh(z); }, -1.0, 1.0);
  CHECK(oracle == doctest::Approx(17.6773).epsilon(1e-5));
  const Mesh& m = testing::surface("catenoid", 3).mesh;
  CHECK(std::abs(m.total_area() - oracle) / oracle < 1e-3);
}

TEST_CASE("refinement counts, Euler characteristic and closedness") {
  for (const char* name : {"flat_disk", "sphere", "catenoid"}) {
    const Mesh m = testing::surface(name, 0).mesh;
    const Mesh r = refine(m);
    CHECK(r.num_faces() == 4 * m.num_faces());
    CHECK(r.num_vertices() == m.num_vertices() + m.num_edges());
    CHECK(euler_characteristic(r) == euler_characteristic(m));
    CHECK(r.boundary_loops().size() == m.boundary_loops().size());
  }
}

TEST_CASE("reprojected refinement converges at second order on the boundary") {
  const auto base = abp::generate({"flat_disk", {}});
  double previous = 0.0;
  for (int level = 0; level <= 3; ++level) {
    const double err = std::abs(refined(base, level).mesh.boundary_loops()[0].length - 2 * pi);
    if (level > 0) CHECK(previous / err == doctest::Approx(4.0).epsilon(0.05));
    previous = err;
  }
}

TEST_CASE("integrals are invariant under rigid motions and additive over unions") {
  const Mesh m = testing::surface("catenoid", 1).mesh;
  const Mesh moved = rigid_transform(m, testing::some_rotation(), Eigen::Vector3d(1, -2, 0.5));
  const ScalarField f = (1.0 + 0.1 * m.vertices().col(2).array()).matrix();
  CHECK(integrate(moved, f) == doctest::Approx(integrate(m, f)).epsilon(1e-12));
  CHECK(boundary_integrate(moved, f) == doctest::Approx(boundary_integrate(m, f)).epsilon(1e-12));

  const Mesh both = disjoint_union(m, moved);
  ScalarField ff(both.num_vertices());
  ff << f, f;
  CHECK(both.num_components() == 2);
  CHECK(integrate(both, ff) == doctest::Approx(2 * integrate(m, f)).epsilon(1e-12));
  const auto parts = split_components(both);
  REQUIRE(parts.size() == 2);
  CHECK(parts[1].mesh.num_vertices() == m.num_vertices());
}

TEST_CASE("OFF and JSON round trips") {
  const Mesh m = testing::surface("enneper", 0).mesh;
  std::stringstream off;
  write_off(off, m);
  const Mesh a = read_off(off);
  CHECK(a.num_faces() == m.num_faces());
  CHECK((a.vertices() - m.vertices()).norm() < 1e-12);

  const Mesh h = testing::surface("holomorphic", 0).mesh;
  std::stringstream js;
  write_json_mesh(js, h);
  const Mesh b = read_json_mesh(js);
  CHECK(b.ambient_dim() == 4);
  CHECK((b.vertices() - h.vertices()).norm() < 1e-12);

  std::stringstream bad("OFF\n3 1 0\n0 0 0\n1 0 0\n");
  CHECK_THROWS_AS(read_off(bad), MeshError);
}

TEST_CASE("padding to R^4 keeps areas") {
  const Mesh m = testing::surface("catenoid", 1).mesh;
  const Mesh p = pad_ambient(m, 4);
  CHECK(p.ambient_dim() == 4);
  CHECK(p.total_area() == doctest::Approx(m.total_area()).epsilon(1e-14));
  CHECK_THROWS_AS(pad_ambient(p, 3), MeshError);
}
