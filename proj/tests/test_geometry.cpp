#include "abplab/geometry.hpp"
#include "abplab/shape.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace abp;
using boost::math::quadrature::gauss_kronrod;
using std::numbers::pi;

TEST_CASE("flat disk references") {
  const auto d = gen_flat_disk(1.0, 4, 4);
  CHECK(d.mesh.ambient_dim() == 4);
  CHECK(d.reference.exact_area == doctest::Approx(pi));
  CHECK(d.reference.exact_boundary_length == doctest::Approx(2 * pi));
  const auto d2 = gen_flat_disk(2.0, 4, 3);
  CHECK(d2.reference.exact_area == doctest::Approx(4 * pi));
  CHECK(d2.reference.exact_boundary_length == doctest::Approx(4 * pi));
  CHECK(d2.reference.second_fundamental_norm_sq(Eigen::Vector3d(0.3, 0.2, 0)) == 0.0);
  CHECK(d2.reference.is_minimal);
}

TEST_CASE("catenoid references match quadrature") {
  const auto c = gen_catenoid(1.0, 1.0, 4);
  const double area = 2 * pi * gauss_kronrod<double, 61>::integrate([](double z) { return std::pow(std::cosh(z), 2); },
                                                                    -1.0, 1.0);
  CHECK(c.reference.exact_area == doctest::Approx(area).epsilon(1e-12));
  CHECK(c.reference.exact_area == doctest::Approx(17.6773).epsilon(1e-5));
  CHECK(c.reference.exact_boundary_length == doctest::Approx(4 * pi * std::cosh(1.0)).epsilon(1e-12));
  // |II|^2 = 2 / (a^2 cosh^4(z/a))
  CHECK(c.reference.second_fundamental_norm_sq(Eigen::Vector3d(1, 0, 0)) == doctest::Approx(2.0));
  for (int v = 0; v < c.mesh.num_vertices(); ++v) {
    const auto x = c.mesh.position(v);
    CHECK(std::hypot(x[0], x[1]) == doctest::Approx(std::cosh(x[2])).epsilon(1e-12));
  }
}

TEST_CASE("Enneper area against a two-dimensional quadrature oracle") {
  const double r = 0.5;
  // Area element |x_u x x_v| computed from the parametrization by finite
  // differences, so the oracle does not rely on the conformal factor.
  auto point = [](double u, double v) {
    return Eigen::Vector3d(u - u * u * u / 3 + u * v * v, -v - u * u * v + v * v * v / 3, u * u - v * v);
  };
  auto element = [&](double rho, double theta) {
    const double u = rho * std::cos(theta), v = rho * std::sin(theta), e = 1e-6;
    const Eigen::Vector3d xu = (point(u + e, v) - point(u - e, v)) / (2 * e);
    const Eigen::Vector3d xv = (point(u, v + e) - point(u, v - e)) / (2 * e);
    return xu.cross(xv).norm() * rho;
  };
  const double oracle = gauss_kronrod<double, 31>::integrate(
      [&](double rho) {
        return gauss_kronrod<double, 31>::integrate([&](double t) { return element(rho, t); }, 0.0, 2 * pi);
      },
      0.0, r);
  const auto e = refined(gen_enneper(r, 4), 3);
  CHECK(e.reference.exact_area == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(std::abs(e.mesh.total_area() - oracle) / oracle < 0.01);
  CHECK_THROWS_AS(gen_enneper(1.5, 4), std::invalid_argument);
}

TEST_CASE("holomorphic graph references") {
  const auto g = gen_holomorphic_graph(2, 1.0, 4);
  CHECK(g.reference.exact_area == doctest::Approx(3 * pi).epsilon(1e-12));
  CHECK(g.reference.exact_boundary_length == doctest::Approx(2 * pi * std::sqrt(5.0)).epsilon(1e-12));
  CHECK(g.reference.second_fundamental_norm_sq(Eigen::Vector4d::Zero()) == doctest::Approx(16.0));
  for (int v = 0; v < g.mesh.num_vertices(); ++v) {
    const auto x = g.mesh.position(v);
    const std::complex<double> w = std::pow(std::complex<double>(x[0], x[1]), 2);
    CHECK(std::abs(w.real() - x[2]) < 1e-12);
    CHECK(std::abs(w.imag() - x[3]) < 1e-12);
  }
  const auto flat = refined(gen_holomorphic_graph(1, 1.0, 4), 1);
  const ShapeData shape = second_fundamental_form(flat.mesh);
  for (int v = 0; v < flat.mesh.num_vertices(); ++v) {
    if (shape.pointwise_ok[v]) CHECK(shape.second_fundamental_norm(v) < 1e-9);
  }
}

TEST_CASE("sphere references") {
  const auto s = gen_sphere(1.0, 2, 3);
  CHECK(s.reference.mean_curvature_norm(Eigen::Vector3d(1, 0, 0)) == doctest::Approx(2.0));
  CHECK(s.reference.exact_area == doctest::Approx(4 * pi));
  CHECK(s.reference.exact_boundary_length == 0.0);
  CHECK(!s.mesh.has_boundary());
  CHECK(gen_sphere(2.0, 1, 3).reference.mean_curvature_norm(Eigen::Vector3d(2, 0, 0)) == doctest::Approx(1.0));
  CHECK(!s.reference.is_minimal);
  for (int v = 0; v < s.mesh.num_vertices(); ++v) CHECK(s.mesh.position(v).norm() == doctest::Approx(1.0));
}

TEST_CASE("refined vertices stay on the analytic surfaces") {
  const auto c = testing::surface("catenoid", 2);
  for (int v = 0; v < c.mesh.num_vertices(); ++v) {
    const auto x = c.mesh.position(v);
    CHECK(std::hypot(x[0], x[1]) == doctest::Approx(std::cosh(x[2])).epsilon(1e-12));
  }
  const auto s = testing::surface("sphere", 2);
  for (int v = 0; v < s.mesh.num_vertices(); ++v) CHECK(s.mesh.position(v).norm() == doctest::Approx(1.0));
  const auto d = testing::surface("flat_disk", 2);
  for (const int v : d.mesh.boundary_loops()[0].vertices) CHECK(d.mesh.position(v).norm() == doctest::Approx(1.0));
}

TEST_CASE("area and boundary converge at second order for every generator") {
  for (const char* name : {"flat_disk", "catenoid", "enneper", "holomorphic", "sphere"}) {
    CAPTURE(name);
    const auto base = generate({name, {}});
    const auto coarse = refined(base, 2);
    const auto fine = refined(base, 3);
    const double e0 = std::abs(coarse.mesh.total_area() - base.reference.exact_area);
    const double e1 = std::abs(fine.mesh.total_area() - base.reference.exact_area);
    CHECK(e0 / e1 > 3.5);
  }
}

TEST_CASE("generator parameters are validated") {
  CHECK_THROWS_AS(generate({"torus", {}}), std::invalid_argument);
  CHECK_THROWS_AS(generate({"flat_disk", {{"radius", -1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(generate({"flat_disk", {{"res", 2.5}}}), std::invalid_argument);
  CHECK_THROWS_AS(generate({"catenoid", {{"a", 0.0}}}), std::invalid_argument);
  CHECK_NOTHROW(generate({"holomorphic_graph", {}}));
}
