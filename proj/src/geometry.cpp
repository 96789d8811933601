#include "abplab/geometry.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace abp {

namespace {

constexpr double kPi = std::numbers::pi;

struct PlanarMesh {
  std::vector<Eigen::Vector2d> points;
  Triangles triangles;
};

// Unit disk: center vertex plus `rings` concentric rings with 6k vertices on ring k.
PlanarMesh ring_disk(int rings) {
  PlanarMesh out;
  out.points.emplace_back(0.0, 0.0);
  std::vector<std::vector<int>> ring_index(rings + 1);
  ring_index[0] = {0};
  for (int k = 1; k <= rings; ++k) {
    const int count = 6 * k;
    const double radius = static_cast<double>(k) / rings;
    for (int j = 0; j < count; ++j) {
      const double angle = 2.0 * kPi * j / count;
      ring_index[k].push_back(static_cast<int>(out.points.size()));
      out.points.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
  }

  std::vector<std::array<int, 3>> tris;
  for (int k = 1; k <= rings; ++k) {
    const auto& inner = ring_index[k - 1];
    const auto& outer = ring_index[k];
    const int n_in = static_cast<int>(inner.size());
    const int n_out = static_cast<int>(outer.size());
    if (n_in == 1) {
      for (int o = 0; o < n_out; ++o) tris.push_back({inner[0], outer[o], outer[(o + 1) % n_out]});
      continue;
    }
    int i = 0;
    int o = 0;
    while (i < n_in || o < n_out) {
      const double next_in = static_cast<double>(i + 1) / n_in;
      const double next_out = static_cast<double>(o + 1) / n_out;
      if (o < n_out && (i == n_in || next_out <= next_in)) {
        tris.push_back({inner[i % n_in], outer[o], outer[(o + 1) % n_out]});
        ++o;
      } else {
        tris.push_back({inner[i], outer[o % n_out], inner[(i + 1) % n_in]});
        ++i;
      }
    }
  }
  out.triangles.resize(static_cast<Eigen::Index>(tris.size()), 3);
  for (std::size_t f = 0; f < tris.size(); ++f) {
    out.triangles.row(f) << tris[f][0], tris[f][1], tris[f][2];
  }
  return out;
}

template <typename Map>
Mesh map_planar(const PlanarMesh& planar, int ambient_dim, Map&& map) {
  Points V(static_cast<Eigen::Index>(planar.points.size()), ambient_dim);
  for (std::size_t i = 0; i < planar.points.size(); ++i) V.row(i) = map(planar.points[i]).transpose();
  return Mesh(ambient_dim, std::move(V), planar.triangles);
}

template <typename F>
double integrate_1d(F&& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

Eigen::VectorXd enneper_point(double u, double v) {
  Eigen::VectorXd p(3);
  p << u - u * u * u / 3.0 + u * v * v, -v + v * v * v / 3.0 - u * u * v, u * u - v * v;
  return p;
}

// Inverts the first two Enneper coordinates by Newton iteration; the map
// (u, v) -> (x, y) is a local diffeomorphism for u^2 + v^2 < 1.
Eigen::Vector2d enneper_parameter(const Eigen::VectorXd& p) {
  Eigen::Vector2d w(p[0], -p[1]);
  for (int iter = 0; iter < 50; ++iter) {
    const double u = w[0], v = w[1];
    Eigen::Vector2d residual(u - u * u * u / 3.0 + u * v * v - p[0], -v + v * v * v / 3.0 - u * u * v - p[1]);
    if (residual.norm() < 1e-15) break;
    Eigen::Matrix2d J;
    J << 1.0 - u * u + v * v, 2.0 * u * v, -2.0 * u * v, -1.0 + v * v - u * u;
    w -= J.lu().solve(residual);
  }
  return w;
}

}  // namespace

GeneratedSurface gen_flat_disk(double radius, int resolution, int ambient_dim) {
  require(radius > 0.0, "flat_disk: radius must be positive");
  require(resolution >= 1, "flat_disk: resolution must be at least 1");
  require(ambient_dim == 3 || ambient_dim == 4, "flat_disk: ambient dimension must be 3 or 4");

  Mesh mesh = map_planar(ring_disk(resolution), ambient_dim, [&](const Eigen::Vector2d& q) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(ambient_dim);
    p.head<2>() = radius * q;
    return p;
  });

  AnalyticReference ref;
  ref.name = "flat_disk";
  ref.parameters = {{"radius", radius}, {"res", resolution}, {"ambient", ambient_dim}};
  ref.exact_area = kPi * radius * radius;
  ref.exact_boundary_length = 2.0 * kPi * radius;
  ref.mean_curvature_norm = [](const Eigen::VectorXd&) { return 0.0; };
  ref.second_fundamental_norm_sq = [](const Eigen::VectorXd&) { return 0.0; };
  ref.is_minimal = true;

  Reprojector reproject = [radius](const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool on_boundary) {
    Eigen::VectorXd p = 0.5 * (a + b);
    if (on_boundary) p.head<2>() *= radius / p.head<2>().norm();
    return p;
  };
  return {std::move(mesh), std::move(ref), std::move(reproject)};
}

GeneratedSurface gen_catenoid(double waist, double half_height, int resolution) {
  require(waist > 0.0 && half_height > 0.0, "catenoid: waist and half height must be positive");
  require(resolution >= 1, "catenoid: resolution must be at least 1");
  const double a = waist;
  const double h = half_height;
  const int rows = resolution;
  const int cols = 4 * resolution;

  Points V((rows + 1) * cols, 3);
  for (int j = 0; j <= rows; ++j) {
    const double z = -h + 2.0 * h * j / rows;
    const double r = a * std::cosh(z / a);
    for (int i = 0; i < cols; ++i) {
      const double theta = 2.0 * kPi * i / cols;
      V.row(j * cols + i) << r * std::cos(theta), r * std::sin(theta), z;
    }
  }
  Triangles F(2 * rows * cols, 3);
  int f = 0;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) {
      const int p00 = j * cols + i;
      const int p10 = j * cols + (i + 1) % cols;
      const int p11 = (j + 1) * cols + (i + 1) % cols;
      const int p01 = (j + 1) * cols + i;
      F.row(f++) << p00, p10, p11;
      F.row(f++) << p00, p11, p01;
    }
  }

  AnalyticReference ref;
  ref.name = "catenoid";
  ref.parameters = {{"a", a}, {"half_height", h}, {"res", resolution}};
  ref.exact_area = 2.0 * kPi * integrate_1d([a](double z) { return a * std::pow(std::cosh(z / a), 2); }, -h, h);
  ref.exact_boundary_length = 2.0 * 2.0 * kPi * a * std::cosh(h / a);
  ref.mean_curvature_norm = [](const Eigen::VectorXd&) { return 0.0; };
  ref.second_fundamental_norm_sq = [a](const Eigen::VectorXd& p) {
    return 2.0 / (a * a * std::pow(std::cosh(p[2] / a), 4));
  };
  ref.is_minimal = true;

  // Average the endpoint angles rather than taking the angle of the chord
  // midpoint, which is biased toward the wider endpoint on diagonal edges.
  Reprojector reproject = [a, h](const Eigen::VectorXd& p0, const Eigen::VectorXd& p1, bool on_boundary) {
    double z = 0.5 * (p0[2] + p1[2]);
    if (on_boundary) z = z < 0.0 ? -h : h;
    const Eigen::Vector2d dir = p0.head<2>().normalized() + p1.head<2>().normalized();
    const double theta = std::atan2(dir[1], dir[0]);
    const double r = a * std::cosh(z / a);
    Eigen::VectorXd p(3);
    p << r * std::cos(theta), r * std::sin(theta), z;
    return p;
  };
  return {Mesh(3, std::move(V), std::move(F)), std::move(ref), std::move(reproject)};
}

GeneratedSurface gen_enneper(double radius_param, int resolution) {
  require(radius_param > 0.0 && radius_param <= 1.0, "enneper: radius must lie in (0, 1]");
  require(resolution >= 1, "enneper: resolution must be at least 1");
  const double r = radius_param;

  Mesh mesh = map_planar(ring_disk(resolution), 3,
                         [r](const Eigen::Vector2d& q) { return enneper_point(r * q[0], r * q[1]); });

  AnalyticReference ref;
  ref.name = "enneper";
  ref.parameters = {{"radius", r}, {"res", resolution}};
  // Conformal factor (1 + |w|^2)^2 integrated over the parameter disk.
  ref.exact_area = 2.0 * kPi * integrate_1d([](double rho) { return std::pow(1.0 + rho * rho, 2) * rho; }, 0.0, r);
  ref.exact_boundary_length = 2.0 * kPi * r * (1.0 + r * r);
  ref.mean_curvature_norm = [](const Eigen::VectorXd&) { return 0.0; };
  ref.second_fundamental_norm_sq = [](const Eigen::VectorXd& p) {
    const double rho2 = enneper_parameter(p).squaredNorm();
    return 8.0 / std::pow(1.0 + rho2, 4);
  };
  ref.is_minimal = true;

  Reprojector reproject = [r](const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool on_boundary) {
    Eigen::Vector2d w = 0.5 * (enneper_parameter(a) + enneper_parameter(b));
    if (on_boundary) w *= r / w.norm();
    return enneper_point(w[0], w[1]);
  };
  return {std::move(mesh), std::move(ref), std::move(reproject)};
}

GeneratedSurface gen_holomorphic_graph(int degree, double radius, int resolution) {
  require(degree >= 1, "holomorphic: degree must be at least 1");
  require(radius > 0.0, "holomorphic: radius must be positive");
  require(resolution >= 1, "holomorphic: resolution must be at least 1");
  const int k = degree;
  const double r = radius;

  auto lift = [k](double x, double y) {
    const std::complex<double> w = std::pow(std::complex<double>(x, y), k);
    Eigen::VectorXd p(4);
    p << x, y, w.real(), w.imag();
    return p;
  };
  Mesh mesh = map_planar(ring_disk(resolution), 4,
                         [&](const Eigen::Vector2d& q) { return lift(r * q[0], r * q[1]); });

  AnalyticReference ref;
  ref.name = "holomorphic";
  ref.parameters = {{"k", k}, {"radius", r}, {"res", resolution}};
  ref.exact_area = 2.0 * kPi * integrate_1d(
      [k](double rho) { return (1.0 + k * k * std::pow(rho, 2 * k - 2)) * rho; }, 0.0, r);
  ref.exact_boundary_length = 2.0 * kPi * r * std::sqrt(1.0 + k * k * std::pow(r, 2 * k - 2));
  ref.mean_curvature_norm = [](const Eigen::VectorXd&) { return 0.0; };
  // |II|^2 = -2K with K = -2 |g''|^2 / (1 + |g'|^2)^3 for g(z) = z^k.
  ref.second_fundamental_norm_sq = [k](const Eigen::VectorXd& p) {
    if (k == 1) return 0.0;
    const double rho = std::hypot(p[0], p[1]);
    const double g1 = k * std::pow(rho, k - 1);
    const double g2 = k * (k - 1) * (k == 2 ? 1.0 : std::pow(rho, k - 2));
    return 4.0 * g2 * g2 / std::pow(1.0 + g1 * g1, 3);
  };
  ref.is_minimal = true;

  Reprojector reproject = [lift, r](const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool on_boundary) {
    Eigen::Vector2d q = 0.5 * (a.head<2>() + b.head<2>());
    if (on_boundary) q *= r / q.norm();
    return lift(q[0], q[1]);
  };
  return {std::move(mesh), std::move(ref), std::move(reproject)};
}

GeneratedSurface gen_sphere(double radius, int resolution, int ambient_dim) {
  require(radius > 0.0, "sphere: radius must be positive");
  require(resolution >= 0, "sphere: resolution must be non-negative");
  require(ambient_dim == 3 || ambient_dim == 4, "sphere: ambient dimension must be 3 or 4");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  Points V(12, 3);
  V << -1, phi, 0, 1, phi, 0, -1, -phi, 0, 1, -phi, 0,  //
      0, -1, phi, 0, 1, phi, 0, -1, -phi, 0, 1, -phi,   //
      phi, 0, -1, phi, 0, 1, -phi, 0, -1, -phi, 0, 1;
  V.rowwise().normalize();
  V *= radius;
  Triangles F(20, 3);
  F << 0, 11, 5, 0, 5, 1, 0, 1, 7, 0, 7, 10, 0, 10, 11,  //
      1, 5, 9, 5, 11, 4, 11, 10, 2, 10, 7, 6, 7, 1, 8,   //
      3, 9, 4, 3, 4, 2, 3, 2, 6, 3, 6, 8, 3, 8, 9,       //
      4, 9, 5, 2, 4, 11, 6, 2, 10, 8, 6, 7, 9, 8, 1;
  for (int f = 0; f < 20; ++f) {
    const Eigen::Vector3d a = V.row(F(f, 0)), b = V.row(F(f, 1)), c = V.row(F(f, 2));
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(F(f, 1), F(f, 2));
  }

  Reprojector reproject = [radius](const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool) {
    Eigen::VectorXd p = 0.5 * (a + b);
    p.head<3>() *= radius / p.head<3>().norm();
    return p;
  };
  Mesh mesh(3, std::move(V), std::move(F));
  for (int level = 0; level < resolution; ++level) mesh = refine(mesh, reproject);
  if (ambient_dim == 4) mesh = pad_ambient(mesh, 4);

  AnalyticReference ref;
  ref.name = "sphere";
  ref.parameters = {{"radius", radius}, {"res", resolution}, {"ambient", ambient_dim}};
  ref.exact_area = 4.0 * kPi * radius * radius;
  ref.exact_boundary_length = 0.0;
  ref.exact_mean_curvature_integral = 8.0 * kPi * radius;
  ref.mean_curvature_norm = [radius](const Eigen::VectorXd&) { return 2.0 / radius; };
  ref.second_fundamental_norm_sq = [radius](const Eigen::VectorXd&) { return 2.0 / (radius * radius); };
  ref.is_minimal = false;
  return {std::move(mesh), std::move(ref), std::move(reproject)};
}

GeneratedSurface refined(const GeneratedSurface& surface, int levels) {
  GeneratedSurface out = surface;
  for (int level = 0; level < levels; ++level) out.mesh = refine(out.mesh, out.reproject);
  return out;
}

GeometrySpec default_spec(const std::string& name) {
  if (name == "flat_disk") return {name, {{"radius", 1.0}, {"res", 4}, {"ambient", 4}}};
  if (name == "catenoid") return {name, {{"a", 1.0}, {"half_height", 1.0}, {"res", 4}}};
  if (name == "enneper") return {name, {{"radius", 0.5}, {"res", 4}}};
  if (name == "holomorphic") return {name, {{"k", 2}, {"radius", 1.0}, {"res", 4}}};
  if (name == "sphere") return {name, {{"radius", 1.0}, {"res", 1}, {"ambient", 3}}};
  throw std::invalid_argument("unknown geometry '" + name + "'");
}

GeneratedSurface generate(const GeometrySpec& spec) {
  const std::string name = spec.name == "holomorphic_graph" ? "holomorphic" : spec.name;
  const GeometrySpec defaults = default_spec(name);
  auto param = [&](const std::string& key) { return spec.get(key, defaults.get(key, 0.0)); };
  auto integer = [&](const std::string& key) {
    const double value = param(key);
    require(value == std::floor(value), name + ": parameter '" + key + "' must be an integer");
    return static_cast<int>(value);
  };

  if (name == "flat_disk") return gen_flat_disk(param("radius"), integer("res"), integer("ambient"));
  if (name == "catenoid") return gen_catenoid(param("a"), param("half_height"), integer("res"));
  if (name == "enneper") return gen_enneper(param("radius"), integer("res"));
  if (name == "holomorphic") return gen_holomorphic_graph(integer("k"), param("radius"), integer("res"));
  return gen_sphere(param("radius"), integer("res"), integer("ambient"));
}

}  // namespace abp
