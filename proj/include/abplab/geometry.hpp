#pragma once

#include "abplab/mesh.hpp"

#include <functional>
#include <map>
#include <string>

namespace abp {

/// Closed-form or quadrature reference quantities for a generated surface.
struct AnalyticReference {
  std::string name;
  std::map<std::string, double> parameters;
  double exact_area = 0.0;
  double exact_boundary_length = 0.0;
  /// Integral of |H| over the surface.
  double exact_mean_curvature_integral = 0.0;
  /// |H| at a point of the surface (trace convention).
  std::function<double(const Eigen::VectorXd&)> mean_curvature_norm;
  /// |II|^2 at a point of the surface.
  std::function<double(const Eigen::VectorXd&)> second_fundamental_norm_sq;
  bool is_minimal = false;
};

struct GeneratedSurface {
  Mesh mesh;
  AnalyticReference reference;
  Reprojector reproject;
};

/// Concentric-ring disk in the first two coordinates; `resolution` rings.
GeneratedSurface gen_flat_disk(double radius, int resolution, int ambient_dim = 3);

/// r = a cosh(z / a), |z| <= h in R^3; `resolution` rows, 4x as many columns.
GeneratedSurface gen_catenoid(double waist, double half_height, int resolution);

/// Enneper surface over |w| <= r, 0 < r <= 1.
GeneratedSurface gen_enneper(double radius_param, int resolution);

/// z -> (Re z, Im z, Re z^k, Im z^k) over |z| <= r in R^4.
GeneratedSurface gen_holomorphic_graph(int degree, double radius, int resolution);

/// Icosahedron subdivided `resolution` times and projected to the sphere.
GeneratedSurface gen_sphere(double radius, int resolution, int ambient_dim = 3);

/// Applies `levels` rounds of reprojected midpoint subdivision.
GeneratedSurface refined(const GeneratedSurface& surface, int levels);

struct GeometrySpec {
  std::string name;
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

/// Dispatches on spec.name: flat_disk, catenoid, enneper, holomorphic, sphere.
/// Throws std::invalid_argument for unknown names or invalid parameters.
GeneratedSurface generate(const GeometrySpec& spec);

/// Generator defaults used when a parameter is absent from a spec.
GeometrySpec default_spec(const std::string& name);

}  // namespace abp
