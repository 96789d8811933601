#pragma once

#include "abplab/geometry.hpp"
#include "abplab/pde.hpp"
#include "abplab/shape.hpp"
#include "abplab/transport.hpp"

#include <Eigen/Geometry>

#include <memory>

namespace testing {

inline abp::GeneratedSurface surface(const std::string& name, int levels,
                                     std::map<std::string, double> params = {}) {
  return abp::refined(abp::generate({name, std::move(params)}), levels);
}

/// Owns everything a TransportState points to.
struct Pipeline {
  abp::Mesh mesh;
  abp::ShapeData shape;
  abp::NormalizedDensity density;
  abp::NeumannSolution solution;
  abp::TransportState state;

  explicit Pipeline(abp::Mesh m, const abp::TransportTolerances& tol = {})
      : Pipeline(std::move(m), abp::ScalarField(), tol) {}
  Pipeline(abp::Mesh m, abp::ScalarField f, const abp::TransportTolerances& tol = {})
      : mesh(std::move(m)) {
    if (f.size() == 0) f = abp::ScalarField::Ones(mesh.num_vertices());
    shape = abp::second_fundamental_form(mesh);
    density = abp::normalize_density(mesh, f, shape);
    solution = abp::solve_neumann(mesh, density.f, shape);
    state = abp::build_transport_state(mesh, density.f, solution, shape, tol);
  }
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;
};

inline std::unique_ptr<Pipeline> pipeline(const abp::Mesh& mesh, const abp::TransportTolerances& tol = {}) {
  const abp::Mesh m = mesh.ambient_dim() == 3 ? abp::pad_ambient(mesh, 4) : mesh;
  return std::make_unique<Pipeline>(m, tol);
}

inline Eigen::Matrix3d some_rotation() {
  return (Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()) *
          Eigen::AngleAxisd(-0.4, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

}  // namespace testing
