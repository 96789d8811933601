#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abp {

/// One row per vertex, one column per ambient coordinate.
using Points = Eigen::MatrixXd;
using Triangles = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Per-vertex scalar values.
using ScalarField = Eigen::VectorXd;
/// Per-vertex ambient vectors, one row per vertex.
using AmbientVectorField = Eigen::MatrixXd;
/// Per-face ambient vectors lying in the face plane, one row per face.
using TangentVectorField = Eigen::MatrixXd;

class MeshError : public std::runtime_error {
 public:
  enum class Kind {
    IndexOutOfRange,
    BadDimension,
    NonManifoldEdge,
    DegenerateTriangle,
    InconsistentOrientation,
    SizeMismatch,
    Io,
  };

  MeshError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct BoundaryLoop {
  std::vector<int> vertices;  // closed cycle, last connects back to first
  double length = 0.0;
};

/// Oriented triangle mesh immersed in R^d, d in {3, 4}.
///
/// Construction validates manifoldness and non-degeneracy, repairs
/// inconsistent winding by breadth-first propagation, and extracts the
/// boundary. The object is immutable afterwards.
class Mesh {
 public:
  Mesh(int ambient_dim, Points vertices, Triangles triangles);

  int ambient_dim() const noexcept { return ambient_dim_; }
  int num_vertices() const noexcept { return static_cast<int>(V_.rows()); }
  int num_faces() const noexcept { return static_cast<int>(F_.rows()); }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }

  const Points& vertices() const noexcept { return V_; }
  const Triangles& triangles() const noexcept { return F_; }
  Eigen::VectorXd position(int v) const { return V_.row(v).transpose(); }

  /// Undirected edges (a < b).
  const std::vector<std::array<int, 2>>& edges() const noexcept { return edges_; }
  /// Directed edges lying in exactly one triangle, oriented as in that triangle.
  const std::vector<std::array<int, 2>>& boundary_edges() const noexcept {
    return boundary_edges_;
  }
  const std::vector<BoundaryLoop>& boundary_loops() const noexcept { return loops_; }

  const std::vector<std::vector<int>>& vertex_faces() const noexcept { return vertex_faces_; }
  const std::vector<std::vector<int>>& vertex_neighbors() const noexcept {
    return vertex_neighbors_;
  }
  bool is_boundary_vertex(int v) const { return on_boundary_[v] != 0; }
  bool has_boundary() const noexcept { return !boundary_edges_.empty(); }

  const Eigen::VectorXd& face_areas() const noexcept { return face_areas_; }
  /// Lumped (barycentric) vertex masses: one third of each incident face area.
  const Eigen::VectorXd& lumped_mass() const noexcept { return lumped_mass_; }
  double total_area() const { return face_areas_.sum(); }
  double max_edge_length() const noexcept { return max_edge_length_; }

  int num_components() const noexcept { return num_components_; }
  /// Connected component label per vertex.
  const std::vector<int>& component_of_vertex() const noexcept { return component_; }

  bool orientation_repaired() const noexcept { return orientation_repaired_; }

 private:
  void orient_faces();
  void build_topology();
  void extract_boundary();
  void label_components();

  int ambient_dim_;
  Points V_;
  Triangles F_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 2>> boundary_edges_;
  std::vector<BoundaryLoop> loops_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::vector<int>> vertex_neighbors_;
  std::vector<char> on_boundary_;
  Eigen::VectorXd face_areas_;
  Eigen::VectorXd lumped_mass_;
  double max_edge_length_ = 0.0;
  std::vector<int> component_;
  int num_components_ = 0;
  bool orientation_repaired_ = false;
};

Mesh build_mesh(int ambient_dim, Points vertices, Triangles triangles);

/// Boundary cycles, oriented so the surface lies to the left.
std::vector<BoundaryLoop> boundary_extract(const Mesh& mesh);

/// Lumped quadrature over the surface: sum of area times mean of vertex values.
double integrate(const Mesh& mesh, const ScalarField& field);

/// Lumped quadrature over the boundary: sum of length times mean of endpoint values.
double boundary_integrate(const Mesh& mesh, const ScalarField& field);

/// Places the new vertex of a split edge on an analytic surface, given the
/// two edge endpoints and whether the edge lies on the boundary.
using Reprojector =
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, bool)>;

/// 1-to-4 midpoint subdivision.
Mesh refine(const Mesh& mesh, const Reprojector& reproject = {});

/// Appends zero coordinates up to `ambient_dim`.
Mesh pad_ambient(const Mesh& mesh, int ambient_dim);

/// Applies x -> R x + t to every vertex.
Mesh rigid_transform(const Mesh& mesh, const Eigen::MatrixXd& rotation,
                     const Eigen::VectorXd& translation);

Mesh disjoint_union(const Mesh& a, const Mesh& b);

struct Submesh {
  Mesh mesh;
  std::vector<int> vertex_map;  // local vertex -> parent vertex
};

std::vector<Submesh> split_components(const Mesh& mesh);

/// Max edge length divided by the largest vertex distance from the centroid.
double relative_mesh_size(const Mesh& mesh);

}  // namespace abp
