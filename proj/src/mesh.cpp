#include "abplab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <utility>

namespace abp {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

bool has_directed_edge(const Triangles& F, int f, int a, int b) {
  for (int k = 0; k < 3; ++k) {
    if (F(f, k) == a && F(f, (k + 1) % 3) == b) return true;
  }
  return false;
}

double triangle_area(const Eigen::VectorXd& p0, const Eigen::VectorXd& p1,
                     const Eigen::VectorXd& p2) {
  const Eigen::VectorXd e1 = p1 - p0;
  const Eigen::VectorXd e2 = p2 - p0;
  const double a = e1.squaredNorm();
  const double b = e2.squaredNorm();
  const double c = e1.dot(e2);
  return 0.5 * std::sqrt(std::max(0.0, a * b - c * c));
}

std::map<EdgeKey, std::vector<int>> edge_face_map(const Triangles& F) {
  std::map<EdgeKey, std::vector<int>> map;
  for (int f = 0; f < F.rows(); ++f) {
    for (int k = 0; k < 3; ++k) map[edge_key(F(f, k), F(f, (k + 1) % 3))].push_back(f);
  }
  return map;
}

}  // namespace

Mesh::Mesh(int ambient_dim, Points vertices, Triangles triangles)
    : ambient_dim_(ambient_dim), V_(std::move(vertices)), F_(std::move(triangles)) {
  if (ambient_dim_ != 3 && ambient_dim_ != 4) {
    throw MeshError(MeshError::Kind::BadDimension,
                    "ambient dimension must be 3 or 4, got " + std::to_string(ambient_dim_));
  }
  if (V_.cols() != ambient_dim_) {
    throw MeshError(MeshError::Kind::BadDimension, "vertex coordinates do not match ambient dimension");
  }
  if (F_.rows() == 0) {
    throw MeshError(MeshError::Kind::DegenerateTriangle, "mesh has no triangles");
  }
  std::vector<char> referenced(V_.rows(), 0);
  for (int f = 0; f < F_.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int v = F_(f, k);
      if (v < 0 || v >= V_.rows()) {
        throw MeshError(MeshError::Kind::IndexOutOfRange,
                        "triangle " + std::to_string(f) + " references vertex " + std::to_string(v));
      }
      referenced[v] = 1;
    }
    if (F_(f, 0) == F_(f, 1) || F_(f, 1) == F_(f, 2) || F_(f, 0) == F_(f, 2)) {
      throw MeshError(MeshError::Kind::DegenerateTriangle,
                      "triangle " + std::to_string(f) + " repeats a vertex");
    }
  }
  for (Eigen::Index v = 0; v < V_.rows(); ++v) {
    if (!referenced[v]) {
      throw MeshError(MeshError::Kind::IndexOutOfRange,
                      "vertex " + std::to_string(v) + " is not used by any triangle");
    }
  }

  for (const auto& [key, faces] : edge_face_map(F_)) {
    if (faces.size() > 2) {
      throw MeshError(MeshError::Kind::NonManifoldEdge,
                      "edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                          ") lies in " + std::to_string(faces.size()) + " triangles");
    }
  }

  face_areas_.resize(F_.rows());
  for (int f = 0; f < F_.rows(); ++f) {
    face_areas_[f] = triangle_area(position(F_(f, 0)), position(F_(f, 1)), position(F_(f, 2)));
  }
  const double threshold = 1e-14 * face_areas_.mean();
  for (int f = 0; f < F_.rows(); ++f) {
    if (!(face_areas_[f] > threshold)) {
      throw MeshError(MeshError::Kind::DegenerateTriangle,
                      "triangle " + std::to_string(f) + " has (near) zero area");
    }
  }

  orient_faces();
  build_topology();
  extract_boundary();
  label_components();
}

void Mesh::orient_faces() {
  const auto edge_faces = edge_face_map(F_);
  std::vector<std::vector<int>> face_adjacent(F_.rows());
  for (const auto& [key, faces] : edge_faces) {
    if (faces.size() == 2) {
      face_adjacent[faces[0]].push_back(faces[1]);
      face_adjacent[faces[1]].push_back(faces[0]);
    }
  }

  std::vector<char> visited(F_.rows(), 0);
  for (int seed = 0; seed < F_.rows(); ++seed) {
    if (visited[seed]) continue;
    visited[seed] = 1;
    std::queue<int> queue;
    queue.push(seed);
    while (!queue.empty()) {
      const int f = queue.front();
      queue.pop();
      for (int k = 0; k < 3; ++k) {
        const int a = F_(f, k);
        const int b = F_(f, (k + 1) % 3);
        for (int g : edge_faces.at(edge_key(a, b))) {
          if (g == f) continue;
          const bool same_direction = has_directed_edge(F_, g, a, b);
          if (!visited[g]) {
            if (same_direction) {
              std::swap(F_(g, 1), F_(g, 2));
              orientation_repaired_ = true;
            }
            visited[g] = 1;
            queue.push(g);
          } else if (same_direction) {
            throw MeshError(MeshError::Kind::InconsistentOrientation,
                            "surface is not orientable near triangle " + std::to_string(g));
          }
        }
      }
    }
  }
}

void Mesh::build_topology() {
  const int nv = num_vertices();
  vertex_faces_.assign(nv, {});
  vertex_neighbors_.assign(nv, {});
  on_boundary_.assign(nv, 0);
  lumped_mass_ = Eigen::VectorXd::Zero(nv);

  for (int f = 0; f < F_.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      vertex_faces_[F_(f, k)].push_back(f);
      lumped_mass_[F_(f, k)] += face_areas_[f] / 3.0;
    }
  }

  std::map<EdgeKey, std::vector<int>> edge_faces = edge_face_map(F_);
  edges_.clear();
  boundary_edges_.clear();
  max_edge_length_ = 0.0;
  for (const auto& [key, faces] : edge_faces) {
    edges_.push_back({key.first, key.second});
    vertex_neighbors_[key.first].push_back(key.second);
    vertex_neighbors_[key.second].push_back(key.first);
    max_edge_length_ = std::max(max_edge_length_, (V_.row(key.first) - V_.row(key.second)).norm());
    if (faces.size() == 1) {
      const int f = faces[0];
      if (has_directed_edge(F_, f, key.first, key.second)) {
        boundary_edges_.push_back({key.first, key.second});
      } else {
        boundary_edges_.push_back({key.second, key.first});
      }
      on_boundary_[key.first] = 1;
      on_boundary_[key.second] = 1;
    }
  }
  for (auto& nbrs : vertex_neighbors_) std::sort(nbrs.begin(), nbrs.end());
}

void Mesh::extract_boundary() {
  loops_.clear();
  std::multimap<int, int> outgoing;  // start vertex -> boundary edge index
  for (int e = 0; e < static_cast<int>(boundary_edges_.size()); ++e) {
    outgoing.emplace(boundary_edges_[e][0], e);
  }
  std::vector<char> used(boundary_edges_.size(), 0);
  for (int start = 0; start < static_cast<int>(boundary_edges_.size()); ++start) {
    if (used[start]) continue;
    BoundaryLoop loop;
    int e = start;
    while (e >= 0 && !used[e]) {
      used[e] = 1;
      const auto [a, b] = boundary_edges_[e];
      loop.vertices.push_back(a);
      loop.length += (V_.row(a) - V_.row(b)).norm();
      int next = -1;
      auto range = outgoing.equal_range(b);
      for (auto it = range.first; it != range.second; ++it) {
        if (!used[it->second]) {
          next = it->second;
          break;
        }
      }
      e = next;
    }
    loops_.push_back(std::move(loop));
  }
}

void Mesh::label_components() {
  component_.assign(num_vertices(), -1);
  num_components_ = 0;
  for (int seed = 0; seed < num_vertices(); ++seed) {
    if (component_[seed] >= 0) continue;
    std::queue<int> queue;
    queue.push(seed);
    component_[seed] = num_components_;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop();
      for (int w : vertex_neighbors_[v]) {
        if (component_[w] < 0) {
          component_[w] = num_components_;
          queue.push(w);
        }
      }
    }
    ++num_components_;
  }
}

Mesh build_mesh(int ambient_dim, Points vertices, Triangles triangles) {
  return Mesh(ambient_dim, std::move(vertices), std::move(triangles));
}

std::vector<BoundaryLoop> boundary_extract(const Mesh& mesh) { return mesh.boundary_loops(); }

double integrate(const Mesh& mesh, const ScalarField& field) {
  if (field.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "field size does not match vertex count");
  }
  const Triangles& F = mesh.triangles();
  const Eigen::VectorXd& area = mesh.face_areas();
  double total = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    total += area[f] * (field[F(f, 0)] + field[F(f, 1)] + field[F(f, 2)]) / 3.0;
  }
  return total;
}

double boundary_integrate(const Mesh& mesh, const ScalarField& field) {
  if (field.size() != mesh.num_vertices()) {
    throw MeshError(MeshError::Kind::SizeMismatch, "field size does not match vertex count");
  }
  const Points& V = mesh.vertices();
  double total = 0.0;
  for (const auto& [a, b] : mesh.boundary_edges()) {
    total += (V.row(a) - V.row(b)).norm() * 0.5 * (field[a] + field[b]);
  }
  return total;
}

Mesh refine(const Mesh& mesh, const Reprojector& reproject) {
  const int nv = mesh.num_vertices();
  const auto& edges = mesh.edges();
  std::map<EdgeKey, int> midpoint_index;
  std::map<EdgeKey, bool> boundary_edge;
  for (const auto& [a, b] : mesh.boundary_edges()) boundary_edge[edge_key(a, b)] = true;

  Points V(nv + static_cast<int>(edges.size()), mesh.ambient_dim());
  V.topRows(nv) = mesh.vertices();
  int next = nv;
  for (const auto& [a, b] : edges) {
    Eigen::VectorXd mid = reproject ? reproject(mesh.position(a), mesh.position(b), boundary_edge.count({a, b}) > 0)
                                    : Eigen::VectorXd(0.5 * (mesh.position(a) + mesh.position(b)));
    V.row(next) = mid.transpose();
    midpoint_index[{a, b}] = next++;
  }

  const Triangles& F = mesh.triangles();
  Triangles G(4 * F.rows(), 3);
  for (int f = 0; f < F.rows(); ++f) {
    const int a = F(f, 0), b = F(f, 1), c = F(f, 2);
    const int ab = midpoint_index.at(edge_key(a, b));
    const int bc = midpoint_index.at(edge_key(b, c));
    const int ca = midpoint_index.at(edge_key(c, a));
    G.row(4 * f + 0) << a, ab, ca;
    G.row(4 * f + 1) << ab, b, bc;
    G.row(4 * f + 2) << ca, bc, c;
    G.row(4 * f + 3) << ab, bc, ca;
  }
  return Mesh(mesh.ambient_dim(), std::move(V), std::move(G));
}

Mesh pad_ambient(const Mesh& mesh, int ambient_dim) {
  if (ambient_dim < mesh.ambient_dim()) {
    throw MeshError(MeshError::Kind::BadDimension, "cannot pad to a smaller ambient dimension");
  }
  Points V = Points::Zero(mesh.num_vertices(), ambient_dim);
  V.leftCols(mesh.ambient_dim()) = mesh.vertices();
  return Mesh(ambient_dim, std::move(V), mesh.triangles());
}

Mesh rigid_transform(const Mesh& mesh, const Eigen::MatrixXd& rotation,
                     const Eigen::VectorXd& translation) {
  Points V = (mesh.vertices() * rotation.transpose()).rowwise() + translation.transpose();
  return Mesh(mesh.ambient_dim(), std::move(V), mesh.triangles());
}

Mesh disjoint_union(const Mesh& a, const Mesh& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw MeshError(MeshError::Kind::BadDimension, "ambient dimensions differ");
  }
  Points V(a.num_vertices() + b.num_vertices(), a.ambient_dim());
  V << a.vertices(), b.vertices();
  Triangles F(a.num_faces() + b.num_faces(), 3);
  F << a.triangles(), (b.triangles().array() + a.num_vertices()).matrix();
  return Mesh(a.ambient_dim(), std::move(V), std::move(F));
}

std::vector<Submesh> split_components(const Mesh& mesh) {
  const auto& label = mesh.component_of_vertex();
  std::vector<Submesh> parts;
  for (int c = 0; c < mesh.num_components(); ++c) {
    std::vector<int> local(mesh.num_vertices(), -1);
    std::vector<int> vertex_map;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (label[v] == c) {
        local[v] = static_cast<int>(vertex_map.size());
        vertex_map.push_back(v);
      }
    }
    std::vector<int> faces;
    for (int f = 0; f < mesh.num_faces(); ++f) {
      if (label[mesh.triangles()(f, 0)] == c) faces.push_back(f);
    }
    Points V(vertex_map.size(), mesh.ambient_dim());
    for (std::size_t i = 0; i < vertex_map.size(); ++i) V.row(i) = mesh.vertices().row(vertex_map[i]);
    Triangles F(faces.size(), 3);
    for (std::size_t i = 0; i < faces.size(); ++i) {
      for (int k = 0; k < 3; ++k) F(i, k) = local[mesh.triangles()(faces[i], k)];
    }
    parts.push_back({Mesh(mesh.ambient_dim(), std::move(V), std::move(F)), std::move(vertex_map)});
  }
  return parts;
}

double relative_mesh_size(const Mesh& mesh) {
  const Eigen::RowVectorXd centroid = mesh.vertices().colwise().mean();
  const double radius = (mesh.vertices().rowwise() - centroid).rowwise().norm().maxCoeff();
  return mesh.max_edge_length() / radius;
}

}  // namespace abp
