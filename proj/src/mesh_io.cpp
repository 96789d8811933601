#include "abplab/mesh_io.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace abp {

namespace {

// Reads the next whitespace-separated token, skipping '#' comments.
bool next_token(std::istream& in, std::string& token) {
  while (in >> token) {
    if (token[0] != '#') return true;
    std::string rest;
    std::getline(in, rest);
  }
  return false;
}

template <typename T>
T parse_token(std::istream& in, const char* what) {
  std::string token;
  if (!next_token(in, token)) {
    throw MeshError(MeshError::Kind::Io, std::string("OFF: unexpected end of file reading ") + what);
  }
  std::istringstream ss(token);
  T value;
  if (!(ss >> value)) {
    throw MeshError(MeshError::Kind::Io, std::string("OFF: malformed ") + what + " '" + token + "'");
  }
  return value;
}

std::string extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

Mesh read_off(std::istream& in) {
  std::string header;
  if (!next_token(in, header) || header != "OFF") {
    throw MeshError(MeshError::Kind::Io, "OFF: missing header");
  }
  const int nv = parse_token<int>(in, "vertex count");
  const int nf = parse_token<int>(in, "face count");
  parse_token<int>(in, "edge count");
  if (nv <= 0 || nf <= 0) throw MeshError(MeshError::Kind::Io, "OFF: empty mesh");

  Points V(nv, 3);
  for (int i = 0; i < nv; ++i) {
    for (int k = 0; k < 3; ++k) V(i, k) = parse_token<double>(in, "coordinate");
  }
  Triangles F(nf, 3);
  for (int f = 0; f < nf; ++f) {
    const int count = parse_token<int>(in, "face size");
    if (count != 3) throw MeshError(MeshError::Kind::Io, "OFF: only triangles are supported");
    for (int k = 0; k < 3; ++k) F(f, k) = parse_token<int>(in, "vertex index");
  }
  return Mesh(3, std::move(V), std::move(F));
}

void write_off(std::ostream& out, const Mesh& mesh) {
  if (mesh.ambient_dim() != 3) {
    throw MeshError(MeshError::Kind::Io, "OFF output requires ambient dimension 3");
  }
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  out << std::setprecision(17);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << mesh.vertices()(i, 0) << ' ' << mesh.vertices()(i, 1) << ' ' << mesh.vertices()(i, 2) << '\n';
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    out << "3 " << mesh.triangles()(f, 0) << ' ' << mesh.triangles()(f, 1) << ' '
        << mesh.triangles()(f, 2) << '\n';
  }
}

Mesh read_json_mesh(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
    const int d = doc.at("ambient_dim").get<int>();
    const auto& verts = doc.at("vertices");
    const auto& tris = doc.at("triangles");
    Points V(verts.size(), d);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (verts[i].size() != static_cast<std::size_t>(d)) {
        throw MeshError(MeshError::Kind::BadDimension,
                        "vertex " + std::to_string(i) + " has wrong coordinate count");
      }
      for (int k = 0; k < d; ++k) V(i, k) = verts[i][k].get<double>();
    }
    Triangles F(tris.size(), 3);
    for (std::size_t f = 0; f < tris.size(); ++f) {
      if (tris[f].size() != 3) throw MeshError(MeshError::Kind::Io, "triangle entries need 3 indices");
      for (int k = 0; k < 3; ++k) F(f, k) = tris[f][k].get<int>();
    }
    if (d != 3 && d != 4) {
      throw MeshError(MeshError::Kind::BadDimension, "ambient_dim must be 3 or 4");
    }
    return Mesh(d, std::move(V), std::move(F));
  } catch (const nlohmann::json::exception& e) {
    throw MeshError(MeshError::Kind::Io, std::string("JSON mesh: ") + e.what());
  }
}

void write_json_mesh(std::ostream& out, const Mesh& mesh) {
  nlohmann::json doc;
  doc["ambient_dim"] = mesh.ambient_dim();
  auto verts = nlohmann::json::array();
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < mesh.ambient_dim(); ++k) row.push_back(mesh.vertices()(i, k));
    verts.push_back(std::move(row));
  }
  auto tris = nlohmann::json::array();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    tris.push_back({mesh.triangles()(f, 0), mesh.triangles()(f, 1), mesh.triangles()(f, 2)});
  }
  doc["vertices"] = std::move(verts);
  doc["triangles"] = std::move(tris);
  out << doc.dump() << '\n';
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::Io, "cannot open " + path);
  const std::string ext = extension(path);
  if (ext == "off") return read_off(in);
  if (ext == "json") return read_json_mesh(in);
  throw MeshError(MeshError::Kind::Io, "unknown mesh format: " + path);
}

void save_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError(MeshError::Kind::Io, "cannot write " + path);
  if (extension(path) == "off") {
    write_off(out, mesh);
  } else {
    write_json_mesh(out, mesh);
  }
}

}  // namespace abp
