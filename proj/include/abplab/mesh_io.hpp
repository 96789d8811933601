#pragma once

#include "abplab/mesh.hpp"

#include <iosfwd>
#include <string>

namespace abp {

/// ASCII OFF with triangular faces; always yields a mesh in R^3.
Mesh read_off(std::istream& in);
void write_off(std::ostream& out, const Mesh& mesh);

/// {"ambient_dim": d, "vertices": [[...]], "triangles": [[i, j, k]]}
Mesh read_json_mesh(std::istream& in);
void write_json_mesh(std::ostream& out, const Mesh& mesh);

/// Dispatches on the file extension (.off or .json).
Mesh load_mesh(const std::string& path);
void save_mesh(const std::string& path, const Mesh& mesh);

}  // namespace abp
