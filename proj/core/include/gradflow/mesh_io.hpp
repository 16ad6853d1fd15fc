#pragma once

// Mesh documents: a JSON text with a header (dim, domain vertices), a cells
// table (id, site, volume, vertices) and a faces table (K, L, area, distance,
// interface endpoints). Every real is written with 17 significant digits so
// a write/read cycle reproduces the mesh bit for bit.

#include "gradflow/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace gradflow {

void write_mesh(std::ostream &os, const Mesh &mesh);
std::string mesh_to_string(const Mesh &mesh);
Mesh read_mesh(std::istream &is);
Mesh mesh_from_string(const std::string &text);

void save_mesh(const std::filesystem::path &path, const Mesh &mesh);
Mesh load_mesh(const std::filesystem::path &path);

/// Shortest "%.17g" rendering of a double.
std::string format_real(double value);

} // namespace gradflow
