#include "gradflow/mesh_io.hpp"

#include "gradflow/errors.hpp"
#include "gradflow/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gradflow {

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

void write_point(std::ostream &os, int dim, const Vec2 &p) {
  os << '[' << format_real(p.x);
  if (dim == 2) os << ',' << format_real(p.y);
  os << ']';
}

void write_points(std::ostream &os, int dim, const std::vector<Vec2> &pts) {
  os << '[';
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) os << ',';
    write_point(os, dim, pts[i]);
  }
  os << ']';
}

Vec2 read_point(const nlohmann::json &j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) throw InputError("mesh file: malformed point");
  return {j[0].get<double>(), dim == 2 ? j[1].get<double>() : 0.0};
}

std::vector<Vec2> read_points(const nlohmann::json &j, int dim) {
  std::vector<Vec2> pts;
  for (const auto &p : j) pts.push_back(read_point(p, dim));
  return pts;
}

Polygon labelled(std::vector<Vec2> pts) {
  Polygon p;
  p.vertices = std::move(pts);
  p.edge_labels.resize(p.vertices.size());
  for (std::size_t i = 0; i < p.vertices.size(); ++i) p.edge_labels[i] = -1 - static_cast<int>(i);
  return p;
}

} // namespace

void write_mesh(std::ostream &os, const Mesh &mesh) {
  const int dim = mesh.dim();
  os << "{\n  \"format\": \"gradflow-mesh\",\n  \"version\": 1,\n  \"dim\": " << dim
     << ",\n  \"domain\": ";
  write_points(os, dim, mesh.domain().shape.vertices);
  os << ",\n  \"cells\": [";
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto &c = mesh.cell(k);
    os << (k ? ",\n    " : "\n    ") << "{\"id\": " << k << ", \"site\": ";
    write_point(os, dim, c.site);
    os << ", \"volume\": " << format_real(c.volume) << ", \"vertices\": ";
    write_points(os, dim, c.shape.vertices);
    os << '}';
  }
  os << "\n  ],\n  \"faces\": [";
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const auto &face = mesh.face(f);
    os << (f ? ",\n    " : "\n    ") << "{\"K\": " << face.k << ", \"L\": " << face.l
       << ", \"area\": " << format_real(face.area) << ", \"distance\": " << format_real(face.distance)
       << ", \"endpoints\": ";
    write_points(os, dim, {face.a, face.b});
    os << '}';
  }
  os << "\n  ]\n}\n";
}

std::string mesh_to_string(const Mesh &mesh) {
  std::ostringstream os;
  write_mesh(os, mesh);
  return os.str();
}

Mesh read_mesh(std::istream &is) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw InputError(std::string("mesh file: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "gradflow-mesh") throw InputError("mesh file: unknown format tag");
    const int dim = doc.at("dim").get<int>();
    if (dim != 1 && dim != 2) throw InputError("mesh file: dim must be 1 or 2");
    Domain domain{dim, labelled(read_points(doc.at("domain"), dim))};
    std::vector<Cell> cells;
    const auto &jc = doc.at("cells");
    cells.reserve(jc.size());
    for (std::size_t k = 0; k < jc.size(); ++k) {
      const auto &c = jc[k];
      if (c.at("id").get<std::size_t>() != k) throw InputError("mesh file: cell ids must be 0..n-1 in order");
      Cell cell;
      cell.site = read_point(c.at("site"), dim);
      cell.volume = c.at("volume").get<double>();
      cell.shape = labelled(read_points(c.at("vertices"), dim));
      cells.push_back(std::move(cell));
    }
    std::vector<Face> faces;
    for (const auto &jf : doc.at("faces")) {
      Face f;
      f.k = jf.at("K").get<int>();
      f.l = jf.at("L").get<int>();
      f.area = jf.at("area").get<double>();
      f.distance = jf.at("distance").get<double>();
      const auto ends = read_points(jf.at("endpoints"), dim);
      if (ends.size() != 2) throw InputError("mesh file: a face needs two endpoints");
      f.a = ends[0];
      f.b = ends[1];
      faces.push_back(f);
    }
    return Mesh(dim, std::move(domain), std::move(cells), std::move(faces));
  } catch (const nlohmann::json::exception &e) {
    throw InputError(std::string("mesh file: ") + e.what());
  }
}

Mesh mesh_from_string(const std::string &text) {
  std::istringstream is(text);
  return read_mesh(is);
}

void save_mesh(const std::filesystem::path &path, const Mesh &mesh) {
  write_file_atomic(path, mesh_to_string(mesh));
}

Mesh load_mesh(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open mesh file " + path.string());
  return read_mesh(is);
}

} // namespace gradflow
