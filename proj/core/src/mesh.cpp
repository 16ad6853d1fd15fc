#include "gradflow/mesh.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace gradflow {

namespace {

constexpr double kVolumeTol = 1e-10;
constexpr double kOrthTol = 1e-9;

Polygon interval_shape(double lo, double hi) {
  Polygon p;
  p.vertices = {{lo, 0.0}, {hi, 0.0}};
  p.edge_labels = {-1, -2};
  return p;
}

} // namespace

double Domain::volume() const {
  if (dim == 1) return shape.vertices[1].x - shape.vertices[0].x;
  return polygon_area(shape);
}

double Domain::diameter() const {
  if (dim == 1) return volume();
  return polygon_diameter(shape);
}

bool Domain::contains(const Vec2 &p, double tol) const {
  if (dim == 1) return p.x >= shape.vertices[0].x - tol && p.x <= shape.vertices[1].x + tol;
  return gradflow::contains(shape, p, tol);
}

Mesh::Mesh(int dim, Domain domain, std::vector<Cell> cells, std::vector<Face> faces)
    : dim_(dim), domain_(std::move(domain)), cells_(std::move(cells)), faces_(std::move(faces)) {
  if (dim_ != 1 && dim_ != 2) throw MeshError("mesh dimension must be 1 or 2");
  if (domain_.dim != dim_) throw MeshError("domain dimension does not match mesh");
  if (cells_.empty()) throw MeshError("mesh has no cells");

  const double vol = domain_.volume();
  double total = 0.0;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto &c = cells_[k];
    if (!(c.volume > 0.0)) throw MeshError("cell volume must be positive", static_cast<std::ptrdiff_t>(k));
    total += c.volume;
    size_ = std::max(size_, cell_diameter(k));
  }
  if (std::abs(total - vol) > kVolumeTol * vol) {
    std::ostringstream os;
    os << "cell volumes sum to " << total << " but the domain has volume " << vol;
    throw MeshError(os.str());
  }

  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto &c = cells_[k];
    const double tol = 1e-12 * std::max(1.0, size_);
    bool inside = false;
    if (dim_ == 1) {
      inside = c.site.x >= c.shape.vertices[0].x - tol && c.site.x <= c.shape.vertices[1].x + tol;
    } else {
      inside = gradflow::contains(c.shape, c.site, tol);
    }
    if (!inside) throw MeshError("site lies outside its cell", static_cast<std::ptrdiff_t>(k));
  }

  std::set<std::pair<int, int>> seen;
  const int n = static_cast<int>(cells_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    auto &face = faces_[f];
    if (face.k < 0 || face.l < 0 || face.k >= n || face.l >= n || face.k == face.l) {
      throw MeshError("face references invalid cells", static_cast<std::ptrdiff_t>(f));
    }
    const auto key = std::minmax(face.k, face.l);
    if (!seen.insert({key.first, key.second}).second) {
      throw MeshError("cell pair appears in more than one face", static_cast<std::ptrdiff_t>(f));
    }
    if (!(face.area > 0.0)) throw MeshError("face area must be positive", static_cast<std::ptrdiff_t>(f));
    const Vec2 diff = cells_[face.k].site - cells_[face.l].site;
    const double d = norm(diff);
    if (!(d > 0.0)) throw MeshError("neighbouring sites coincide", static_cast<std::ptrdiff_t>(f));
    if (std::abs(d - face.distance) > 1e-12 * std::max(d, 1.0)) {
      throw MeshError("face distance does not match the site separation", static_cast<std::ptrdiff_t>(f));
    }
    face.tau = diff * (1.0 / d);
    if (dim_ == 2) {
      const Vec2 t = face.b - face.a;
      const double len = norm(t);
      if (len > 0.0 && std::abs(dot(face.tau, t) / len) > kOrthTol) {
        throw MeshError("site segment is not orthogonal to its face", static_cast<std::ptrdiff_t>(f));
      }
    }
  }

  adjacency_offsets_.assign(cells_.size() + 1, 0);
  for (const auto &face : faces_) {
    ++adjacency_offsets_[face.k + 1];
    ++adjacency_offsets_[face.l + 1];
  }
  std::partial_sum(adjacency_offsets_.begin(), adjacency_offsets_.end(), adjacency_offsets_.begin());
  adjacency_.assign(adjacency_offsets_.back(), 0);
  std::vector<int> cursor(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    adjacency_[cursor[faces_[f].k]++] = static_cast<int>(f);
    adjacency_[cursor[faces_[f].l]++] = static_cast<int>(f);
  }
}

std::span<const int> Mesh::cell_faces(std::size_t k) const {
  return {adjacency_.data() + adjacency_offsets_[k],
          static_cast<std::size_t>(adjacency_offsets_[k + 1] - adjacency_offsets_[k])};
}

int Mesh::neighbour(std::size_t k, std::size_t f) const {
  const auto &face = faces_[f];
  return face.k == static_cast<int>(k) ? face.l : face.k;
}

double Mesh::cell_diameter(std::size_t k) const {
  const auto &c = cells_[k];
  if (dim_ == 1) return c.shape.vertices[1].x - c.shape.vertices[0].x;
  return polygon_diameter(c.shape);
}

std::vector<Vec2> Mesh::sites() const {
  std::vector<Vec2> s;
  s.reserve(cells_.size());
  for (const auto &c : cells_) s.push_back(c.site);
  return s;
}

std::vector<double> Mesh::volumes() const {
  std::vector<double> v;
  v.reserve(cells_.size());
  for (const auto &c : cells_) v.push_back(c.volume);
  return v;
}

bool Mesh::connected() const {
  std::vector<char> seen(cells_.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    for (int f : cell_faces(k)) {
      const int l = neighbour(k, f);
      if (!seen[l]) {
        seen[l] = 1;
        ++count;
        stack.push_back(l);
      }
    }
  }
  return count == cells_.size();
}

Mesh build_interval_mesh(std::span<const double> x) {
  if (x.size() < 2) throw MeshError("an interval mesh needs at least two breakpoints");
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] > x[i])) {
      std::ostringstream os;
      os << "breakpoints must be strictly increasing (violation at index " << i + 1 << ")";
      throw MeshError(os.str(), static_cast<std::ptrdiff_t>(i + 1));
    }
  }
  Domain domain{1, interval_shape(x.front(), x.back())};
  const std::size_t n = x.size() - 1;
  std::vector<Cell> cells(n);
  for (std::size_t i = 0; i < n; ++i) {
    cells[i].site = {0.5 * (x[i] + x[i + 1]), 0.0};
    cells[i].volume = x[i + 1] - x[i];
    cells[i].shape = interval_shape(x[i], x[i + 1]);
  }
  std::vector<Face> faces;
  faces.reserve(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Face f;
    f.k = static_cast<int>(i);
    f.l = static_cast<int>(i + 1);
    f.area = 1.0;
    f.distance = cells[i + 1].site.x - cells[i].site.x;
    f.a = f.b = {x[i + 1], 0.0};
    faces.push_back(f);
  }
  return Mesh(1, std::move(domain), std::move(cells), std::move(faces));
}

Mesh build_interval_mesh(int n, const std::function<double(int)> &grading, double a, double b) {
  if (n < 1) throw MeshError("interval mesh needs n >= 1");
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) x[i] = grading(i);
  const double tol = 1e-14 * std::max(1.0, std::abs(b - a));
  if (std::abs(x.front() - a) > tol || std::abs(x.back() - b) > tol) {
    throw MeshError("grading endpoints do not match the domain");
  }
  x.front() = a;
  x.back() = b;
  return build_interval_mesh(x);
}

Mesh build_uniform_interval_mesh(int n, double a, double b) {
  if (n < 1) throw MeshError("interval mesh needs n >= 1");
  if (!(b > a)) throw MeshError("degenerate interval");
  return build_interval_mesh(
      n, [&](int i) { return i == n ? b : a + (b - a) * static_cast<double>(i) / n; }, a, b);
}

Mesh build_cartesian_mesh(int nx, int ny, Vec2 lo, Vec2 hi) {
  if (nx < 1 || ny < 1) throw MeshError("cartesian mesh needs nx, ny >= 1");
  if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw MeshError("degenerate rectangle");
  auto xs = [&](int i) { return i == nx ? hi.x : lo.x + (hi.x - lo.x) * static_cast<double>(i) / nx; };
  auto ys = [&](int j) { return j == ny ? hi.y : lo.y + (hi.y - lo.y) * static_cast<double>(j) / ny; };
  Domain domain{2, make_box(lo, hi)};
  std::vector<Cell> cells(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      auto &c = cells[static_cast<std::size_t>(j) * nx + i];
      const Vec2 a{xs(i), ys(j)};
      const Vec2 b{xs(i + 1), ys(j + 1)};
      c.shape = make_box(a, b);
      // Edge labels: bottom, right, top, left neighbours (negative = boundary).
      c.shape.edge_labels = {j > 0 ? (j - 1) * nx + i : -1, i + 1 < nx ? j * nx + i + 1 : -2,
                             j + 1 < ny ? (j + 1) * nx + i : -3, i > 0 ? j * nx + i - 1 : -4};
      c.site = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      c.volume = (b.x - a.x) * (b.y - a.y);
    }
  }
  std::vector<Face> faces;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = j * nx + i;
      if (i + 1 < nx) {
        Face f;
        f.k = k;
        f.l = k + 1;
        f.a = {xs(i + 1), ys(j)};
        f.b = {xs(i + 1), ys(j + 1)};
        f.area = f.b.y - f.a.y;
        f.distance = distance(cells[k].site, cells[k + 1].site);
        faces.push_back(f);
      }
      if (j + 1 < ny) {
        Face f;
        f.k = k;
        f.l = k + nx;
        f.a = {xs(i), ys(j + 1)};
        f.b = {xs(i + 1), ys(j + 1)};
        f.area = f.b.x - f.a.x;
        f.distance = distance(cells[k].site, cells[k + nx].site);
        faces.push_back(f);
      }
    }
  }
  return Mesh(2, std::move(domain), std::move(cells), std::move(faces));
}

Mesh build_voronoi_mesh(std::span<const Vec2> sites, const Polygon &domain_poly) {
  if (sites.empty()) throw MeshError("voronoi mesh needs at least one site");
  if (!is_convex(domain_poly.vertices)) throw MeshError("domain polygon must be convex");
  Polygon dom = make_polygon(domain_poly.vertices);
  const double diam = polygon_diameter(dom);
  const double dup_tol = 1e-12 * diam;
  const std::size_t n = sites.size();

  for (std::size_t i = 0; i < n; ++i) {
    if (!gradflow::contains(dom, sites[i], 1e-14 * diam)) {
      throw MeshError("site lies outside the domain", static_cast<std::ptrdiff_t>(i));
    }
  }
  // Duplicate detection through a lexicographic sort.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sites[a].x < sites[b].x || (sites[a].x == sites[b].x && sites[a].y < sites[b].y);
  });
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n && sites[order[j]].x - sites[order[i]].x <= dup_tol; ++j) {
      if (distance(sites[order[i]], sites[order[j]]) <= dup_tol) {
        throw MeshError("duplicate sites", static_cast<std::ptrdiff_t>(std::max(order[i], order[j])));
      }
    }
  }

  std::vector<Cell> cells(n);
  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back(distance(sites[i], sites[j]), static_cast<int>(j));
    }
    std::sort(candidates.begin(), candidates.end());
    Polygon poly = dom;
    for (const auto &[dist, j] : candidates) {
      // Security radius: bisectors farther than twice the cell radius cannot cut.
      double radius = 0.0;
      for (const auto &v : poly.vertices) radius = std::max(radius, distance(v, sites[i]));
      if (dist > 2.0 * radius) break;
      const Vec2 nrm = (sites[j] - sites[i]) * (1.0 / dist);
      const Vec2 mid = (sites[i] + sites[j]) * 0.5;
      poly = clip(poly, {nrm, dot(nrm, mid), j});
      if (poly.empty()) throw MeshError("voronoi cell collapsed", static_cast<std::ptrdiff_t>(i));
    }
    cells[i].shape = std::move(poly);
    cells[i].site = sites[i];
    cells[i].volume = polygon_area(cells[i].shape);
  }

  // Faces from the lower-index cell's labelled edges. Volume renormalisation is
  // not applied; clipped areas already partition the domain to round-off.
  double mesh_size = 0.0;
  for (const auto &c : cells) mesh_size = std::max(mesh_size, polygon_diameter(c.shape));
  const double min_area = 1e-12 * mesh_size;
  std::vector<Face> faces;
  for (std::size_t i = 0; i < n; ++i) {
    const auto &poly = cells[i].shape;
    const std::size_t m = poly.size();
    for (std::size_t e = 0; e < m; ++e) {
      const int j = poly.edge_labels[e];
      if (j <= static_cast<int>(i)) continue;
      Face f;
      f.k = static_cast<int>(i);
      f.l = j;
      f.a = poly.vertices[e];
      f.b = poly.vertices[(e + 1) % m];
      f.area = distance(f.a, f.b);
      if (f.area < min_area) continue;
      f.distance = distance(sites[i], sites[j]);
      faces.push_back(f);
    }
  }
  std::sort(faces.begin(), faces.end(),
            [](const Face &a, const Face &b) { return a.k < b.k || (a.k == b.k && a.l < b.l); });
  // Two edges with the same label can appear only through merging artefacts.
  faces.erase(std::unique(faces.begin(), faces.end(),
                          [](const Face &a, const Face &b) { return a.k == b.k && a.l == b.l; }),
              faces.end());
  Domain domain{2, dom};
  return Mesh(2, std::move(domain), std::move(cells), std::move(faces));
}

RegularityReport regularity_report(const Mesh &mesh) {
  RegularityReport r;
  r.mesh_size = mesh.size();
  double inner = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto &c = mesh.cell(k);
    double rad = 0.0;
    if (mesh.dim() == 1) {
      rad = std::min(c.site.x - c.shape.vertices[0].x, c.shape.vertices[1].x - c.site.x);
    } else {
      rad = inradius_at(c.shape, c.site);
    }
    inner = std::min(inner, rad);
  }
  r.zeta_inner = inner / r.mesh_size;
  if (mesh.num_faces() == 0) {
    r.zeta_area = 1.0;
  } else {
    const double scale = mesh.dim() == 1 ? 1.0 : r.mesh_size;
    double amin = std::numeric_limits<double>::infinity();
    for (const auto &f : mesh.faces()) amin = std::min(amin, f.area);
    r.zeta_area = amin / scale;
  }
  return r;
}

std::string regularity_warning(const RegularityReport &report, double threshold) {
  if (report.zeta() >= threshold) return {};
  std::ostringstream os;
  os << "mesh is not " << threshold << "-regular: zeta_inner=" << report.zeta_inner
     << " zeta_area=" << report.zeta_area;
  return os.str();
}

double orthogonality_defect(const Mesh &mesh) {
  if (mesh.dim() == 1) return 0.0;
  double worst = 0.0;
  for (const auto &f : mesh.faces()) {
    const Vec2 t = f.b - f.a;
    const double len = norm(t);
    if (len > 0.0) worst = std::max(worst, std::abs(dot(f.tau, t)) / len);
  }
  return worst;
}

std::vector<int> cells_meeting_open_box(const Mesh &mesh, Vec2 lo, Vec2 hi) {
  std::vector<int> out;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto &c = mesh.cell(k);
    bool meets = false;
    if (mesh.dim() == 1) {
      meets = c.shape.vertices[1].x > lo.x && c.shape.vertices[0].x < hi.x;
    } else {
      // A closed convex cell with interior meets an open box iff the overlap has area.
      const Polygon piece = intersect(c.shape, make_box(lo, hi), 0.0);
      meets = !piece.empty() && polygon_area(piece) > 1e-14 * c.volume;
    }
    if (meets) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> cells_meeting_open_cube(const Mesh &mesh, Vec2 center, double side) {
  const Vec2 half{0.5 * side, 0.5 * side};
  return cells_meeting_open_box(mesh, center - half, center + half);
}

double overlap_volume(const Mesh &mesh, std::size_t k, std::size_t l, Vec2 shift,
                      const Polygon &window) {
  const auto &ck = mesh.cell(k).shape;
  const auto &cl = mesh.cell(l).shape;
  if (mesh.dim() == 1) {
    const double lo = std::max({ck.vertices[0].x, cl.vertices[0].x + shift.x, window.vertices[0].x});
    const double hi = std::min({ck.vertices[1].x, cl.vertices[1].x + shift.x, window.vertices[1].x});
    return std::max(0.0, hi - lo);
  }
  Polygon piece = intersect(ck, translate(cl, shift), 0.0);
  if (piece.empty()) return 0.0;
  piece = intersect(piece, window, 0.0);
  return piece.empty() ? 0.0 : polygon_area(piece);
}

} // namespace gradflow
