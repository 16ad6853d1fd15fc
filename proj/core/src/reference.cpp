#include "gradflow/reference.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace gradflow {

// ---------------------------------------------------------------- potentials

Potential Potential::zero() {
  return Potential("zero", [](const Vec2 &) { return 0.0; });
}

Potential Potential::linear(Vec2 a) {
  std::ostringstream os;
  os << "linear:" << a.x << ',' << a.y;
  return Potential(os.str(), [a](const Vec2 &x) { return dot(a, x); });
}

Potential Potential::quadratic(Vec2 c, double k) {
  std::ostringstream os;
  os << "quadratic:" << c.x << ',' << c.y << ';' << k;
  return Potential(os.str(), [c, k](const Vec2 &x) {
    const Vec2 d = x - c;
    return 0.5 * k * dot(d, d);
  });
}

Potential Potential::double_well(double c, double w, double depth) {
  std::ostringstream os;
  os << "double-well:" << c << ',' << w << ',' << depth;
  return Potential(os.str(), [c, w, depth](const Vec2 &x) {
    const double s = (x.x - c) / w;
    const double q = s * s - 1.0;
    return depth * q * q;
  });
}

namespace {

std::vector<double> parse_numbers(std::string_view text, char sep = ',') {
  std::vector<double> out;
  while (!text.empty()) {
    const auto pos = text.find(sep);
    const std::string_view token = text.substr(0, pos);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw InputError("cannot parse number '" + std::string(token) + "'");
    }
    out.push_back(v);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

} // namespace

Potential Potential::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "zero") return zero();
  if (name == "linear") {
    const auto a = parse_numbers(args.empty() ? "1" : args);
    if (a.empty() || a.size() > 2) throw InputError("linear potential takes one or two slopes");
    return linear({a[0], a.size() > 1 ? a[1] : 0.0});
  }
  if (name == "quadratic") {
    const auto semi = args.find(';');
    const auto c = parse_numbers(args.substr(0, semi).empty() ? "0.5" : args.substr(0, semi));
    const double k = semi == std::string_view::npos ? 1.0 : parse_numbers(args.substr(semi + 1)).at(0);
    if (c.empty() || c.size() > 2) throw InputError("quadratic potential takes a 1- or 2-d centre");
    return quadratic({c[0], c.size() > 1 ? c[1] : 0.0}, k);
  }
  if (name == "double-well") {
    const auto p = parse_numbers(args.empty() ? "0.5,0.25" : args);
    if (p.size() < 2 || p.size() > 3) throw InputError("double-well potential takes centre,width[,depth]");
    return double_well(p[0], p[1], p.size() > 2 ? p[2] : 1.0);
  }
  throw InputError("unknown potential '" + std::string(spec) + "'");
}

// ---------------------------------------------------------------- measures

DiscreteMeasure::DiscreteMeasure(std::vector<double> masses) : masses_(std::move(masses)) {
  double total = 0.0;
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    if (!(masses_[k] >= 0.0) || !std::isfinite(masses_[k])) {
      throw DomainError("discrete measure has a negative or non-finite mass at cell " + std::to_string(k));
    }
    total += masses_[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("discrete measure does not have unit mass (sum = " + std::to_string(total) + ")");
  }
}

DiscreteMeasure DiscreteMeasure::normalized(std::vector<double> w, double clip_tol) {
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] < 0.0) {
      if (w[k] >= -clip_tol) w[k] = 0.0;
      else throw DomainError("negative mass " + std::to_string(w[k]) + " at cell " + std::to_string(k));
    }
    total += w[k];
  }
  if (!(total > 0.0)) throw DomainError("cannot normalise a measure with zero total mass");
  for (auto &v : w) v /= total;
  return DiscreteMeasure(std::move(w));
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
  return normalized(std::vector<double>(n, 1.0));
}

DiscreteMeasure DiscreteMeasure::mix(const DiscreteMeasure &a, const DiscreteMeasure &b, double lambda) {
  if (a.size() != b.size()) throw DomainError("mix: measures live on different meshes");
  std::vector<double> w(a.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = (1.0 - lambda) * a[k] + lambda * b[k];
  return normalized(std::move(w));
}

CellField density_ratio(const DiscreteMeasure &m, const DiscreteMeasure &pi) {
  if (m.size() != pi.size()) throw DomainError("density_ratio: size mismatch");
  CellField r(m.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!(pi[k] > 0.0)) throw DomainError("reference measure vanishes at cell " + std::to_string(k));
    r[k] = m[k] / pi[k];
  }
  return r;
}

// ---------------------------------------------------------------- quadrature

namespace {

constexpr std::array<double, 5> kGaussX = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

double gauss_interval(double a, double b, int pieces, const std::function<double(const Vec2 &)> &fn) {
  const double h = (b - a) / pieces;
  double sum = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double s = 0.0;
    for (std::size_t i = 0; i < kGaussX.size(); ++i) s += kGaussW[i] * fn({mid + 0.5 * h * kGaussX[i], 0.0});
    sum += 0.5 * h * s;
  }
  return sum;
}

// Degree-5 seven-point rule on a triangle (barycentric points, unit-sum weights).
struct TrianglePoint {
  double l1, l2, l3, w;
};

const std::array<TrianglePoint, 7> &radon7() {
  static const std::array<TrianglePoint, 7> rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0, b = (9.0 + 2.0 * s15) / 21.0;
    const double c = (6.0 + s15) / 21.0, d = (9.0 - 2.0 * s15) / 21.0;
    const double wa = (155.0 - s15) / 1200.0, wc = (155.0 + s15) / 1200.0;
    return std::array<TrianglePoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40.0},
                                         {a, a, b, wa},
                                         {a, b, a, wa},
                                         {b, a, a, wa},
                                         {c, c, d, wc},
                                         {c, d, c, wc},
                                         {d, c, c, wc}}};
  }();
  return rule;
}

double triangle_gauss(const Vec2 &A, const Vec2 &B, const Vec2 &C, const std::function<double(const Vec2 &)> &fn) {
  const double area = 0.5 * std::abs(cross(B - A, C - A));
  double s = 0.0;
  for (const auto &q : radon7()) s += q.w * fn(A * q.l1 + B * q.l2 + C * q.l3);
  return area * s;
}

double triangle_subdivided(const Vec2 &A, const Vec2 &B, const Vec2 &C, int s,
                           const std::function<double(const Vec2 &)> &fn) {
  auto P = [&](int i, int j) { return A + (B - A) * (static_cast<double>(i) / s) + (C - A) * (static_cast<double>(j) / s); };
  double sum = 0.0;
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i + j < s; ++i) {
      sum += triangle_gauss(P(i, j), P(i + 1, j), P(i, j + 1), fn);
      if (i + j + 1 < s) sum += triangle_gauss(P(i + 1, j), P(i + 1, j + 1), P(i, j + 1), fn);
    }
  }
  return sum;
}

} // namespace

double integrate_cell(const Mesh &mesh, std::size_t k, const std::function<double(const Vec2 &)> &fn,
                      Quadrature quad) {
  const auto &c = mesh.cell(k);
  if (mesh.dim() == 1) {
    const double a = c.shape.vertices[0].x, b = c.shape.vertices[1].x;
    const int order = quad.order == 0 ? 2 : quad.order;
    if (order == 1) return (b - a) * fn({0.5 * (a + b), 0.0});
    return gauss_interval(a, b, order - 1, fn);
  }
  const auto &v = c.shape.vertices;
  const Vec2 g = polygon_centroid(c.shape);
  const int order = quad.order == 0 ? 1 : quad.order;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 &p = v[i];
    const Vec2 &q = v[(i + 1) % v.size()];
    if (order == 1) {
      const double area = 0.5 * std::abs(cross(p - g, q - g));
      sum += area * fn((g + p + q) * (1.0 / 3.0));
    } else {
      sum += triangle_subdivided(g, p, q, order - 1, fn);
    }
  }
  return sum;
}

double normalizing_constant(const Mesh &mesh, const Potential &V, Quadrature quad) {
  double z = 0.0;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    z += integrate_cell(mesh, k, [&](const Vec2 &x) { return std::exp(-V(x)); }, quad);
  }
  return z;
}

DiscreteMeasure discretize_reference(const Mesh &mesh, const Potential &V, Quadrature quad) {
  std::vector<double> w(mesh.num_cells());
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = integrate_cell(mesh, k, [&](const Vec2 &x) { return std::exp(-V(x)); }, quad);
  }
  return DiscreteMeasure::normalized(std::move(w));
}

FaceWeights face_weights(const Mesh &mesh, const Potential &V, MeanKind kind, Quadrature quad) {
  if (kind == MeanKind::sqrt_log_squared) {
    throw InputError("face weights accept min, max, arithmetic, geometric, harmonic or logarithmic means");
  }
  FaceWeights fw;
  fw.kind = kind;
  const double z = normalizing_constant(mesh, V, quad);
  fw.sigma.resize(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) fw.sigma[k] = std::exp(-V(mesh.cell(k).site)) / z;
  fw.w.reserve(mesh.num_faces());
  fw.S.reserve(mesh.num_faces());
  for (const auto &f : mesh.faces()) {
    const double s = mean(kind, fw.sigma[f.k], fw.sigma[f.l]);
    fw.S.push_back(s);
    fw.w.push_back(f.area / f.distance * s);
  }
  return fw;
}

FvStructure make_structure(const Mesh &mesh, const Potential &V, MeanKind kind, Quadrature quad) {
  return {&mesh, discretize_reference(mesh, V, quad), face_weights(mesh, V, kind, quad), V.name()};
}

// ---------------------------------------------------------------- densities

Density make_density(std::string_view name, const Domain &domain) {
  Vec2 lo, hi;
  if (domain.dim == 1) {
    lo = domain.shape.vertices[0];
    hi = domain.shape.vertices[1];
  } else {
    const auto &v = domain.shape.vertices;
    lo = hi = v[0];
    for (const auto &p : v) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    if (std::abs(polygon_area(domain.shape) - (hi.x - lo.x) * (hi.y - lo.y)) > 1e-12 * domain.volume()) {
      throw InputError("named densities need an interval or an axis-aligned rectangle");
    }
  }
  const double vol = domain.volume();
  const int dim = domain.dim;
  const double lx = hi.x - lo.x, ly = hi.y - lo.y;
  if (name == "uniform") {
    return {"uniform", [vol](const Vec2 &) { return 1.0 / vol; }};
  }
  if (name == "cosine") {
    // 1 + cos(pi s)/2 (times cos(pi t) in two dimensions) has mean one.
    return {"cosine", [=](const Vec2 &x) {
              const double s = (x.x - lo.x) / lx;
              double c = std::cos(std::numbers::pi * s);
              if (dim == 2) c *= std::cos(std::numbers::pi * (x.y - lo.y) / ly);
              return (1.0 + 0.5 * c) / vol;
            }};
  }
  if (name == "ramp") {
    // 2 s in the first coordinate.
    return {"ramp", [=](const Vec2 &x) { return 2.0 * (x.x - lo.x) / lx / vol; }};
  }
  throw InputError("unknown density '" + std::string(name) + "'");
}

DiscreteMeasure project_measure(const Mesh &mesh, const Density &rho, Quadrature quad, double mass_tol) {
  std::vector<double> w(mesh.num_cells());
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = integrate_cell(mesh, k, rho.fn, quad);
    if (w[k] < 0.0) {
      throw DomainError("project_measure: negative cell integral at cell " + std::to_string(k));
    }
    total += w[k];
  }
  if (std::abs(total - 1.0) > mass_tol) {
    throw DomainError("project_measure: density integrates to " + std::to_string(total));
  }
  return DiscreteMeasure::normalized(std::move(w));
}

CellField project_signed(const Mesh &mesh, const std::function<double(const Vec2 &)> &eta, Quadrature quad) {
  CellField e(mesh.num_cells());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = integrate_cell(mesh, k, eta, quad);
  return e;
}

CellField embed_measure(const Mesh &mesh, const DiscreteMeasure &m) {
  if (m.size() != mesh.num_cells()) throw DomainError("embed_measure: size mismatch");
  CellField rho(m.size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = m[k] / mesh.cell(k).volume;
  return rho;
}

CellField project_function(const Mesh &mesh, const std::function<double(const Vec2 &)> &phi) {
  CellField f(mesh.num_cells());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = phi(mesh.cell(k).site);
  return f;
}

int locate_cell(const Mesh &mesh, const Vec2 &p) {
  if (mesh.dim() == 1) {
    const auto &cells = mesh.cells();
    // Cells are ordered along the axis for interval meshes.
    auto it = std::lower_bound(cells.begin(), cells.end(), p.x,
                               [](const Cell &c, double x) { return c.shape.vertices[1].x < x; });
    if (it == cells.end() || p.x < it->shape.vertices[0].x) return -1;
    return static_cast<int>(it - cells.begin());
  }
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    if (contains(mesh.cell(k).shape, p, 1e-14 * mesh.size())) return static_cast<int>(k);
  }
  return -1;
}

double PiecewiseConstant::operator()(const Vec2 &p) const {
  const int k = locate_cell(*mesh_, p);
  if (k < 0) throw DomainError("point lies outside the mesh");
  return values_[k];
}

PiecewiseConstant embed_function(const Mesh &mesh, CellField f) {
  if (f.size() != mesh.num_cells()) throw DomainError("embed_function: size mismatch");
  return PiecewiseConstant(mesh, std::move(f));
}

} // namespace gradflow
