#include "gradflow/functionals.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace gradflow {

namespace {

void check_sizes(const FvStructure &s, std::size_t n, const char *what) {
  if (s.mesh == nullptr || s.mesh->num_cells() != n) {
    throw DomainError(std::string(what) + ": field size does not match the mesh");
  }
}

} // namespace

double entropy(const DiscreteMeasure &m, const DiscreteMeasure &pi) {
  if (m.size() != pi.size()) throw DomainError("entropy: size mismatch");
  double h = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!(pi[k] > 0.0)) throw DomainError("entropy: reference measure vanishes at cell " + std::to_string(k));
    if (m[k] > 0.0) h += m[k] * std::log(m[k] / pi[k]);
  }
  // Jensen gives h >= 0; only round-off can produce a negative value.
  return std::max(h, 0.0);
}

double action_with_density(const FvStructure &s, std::span<const double> r, std::span<const double> f,
                           MeanKind kernel) {
  check_sizes(s, r.size(), "action");
  check_sizes(s, f.size(), "action");
  const auto &faces = s.mesh->faces();
  double sum = 0.0;
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const double df = f[faces[e].k] - f[faces[e].l];
    if (df == 0.0) continue;
    sum += df * df * mean(kernel, r[faces[e].k], r[faces[e].l]) * s.weights.w[e];
  }
  return 0.5 * sum;
}

double action(const FvStructure &s, const DiscreteMeasure &m, std::span<const double> f, MeanKind kernel) {
  const CellField r = density_ratio(m, s.pi);
  return action_with_density(s, r, f, kernel);
}

ExtendedReal fisher(const FvStructure &s, const DiscreteMeasure &m) {
  const CellField r = density_ratio(m, s.pi);
  check_sizes(s, r.size(), "fisher");
  const auto &faces = s.mesh->faces();
  double sum = 0.0;
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const double a = r[faces[e].k], b = r[faces[e].l];
    if (a == b) continue;
    if (a == 0.0 || b == 0.0) return ExtendedReal::infinity();
    const double dl = std::log(a) - std::log(b);
    // 2 * (1/2) (D log r)^2 theta_log(r_K, r_L) w_KL
    sum += dl * dl * log_mean(a, b) * s.weights.w[e];
  }
  return ExtendedReal(sum);
}

FisherDirichletGap fisher_sqrt_gap(const FvStructure &s, const DiscreteMeasure &m) {
  const CellField r = density_ratio(m, s.pi);
  check_sizes(s, r.size(), "fisher_sqrt_gap");
  double k_lower = std::numeric_limits<double>::infinity();
  CellField root(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!(r[k] > 0.0)) throw DomainError("fisher_sqrt_gap: m must be positive on every cell");
    k_lower = std::min(k_lower, r[k]);
    root[k] = std::sqrt(r[k]);
  }
  double eps = 0.0;
  for (const auto &f : s.mesh->faces()) eps = std::max(eps, std::abs(r[f.k] - r[f.l]));

  FisherDirichletGap out;
  out.half_fisher = 0.5 * fisher(s, m).value();
  const CellField ones(r.size(), 1.0);
  const double e_sqrt = action_with_density(s, ones, root, MeanKind::logarithmic);
  out.dirichlet_sqrt = 4.0 * e_sqrt;
  out.gap = std::abs(out.half_fisher - out.dirichlet_sqrt);
  out.bound = 4.0 * eps / k_lower * e_sqrt;
  return out;
}

std::vector<int> restrict_cells(const Mesh &mesh, const std::optional<Box> &region) {
  if (!region) {
    std::vector<int> all(mesh.num_cells());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
    return all;
  }
  return cells_meeting_open_box(mesh, region->lo, region->hi);
}

double dirichlet_energy(const Mesh &mesh, const DiscreteMeasure &m, std::span<const double> f,
                        MeanKind kernel, const std::optional<Box> &region) {
  if (m.size() != mesh.num_cells() || f.size() != mesh.num_cells()) {
    throw DomainError("dirichlet_energy: field size does not match the mesh");
  }
  std::vector<char> selected(mesh.num_cells(), region ? 0 : 1);
  if (region) {
    for (int k : restrict_cells(mesh, region)) selected[k] = 1;
  }
  double sum = 0.0;
  for (const auto &face : mesh.faces()) {
    if (!selected[face.k] || !selected[face.l]) continue;
    const double df = f[face.k] - f[face.l];
    if (df == 0.0) continue;
    const double u = mean(kernel, m[face.k] / mesh.cell(face.k).volume, m[face.l] / mesh.cell(face.l).volume);
    sum += df * df * u * face.area / face.distance;
  }
  // Each face stands for two ordered pairs: 1/4 * 2 = 1/2.
  return 0.5 * sum;
}

// ---------------------------------------------------------------- continuum

Vec2 SmoothFunction::grad(const Vec2 &x, int dim) const {
  if (gradient) return gradient(x);
  constexpr double h = 1e-6;
  Vec2 g;
  g.x = (value({x.x + h, x.y}) - value({x.x - h, x.y})) / (2.0 * h);
  if (dim == 2) g.y = (value({x.x, x.y + h}) - value({x.x, x.y - h})) / (2.0 * h);
  return g;
}

namespace {

struct BoundingBox {
  Vec2 lo, hi;
};

BoundingBox bounding_box(const Domain &domain) {
  const auto &v = domain.shape.vertices;
  BoundingBox b{v[0], v[0]};
  for (const auto &p : v) {
    b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y)};
    b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y)};
  }
  return b;
}

} // namespace

SmoothFunction make_function(std::string_view name, const Domain &domain) {
  const auto box = bounding_box(domain);
  const double lx = box.hi.x - box.lo.x;
  const double ly = domain.dim == 2 ? box.hi.y - box.lo.y : 1.0;
  const Vec2 lo = box.lo;
  constexpr double pi = std::numbers::pi;
  if (name == "const") {
    return {"const", [](const Vec2 &) { return 1.0; }, [](const Vec2 &) { return Vec2{}; }};
  }
  if (name == "x") {
    return {"x", [](const Vec2 &x) { return x.x; }, [](const Vec2 &) { return Vec2{1.0, 0.0}; }};
  }
  if (name == "y") {
    return {"y", [](const Vec2 &x) { return x.y; }, [](const Vec2 &) { return Vec2{0.0, 1.0}; }};
  }
  if (name == "cos") {
    return {"cos", [=](const Vec2 &x) { return std::cos(pi * (x.x - lo.x) / lx); },
            [=](const Vec2 &x) { return Vec2{-pi / lx * std::sin(pi * (x.x - lo.x) / lx), 0.0}; }};
  }
  if (name == "coscos") {
    return {"coscos",
            [=](const Vec2 &x) { return std::cos(pi * (x.x - lo.x) / lx) * std::cos(pi * (x.y - lo.y) / ly); },
            [=](const Vec2 &x) {
              const double cx = std::cos(pi * (x.x - lo.x) / lx), sx = std::sin(pi * (x.x - lo.x) / lx);
              const double cy = std::cos(pi * (x.y - lo.y) / ly), sy = std::sin(pi * (x.y - lo.y) / ly);
              return Vec2{-pi / lx * sx * cy, -pi / ly * cx * sy};
            }};
  }
  throw InputError("unknown function '" + std::string(name) + "'");
}

double integrate_domain(const Domain &domain, const std::function<double(const Vec2 &)> &fn, int panels) {
  static constexpr std::array<double, 3> gx = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto box = bounding_box(domain);
  const double hx = (box.hi.x - box.lo.x) / panels;
  if (domain.dim == 1) {
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
      const double mid = box.lo.x + (i + 0.5) * hx;
      double s = 0.0;
      for (std::size_t a = 0; a < 3; ++a) s += gw[a] * fn({mid + 0.5 * hx * gx[a], 0.0});
      sum += 0.5 * hx * s;
    }
    return sum;
  }
  const double hy = (box.hi.y - box.lo.y) / panels;
  const bool rectangular =
      std::abs(polygon_area(domain.shape) - (box.hi.x - box.lo.x) * (box.hi.y - box.lo.y)) <=
      1e-12 * domain.volume();
  double sum = 0.0;
  for (int j = 0; j < panels; ++j) {
    const double my = box.lo.y + (j + 0.5) * hy;
    double row = 0.0;
    for (int i = 0; i < panels; ++i) {
      const double mx = box.lo.x + (i + 0.5) * hx;
      double s = 0.0;
      for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
          const Vec2 p{mx + 0.5 * hx * gx[a], my + 0.5 * hy * gx[b]};
          if (!rectangular && !domain.contains(p)) continue;
          s += gw[a] * gw[b] * fn(p);
        }
      }
      row += s;
    }
    sum += 0.25 * hx * hy * row;
  }
  return sum;
}

ContinuumReference make_continuum_reference(const Domain &domain, const Potential &V, int panels) {
  ContinuumReference ref{V, 1.0};
  ref.z = integrate_domain(domain, [&](const Vec2 &x) { return std::exp(-V(x)); }, panels);
  return ref;
}

double continuous_dirichlet(const SmoothFunction &phi, const std::function<double(const Vec2 &)> &density,
                            const Domain &domain, int panels) {
  const int dim = domain.dim;
  return 0.5 * integrate_domain(
                   domain,
                   [&](const Vec2 &x) {
                     const Vec2 g = phi.grad(x, dim);
                     return dot(g, g) * density(x);
                   },
                   panels);
}

double continuous_entropy(const std::function<double(const Vec2 &)> &rho, const ContinuumReference &ref,
                          const Domain &domain, int panels) {
  return integrate_domain(
      domain,
      [&](const Vec2 &x) {
        const double p = rho(x);
        return p > 0.0 ? p * std::log(p / ref.sigma(x)) : 0.0;
      },
      panels);
}

double continuous_fisher(const std::function<double(const Vec2 &)> &rho, const ContinuumReference &ref,
                         const Domain &domain, int panels) {
  const int dim = domain.dim;
  auto g = [&](const Vec2 &x) { return rho(x) / ref.sigma(x); };
  return integrate_domain(
      domain,
      [&](const Vec2 &x) {
        constexpr double h = 1e-6;
        const double gx = (g({x.x + h, x.y}) - g({x.x - h, x.y})) / (2.0 * h);
        const double gy = dim == 2 ? (g({x.x, x.y + h}) - g({x.x, x.y - h})) / (2.0 * h) : 0.0;
        const double v = g(x);
        // 4 |grad sqrt g|^2 = |grad g|^2 / g
        return v > 0.0 ? (gx * gx + gy * gy) / v * ref.sigma(x) : 0.0;
      },
      panels);
}

} // namespace gradflow
