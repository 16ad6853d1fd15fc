#include "gradflow/wasserstein.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace gradflow {

double PiecewiseDensity::mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * (breakpoints[i + 1] - breakpoints[i]);
  return s;
}

namespace {

struct Quantile {
  std::vector<double> x0;   // left end of each positive-mass cell
  std::vector<double> rho;  // density on it
  std::vector<double> cdf;  // cumulative mass at its left end; back() = 1
};

Quantile make_quantile(const PiecewiseDensity &p, const char *name) {
  if (p.breakpoints.size() != p.values.size() + 1 || p.values.empty()) {
    throw DomainError(std::string("wasserstein_1d: malformed density ") + name);
  }
  const double total = p.mass();
  if (std::abs(total - 1.0) > 1e-10) {
    throw DomainError(std::string("wasserstein_1d: density ") + name + " has mass " + std::to_string(total));
  }
  Quantile q;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    const double width = p.breakpoints[i + 1] - p.breakpoints[i];
    if (p.values[i] < 0.0 || !(width > 0.0)) {
      throw DomainError(std::string("wasserstein_1d: negative value or empty cell in ") + name);
    }
    const double mass = p.values[i] * width / total;
    if (mass == 0.0) continue;
    q.x0.push_back(p.breakpoints[i]);
    q.rho.push_back(p.values[i] / total);
    q.cdf.push_back(acc);
    acc += mass;
  }
  q.cdf.push_back(1.0);
  return q;
}

} // namespace

double wasserstein_1d(const PiecewiseDensity &p, const PiecewiseDensity &q) {
  const Quantile a = make_quantile(p, "p");
  const Quantile b = make_quantile(q, "q");
  std::size_t i = 0, j = 0;
  double u = 0.0, sum = 0.0;
  const std::size_t na = a.rho.size(), nb = b.rho.size();
  while (i < na && j < nb) {
    const double ua = i + 1 < na ? a.cdf[i + 1] : 1.0;
    const double ub = j + 1 < nb ? b.cdf[j + 1] : 1.0;
    const double next = std::min(ua, ub);
    if (next > u) {
      // Both quantiles are affine on [u, next].
      const double d0 = (a.x0[i] + (u - a.cdf[i]) / a.rho[i]) - (b.x0[j] + (u - b.cdf[j]) / b.rho[j]);
      const double d1 = (a.x0[i] + (next - a.cdf[i]) / a.rho[i]) - (b.x0[j] + (next - b.cdf[j]) / b.rho[j]);
      sum += (d0 * d0 + d0 * d1 + d1 * d1) / 3.0 * (next - u);
      u = next;
    }
    if (ua <= next) ++i;
    if (ub <= next) ++j;
  }
  return std::sqrt(std::max(sum, 0.0));
}

PiecewiseDensity piecewise_density(const Mesh &mesh, const DiscreteMeasure &m) {
  if (mesh.dim() != 1) throw DomainError("piecewise_density: interval meshes only");
  if (m.size() != mesh.num_cells()) throw DomainError("piecewise_density: size mismatch");
  const std::size_t n = mesh.num_cells();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return mesh.cell(x).site.x < mesh.cell(y).site.x; });
  PiecewiseDensity p;
  p.breakpoints.push_back(mesh.cell(order[0]).shape.vertices[0].x);
  for (std::size_t k : order) {
    p.breakpoints.push_back(mesh.cell(k).shape.vertices[1].x);
    p.values.push_back(m[k] / mesh.cell(k).volume);
  }
  return p;
}

PiecewiseDensity average_density(const std::function<double(double)> &rho, double a, double b, int n) {
  static constexpr std::array<double, 3> gx = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  PiecewiseDensity p;
  p.breakpoints.resize(n + 1);
  p.values.resize(n);
  const double h = (b - a) / n;
  for (int i = 0; i <= n; ++i) p.breakpoints[i] = i == n ? b : a + i * h;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mid = 0.5 * (p.breakpoints[i] + p.breakpoints[i + 1]);
    const double w = p.breakpoints[i + 1] - p.breakpoints[i];
    double s = 0.0;
    for (int g = 0; g < 3; ++g) s += gw[g] * rho(mid + 0.5 * w * gx[g]);
    p.values[i] = std::max(0.5 * s, 0.0);
    total += p.values[i] * w;
  }
  for (auto &v : p.values) v /= total;
  return p;
}

} // namespace gradflow
