#include "gradflow/geometry.hpp"

#include <algorithm>
#include <limits>

namespace gradflow {

double signed_area(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  if (n < 3) return 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += cross(v[i], v[(i + 1) % n]);
  }
  return 0.5 * a;
}

double polygon_area(const Polygon &poly) { return std::abs(signed_area(poly.vertices)); }

Vec2 polygon_centroid(const Polygon &poly) {
  const auto &v = poly.vertices;
  const std::size_t n = v.size();
  if (n == 0) return {};
  // Shift to the first vertex to limit cancellation on small cells.
  const Vec2 o = v[0];
  double a = 0.0;
  Vec2 c;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = v[i] - o;
    const Vec2 q = v[(i + 1) % n] - o;
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  if (std::abs(a) < std::numeric_limits<double>::min()) {
    Vec2 mean;
    for (const auto &p : v) mean += p;
    return mean * (1.0 / static_cast<double>(n));
  }
  return o + c * (1.0 / (3.0 * a));
}

double polygon_diameter(const Polygon &poly) {
  double d = 0.0;
  const auto &v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, distance(v[i], v[j]));
  }
  return d;
}

double inradius_at(const Polygon &poly, const Vec2 &p) {
  double r = std::numeric_limits<double>::infinity();
  const auto &v = poly.vertices;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = v[(i + 1) % n] - v[i];
    const double len = norm(e);
    if (len == 0.0) continue;
    // Positive inside for CCW orientation.
    r = std::min(r, cross(e, p - v[i]) / len);
  }
  return std::max(r, 0.0);
}

namespace {

void push_merged(Polygon &out, const Vec2 &p, int label, double tol) {
  if (!out.vertices.empty() && distance(out.vertices.back(), p) <= tol) {
    // The degenerate edge vanishes; the surviving vertex takes the outgoing label.
    out.edge_labels.back() = label;
    return;
  }
  out.vertices.push_back(p);
  out.edge_labels.push_back(label);
}

} // namespace

Polygon clip(const Polygon &poly, const HalfPlane &hp, double merge_tol) {
  Polygon out;
  const std::size_t n = poly.vertices.size();
  if (n == 0) return out;
  out.vertices.reserve(n + 1);
  out.edge_labels.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 &p = poly.vertices[i];
    const Vec2 &q = poly.vertices[(i + 1) % n];
    const int label = poly.edge_labels[i];
    const double sp = hp.signed_distance(p);
    const double sq = hp.signed_distance(q);
    const bool p_in = sp <= 0.0;
    const bool q_in = sq <= 0.0;
    if (p_in) {
      push_merged(out, p, label, merge_tol);
      if (!q_in) {
        const double t = sp / (sp - sq);
        push_merged(out, p + (q - p) * t, hp.label, merge_tol);
      }
    } else if (q_in) {
      const double t = sp / (sp - sq);
      push_merged(out, p + (q - p) * t, label, merge_tol);
    }
  }
  // Close the ring: first and last vertex may coincide.
  while (out.vertices.size() > 1 &&
         distance(out.vertices.front(), out.vertices.back()) <= merge_tol) {
    out.vertices.pop_back();
    out.edge_labels.pop_back();
  }
  if (out.vertices.size() < 3) return {};
  return out;
}

Polygon intersect(const Polygon &a, const Polygon &b, double merge_tol) {
  Polygon out = a;
  for (const auto &hp : edge_half_planes(b)) {
    out = clip(out, hp, merge_tol);
    if (out.empty()) return {};
  }
  return out;
}

Polygon make_box(Vec2 lo, Vec2 hi) {
  Polygon p;
  p.vertices = {{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};
  p.edge_labels = {-1, -2, -3, -4};
  return p;
}

Polygon make_polygon(std::span<const Vec2> vertices) {
  Polygon p;
  p.vertices.assign(vertices.begin(), vertices.end());
  if (signed_area(p.vertices) < 0.0) std::reverse(p.vertices.begin(), p.vertices.end());
  p.edge_labels.resize(p.vertices.size());
  for (std::size_t i = 0; i < p.vertices.size(); ++i) p.edge_labels[i] = -1 - static_cast<int>(i);
  return p;
}

bool is_convex(std::span<const Vec2> v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = cross(v[(i + 1) % n] - v[i], v[(i + 2) % n] - v[(i + 1) % n]);
    if (c == 0.0) continue;
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    else if (s != sign) return false;
  }
  return sign != 0;
}

bool contains(const Polygon &poly, const Vec2 &p, double tol) {
  for (const auto &hp : edge_half_planes(poly)) {
    if (hp.signed_distance(p) > tol) return false;
  }
  return !poly.vertices.empty();
}

std::vector<HalfPlane> edge_half_planes(const Polygon &poly) {
  std::vector<HalfPlane> hps;
  const auto &v = poly.vertices;
  const std::size_t n = v.size();
  hps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = v[(i + 1) % n] - v[i];
    const double len = norm(e);
    if (len == 0.0) continue;
    // Outward normal of a CCW edge.
    const Vec2 nrm{e.y / len, -e.x / len};
    hps.push_back({nrm, dot(nrm, v[i]), poly.edge_labels.empty() ? -1 : poly.edge_labels[i]});
  }
  return hps;
}

Polygon translate(const Polygon &poly, const Vec2 &shift) {
  Polygon out = poly;
  for (auto &p : out.vertices) p += shift;
  return out;
}

Polygon shrink(const Polygon &poly, double delta) {
  Polygon out = poly;
  for (auto hp : edge_half_planes(poly)) {
    hp.offset -= delta;
    out = clip(out, hp, 0.0);
    if (out.empty()) return {};
  }
  return out;
}

} // namespace gradflow
