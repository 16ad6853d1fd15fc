#pragma once

// Planar geometry primitives used by the mesh generators and diagnostics.
// One-dimensional meshes reuse the same point type with y == 0.

#include <cmath>
#include <span>
#include <vector>

namespace gradflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
};

constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr bool operator==(const Vec2 &a, const Vec2 &b) {
  return a.x == b.x && a.y == b.y;
}

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }
inline double distance(const Vec2 &a, const Vec2 &b) { return norm(a - b); }

/// Oriented line {p : dot(normal, p) <= offset}.
struct HalfPlane {
  Vec2 normal;
  double offset = 0.0;
  int label = -1;

  double signed_distance(const Vec2 &p) const { return dot(normal, p) - offset; }
};

/// Convex polygon stored counter-clockwise. `edge_labels[i]` tags the edge
/// from vertex i to vertex i+1 (neighbour index, or negative for the domain).
struct Polygon {
  std::vector<Vec2> vertices;
  std::vector<int> edge_labels;

  std::size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.size() < 3; }
};

double signed_area(std::span<const Vec2> vertices);
double polygon_area(const Polygon &poly);
Vec2 polygon_centroid(const Polygon &poly);
double polygon_diameter(const Polygon &poly);

/// Distance from an interior point to the boundary of a convex polygon.
double inradius_at(const Polygon &poly, const Vec2 &p);

/// Sutherland-Hodgman clip of a convex polygon against one half-plane.
/// Vertices closer than `merge_tol` are merged.
Polygon clip(const Polygon &poly, const HalfPlane &hp, double merge_tol = 1e-12);

Polygon intersect(const Polygon &a, const Polygon &b, double merge_tol = 1e-12);

/// Axis-aligned rectangle as a labelled polygon (labels -1..-4).
Polygon make_box(Vec2 lo, Vec2 hi);

/// Labelled polygon from raw vertices; reorders to CCW. Labels are -1-i.
Polygon make_polygon(std::span<const Vec2> vertices);

bool is_convex(std::span<const Vec2> vertices);
bool contains(const Polygon &poly, const Vec2 &p, double tol = 0.0);

/// Half-planes whose intersection is the polygon (one per edge).
std::vector<HalfPlane> edge_half_planes(const Polygon &poly);

Polygon translate(const Polygon &poly, const Vec2 &shift);

/// Inward offset of a convex polygon by `delta` (empty if it vanishes).
Polygon shrink(const Polygon &poly, double delta);

} // namespace gradflow
