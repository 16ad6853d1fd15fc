#pragma once

// Admissible finite-volume meshes on bounded convex domains, d = 1 or 2.
//
// A mesh is a partition of the domain into convex cells, each carrying a site
// x_K, and a list of faces between neighbouring cells. The segment between the
// two sites of a face is orthogonal to the face. Meshes are immutable after
// construction and can be shared freely between readers.

#include "gradflow/geometry.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gradflow {

struct Cell {
  Vec2 site;
  double volume = 0.0;
  /// d=2: convex polygon (CCW). d=1: the two interval endpoints (y = 0).
  Polygon shape;
};

struct Face {
  int k = 0;
  int l = 0;
  /// H^{d-1} measure of the interface; 1 in one dimension.
  double area = 0.0;
  /// |x_K - x_L|.
  double distance = 0.0;
  /// (x_K - x_L) / |x_K - x_L|.
  Vec2 tau;
  /// Interface endpoints (the single interface point twice when d=1).
  Vec2 a;
  Vec2 b;
};

struct Domain {
  int dim = 1;
  /// d=1: {lo, hi} on the x-axis. d=2: convex polygon.
  Polygon shape;

  double volume() const;
  double diameter() const;
  bool contains(const Vec2 &p, double tol = 0.0) const;
};

class Mesh {
public:
  /// Validates every structural invariant; throws MeshError on violation.
  Mesh(int dim, Domain domain, std::vector<Cell> cells, std::vector<Face> faces);

  int dim() const { return dim_; }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  const std::vector<Cell> &cells() const { return cells_; }
  const Cell &cell(std::size_t k) const { return cells_[k]; }
  const std::vector<Face> &faces() const { return faces_; }
  const Face &face(std::size_t f) const { return faces_[f]; }
  const Domain &domain() const { return domain_; }

  /// Indices of the faces adjacent to cell k, ascending.
  std::span<const int> cell_faces(std::size_t k) const;
  /// Neighbour of cell k across face f.
  int neighbour(std::size_t k, std::size_t f) const;

  /// [T]: the largest cell diameter.
  double size() const { return size_; }
  double cell_diameter(std::size_t k) const;

  std::vector<Vec2> sites() const;
  std::vector<double> volumes() const;

  /// True when the neighbour graph is connected.
  bool connected() const;

private:
  int dim_;
  Domain domain_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
  std::vector<int> adjacency_offsets_;
  std::vector<int> adjacency_;
  double size_ = 0.0;
};

/// Interval mesh from strictly increasing breakpoints; sites at midpoints.
Mesh build_interval_mesh(std::span<const double> breakpoints);
/// n cells on [a, b] with breakpoint i given by grading(i), i = 0..n.
Mesh build_interval_mesh(int n, const std::function<double(int)> &grading, double a = 0.0,
                         double b = 1.0);
Mesh build_uniform_interval_mesh(int n, double a = 0.0, double b = 1.0);

/// nx-by-ny rectangle grid with sites at the cell centres.
Mesh build_cartesian_mesh(int nx, int ny, Vec2 lo = {0.0, 0.0}, Vec2 hi = {1.0, 1.0});

/// Voronoi cells of `sites` clipped to the convex `domain`.
Mesh build_voronoi_mesh(std::span<const Vec2> sites, const Polygon &domain);

struct RegularityReport {
  double zeta_inner = 0.0;
  double zeta_area = 0.0;
  double mesh_size = 0.0;

  double zeta() const { return zeta_inner < zeta_area ? zeta_inner : zeta_area; }
};

RegularityReport regularity_report(const Mesh &mesh);

/// Non-empty message when the mesh fails the given zeta threshold.
std::string regularity_warning(const RegularityReport &report, double threshold);

/// Max |tau . t| over faces (d=2); 0 in one dimension.
double orthogonality_defect(const Mesh &mesh);

/// Cells whose closure meets the open box (lo, hi); in d=1 only x is used.
std::vector<int> cells_meeting_open_box(const Mesh &mesh, Vec2 lo, Vec2 hi);

/// Same rule, with the axis-aligned box given as a cube of side `side` at `center`.
std::vector<int> cells_meeting_open_cube(const Mesh &mesh, Vec2 center, double side);

/// Volume of (cell k) intersected with the translated cell l + shift and a convex window.
double overlap_volume(const Mesh &mesh, std::size_t k, std::size_t l, Vec2 shift,
                      const Polygon &window);

} // namespace gradflow
