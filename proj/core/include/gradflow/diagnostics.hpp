#pragma once

// Measurable forms of the structural conditions: density bounds, neighbour
// oscillation, the pointwise cube profile, good paths between cells, the
// L2-Holder modulus of piecewise-constant fields, and observed regularity of
// discrete flows.

#include "gradflow/dynamics.hpp"
#include "gradflow/functionals.hpp"
#include "gradflow/io.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gradflow {

struct PcRow {
  double eps = 0.0;
  Vec2 center;
  double sup = 0.0;
  double inf = 0.0;
  /// mu_N(Q) / m_N(Q) with both measures embedded piecewise constant.
  double mass_ratio = 0.0;
  std::size_t cells = 0;
};

struct ConditionReport {
  double k_lower = 0.0;
  double k_upper = 0.0;
  double neighbour_osc = 0.0;
  std::vector<PcRow> pc_profile;

  CsvTable bounds_table() const;
  CsvTable pc_table() const;
};

/// Cubes Q_eps(x0) are open and axis aligned (intervals in one dimension).
ConditionReport condition_report(const Mesh &mesh, const DiscreteMeasure &m, const DiscreteMeasure &pi,
                                 std::span<const Vec2> cube_centers, std::span<const double> eps_list);

struct GoodPath {
  std::vector<int> cells;
  /// sum of d over consecutive cells.
  double length = 0.0;
  /// Number of deterministic target perturbations used.
  int perturbations = 0;
  /// Set when the segment walk failed and a breadth-first path was used.
  bool fallback = false;

  std::size_t steps() const { return cells.empty() ? 0 : cells.size() - 1; }
};

/// Segment walk from x_K to x_L across face segments. Throws DomainError on
/// a disconnected mesh.
GoodPath good_path(const Mesh &mesh, int k, int l);

/// True when the path starts at k, ends at l and every step crosses a face.
bool is_valid_path(const Mesh &mesh, const GoodPath &path, int k, int l);

struct PathConstants {
  double c_count = 0.0;
  double c_length = 0.0;
  std::size_t pairs = 0;
  std::size_t invalid = 0;
  std::size_t fallbacks = 0;
};

/// All pairs up to 200 cells, otherwise `samples` random pairs drawn with `seed`.
PathConstants path_constants(const Mesh &mesh, std::size_t samples = 10000, std::uint64_t seed = 42);

struct HolderModulus {
  /// int_{A_|h|} (phi(x - h) - phi(x))^2 dx, phi = Q_T f.
  double value = 0.0;
  /// |h| (|h| v [T]) / k_lower * F_T(f, A).
  double bound = 0.0;
  /// value / bound; 0 when both vanish.
  double ratio = 0.0;
};

/// A_delta = {x in A : dist(x, boundary) > delta} with delta = |h| when
/// `trim_boundary`; otherwise the integral runs over A.
HolderModulus l2_holder_modulus(const Mesh &mesh, std::span<const double> f, Vec2 h, const Box &region,
                                const DiscreteMeasure &m, const DiscreteMeasure &pi,
                                MeanKind kernel = MeanKind::logarithmic, bool trim_boundary = true);

struct RegularityRow {
  double t = 0.0;
  double sup_r = 0.0;
  double holder_quarter = 0.0;
  double holder_half = 0.0;
  double holder_one = 0.0;
};

/// Rows for the nodes with t > 0; quotients run over all cell pairs.
std::vector<RegularityRow> flow_regularity_observed(const Mesh &mesh, const DiscreteMeasure &pi,
                                                    const Trajectory &traj);
CsvTable regularity_table(const std::vector<RegularityRow> &rows);

} // namespace gradflow
