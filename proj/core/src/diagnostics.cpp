#include "gradflow/diagnostics.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace gradflow {

namespace {

/// |K cap box| for an axis-aligned box (x-range only in one dimension).
double cell_box_overlap(const Mesh &mesh, std::size_t k, Vec2 lo, Vec2 hi) {
  const auto &shape = mesh.cell(k).shape;
  if (mesh.dim() == 1) {
    return std::max(0.0, std::min(shape.vertices[1].x, hi.x) - std::max(shape.vertices[0].x, lo.x));
  }
  const Polygon piece = intersect(shape, make_box(lo, hi), 0.0);
  return piece.empty() ? 0.0 : polygon_area(piece);
}

} // namespace

ConditionReport condition_report(const Mesh &mesh, const DiscreteMeasure &m, const DiscreteMeasure &pi,
                                 std::span<const Vec2> cube_centers, std::span<const double> eps_list) {
  const CellField r = density_ratio(m, pi);
  if (r.size() != mesh.num_cells()) throw DomainError("condition_report: size mismatch");
  ConditionReport rep;
  rep.k_lower = *std::min_element(r.begin(), r.end());
  rep.k_upper = *std::max_element(r.begin(), r.end());
  for (const auto &f : mesh.faces()) rep.neighbour_osc = std::max(rep.neighbour_osc, std::abs(r[f.k] - r[f.l]));

  for (double eps : eps_list) {
    for (const Vec2 &c : cube_centers) {
      PcRow row;
      row.eps = eps;
      row.center = c;
      const auto cells = cells_meeting_open_cube(mesh, c, eps);
      row.cells = cells.size();
      if (cells.empty()) {
        row.sup = row.inf = row.mass_ratio = std::numeric_limits<double>::quiet_NaN();
        rep.pc_profile.push_back(row);
        continue;
      }
      row.sup = -std::numeric_limits<double>::infinity();
      row.inf = std::numeric_limits<double>::infinity();
      const Vec2 lo{c.x - 0.5 * eps, c.y - 0.5 * eps}, hi{c.x + 0.5 * eps, c.y + 0.5 * eps};
      double mu = 0.0, ref = 0.0;
      for (int k : cells) {
        row.sup = std::max(row.sup, r[k]);
        row.inf = std::min(row.inf, r[k]);
        const double frac = cell_box_overlap(mesh, k, lo, hi) / mesh.cell(k).volume;
        mu += m[k] * frac;
        ref += pi[k] * frac;
      }
      row.mass_ratio = ref > 0.0 ? mu / ref : std::numeric_limits<double>::quiet_NaN();
      rep.pc_profile.push_back(row);
    }
  }
  return rep;
}

CsvTable ConditionReport::bounds_table() const {
  CsvTable t("conditions", {"condition", "value"});
  t.add_row({"lb_k_lower", k_lower});
  t.add_row({"ub_k_upper", k_upper});
  t.add_row({"nc_neighbour_osc", neighbour_osc});
  return t;
}

CsvTable ConditionReport::pc_table() const {
  CsvTable t("pc_profile", {"eps", "x0", "y0", "cells", "sup", "inf", "mass_ratio"});
  for (const auto &r : pc_profile) t.add_row({r.eps, r.center.x, r.center.y, r.cells, r.sup, r.inf, r.mass_ratio});
  return t;
}

// ---------------------------------------------------------------- good paths

namespace {

enum class WalkStatus { ok, degenerate, lost };

WalkStatus walk_1d(const Mesh &mesh, int k, int l, std::vector<int> &cells) {
  const double target = mesh.cell(l).site.x;
  int cur = k;
  cells.assign(1, k);
  while (cur != l) {
    const bool right = target > mesh.cell(cur).site.x;
    int next = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int f : mesh.cell_faces(cur)) {
      const double p = mesh.face(f).a.x;
      const double off = p - mesh.cell(cur).site.x;
      if ((right && off > 0.0) || (!right && off < 0.0)) {
        if (std::abs(off) < best) {
          best = std::abs(off);
          next = mesh.neighbour(cur, f);
        }
      }
    }
    if (next < 0 || cells.size() > mesh.num_cells()) return WalkStatus::lost;
    cur = next;
    cells.push_back(cur);
  }
  return WalkStatus::ok;
}

WalkStatus walk_2d(const Mesh &mesh, int k, int l, Vec2 target, bool accept_ties, std::vector<int> &cells) {
  const Vec2 start = mesh.cell(k).site;
  const Vec2 dir = target - start;
  constexpr double kVertexTol = 1e-9;
  constexpr double kParamTol = 1e-12;
  int cur = k;
  double s_cur = 0.0;
  cells.assign(1, k);
  while (cur != l) {
    double best_s = std::numeric_limits<double>::infinity();
    int best_nb = -1;
    bool best_vertex = false;
    for (int f : mesh.cell_faces(cur)) {
      const Face &face = mesh.face(f);
      const Vec2 e = face.b - face.a;
      const double denom = cross(dir, e);
      if (std::abs(denom) <= 1e-15 * norm(dir) * norm(e)) continue;
      const Vec2 w = face.a - start;
      const double s = cross(w, e) / denom;
      const double u = cross(w, dir) / denom;
      if (s <= s_cur + kParamTol || u < -kVertexTol || u > 1.0 + kVertexTol) continue;
      const int nb = mesh.neighbour(cur, f);
      const bool vertex = u < kVertexTol || u > 1.0 - kVertexTol;
      if (s < best_s - kParamTol) {
        best_s = s;
        best_nb = nb;
        best_vertex = vertex;
      } else if (std::abs(s - best_s) <= kParamTol) {
        // Two faces exit at the same point: the segment passes a vertex.
        best_vertex = true;
        best_nb = std::min(best_nb, nb);
      }
    }
    if (best_nb < 0 || best_s > 1.0 + kParamTol) return WalkStatus::lost;
    if (best_vertex && !accept_ties) return WalkStatus::degenerate;
    cur = best_nb;
    s_cur = best_s;
    cells.push_back(cur);
    if (cells.size() > mesh.num_cells()) return WalkStatus::lost;
  }
  return WalkStatus::ok;
}

std::vector<int> bfs_path(const Mesh &mesh, int k, int l) {
  std::vector<int> prev(mesh.num_cells(), -1);
  std::deque<int> queue{k};
  prev[k] = k;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (c == l) break;
    for (int f : mesh.cell_faces(c)) {
      const int nb = mesh.neighbour(c, f);
      if (prev[nb] < 0) {
        prev[nb] = c;
        queue.push_back(nb);
      }
    }
  }
  if (prev[l] < 0) throw DomainError("good_path: cells " + std::to_string(k) + " and " + std::to_string(l) +
                                     " lie in different components");
  std::vector<int> path;
  for (int c = l; c != k; c = prev[c]) path.push_back(c);
  path.push_back(k);
  std::reverse(path.begin(), path.end());
  return path;
}

double path_length(const Mesh &mesh, const std::vector<int> &cells) {
  double len = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) len += distance(mesh.cell(cells[i - 1]).site, mesh.cell(cells[i]).site);
  return len;
}

} // namespace

GoodPath good_path(const Mesh &mesh, int k, int l) {
  const int n = static_cast<int>(mesh.num_cells());
  if (k < 0 || l < 0 || k >= n || l >= n) throw DomainError("good_path: cell index out of range");
  GoodPath path;
  if (k == l) {
    path.cells = {k};
    return path;
  }
  WalkStatus status = WalkStatus::lost;
  if (mesh.dim() == 1) {
    status = walk_1d(mesh, k, l, path.cells);
  } else {
    const Vec2 target = mesh.cell(l).site;
    const double delta = 1e-9 * mesh.size();
    constexpr double kGolden = 2.399963229728653;
    constexpr int kAttempts = 8;
    for (int attempt = 0; attempt <= kAttempts; ++attempt) {
      Vec2 t = target;
      if (attempt > 0) t = target + Vec2{std::cos(kGolden * attempt), std::sin(kGolden * attempt)} * delta;
      // The last attempt resolves remaining vertex ties by smallest index.
      status = walk_2d(mesh, k, l, t, attempt == kAttempts, path.cells);
      path.perturbations = attempt;
      if (status == WalkStatus::ok) break;
    }
  }
  if (status != WalkStatus::ok) {
    path.cells = bfs_path(mesh, k, l);
    path.fallback = true;
  }
  path.length = path_length(mesh, path.cells);
  return path;
}

bool is_valid_path(const Mesh &mesh, const GoodPath &path, int k, int l) {
  if (path.cells.empty() || path.cells.front() != k || path.cells.back() != l) return false;
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const int a = path.cells[i - 1], b = path.cells[i];
    bool adjacent = false;
    for (int f : mesh.cell_faces(a)) adjacent = adjacent || mesh.neighbour(a, f) == b;
    if (!adjacent) return false;
  }
  return true;
}

PathConstants path_constants(const Mesh &mesh, std::size_t samples, std::uint64_t seed) {
  PathConstants pc;
  const std::size_t n = mesh.num_cells();
  if (n < 2) return pc;
  if (!mesh.connected()) throw DomainError("path_constants: mesh graph is disconnected");
  auto visit = [&](int k, int l) {
    const GoodPath p = good_path(mesh, k, l);
    ++pc.pairs;
    if (!is_valid_path(mesh, p, k, l)) ++pc.invalid;
    if (p.fallback) ++pc.fallbacks;
    const double dist = distance(mesh.cell(k).site, mesh.cell(l).site);
    pc.c_count = std::max(pc.c_count, static_cast<double>(p.steps()) * mesh.size() / dist);
    pc.c_length = std::max(pc.c_length, p.length / dist);
  };
  if (n <= 200) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) {
        if (k != l) visit(static_cast<int>(k), static_cast<int>(l));
      }
    }
    return pc;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    const int k = pick(rng);
    int l = pick(rng);
    while (l == k) l = pick(rng);
    visit(k, l);
  }
  return pc;
}

// ---------------------------------------------------------------- Holder modulus

HolderModulus l2_holder_modulus(const Mesh &mesh, std::span<const double> f, Vec2 h, const Box &region,
                                const DiscreteMeasure &m, const DiscreteMeasure &pi, MeanKind kernel,
                                bool trim_boundary) {
  const std::size_t n = mesh.num_cells();
  if (f.size() != n) throw DomainError("l2_holder_modulus: field size mismatch");
  const double hn = norm(h);
  if (!(hn < mesh.domain().diameter())) throw DomainError("l2_holder_modulus: |h| must be below diam(domain)");
  const double delta = trim_boundary ? hn : 0.0;

  // Integration window A_delta.
  // A one-dimensional window is a segment: two vertices.
  Polygon window;
  bool has_window = false;
  const auto &dom = mesh.domain().shape.vertices;
  if (mesh.dim() == 1) {
    const double lo = std::max(region.lo.x, dom[0].x + delta);
    const double hi = std::min(region.hi.x, dom[1].x - delta);
    if (hi > lo) {
      window.vertices = {{lo, 0.0}, {hi, 0.0}};
      has_window = true;
    }
  } else {
    const Polygon inner = delta > 0.0 ? shrink(mesh.domain().shape, delta) : mesh.domain().shape;
    if (!inner.empty()) window = intersect(make_box(region.lo, region.hi), inner, 0.0);
    has_window = !window.empty();
  }

  HolderModulus out;
  if (has_window && hn > 0.0) {
    std::vector<Vec2> blo(n), bhi(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto &v = mesh.cell(k).shape.vertices;
      blo[k] = bhi[k] = v[0];
      for (const auto &p : v) {
        blo[k] = {std::min(blo[k].x, p.x), std::min(blo[k].y, p.y)};
        bhi[k] = {std::max(bhi[k].x, p.x), std::max(bhi[k].y, p.y)};
      }
    }
    Vec2 wlo = window.vertices[0], whi = window.vertices[0];
    for (const auto &p : window.vertices) {
      wlo = {std::min(wlo.x, p.x), std::min(wlo.y, p.y)};
      whi = {std::max(whi.x, p.x), std::max(whi.y, p.y)};
    }
    const bool two_d = mesh.dim() == 2;
    auto boxes_overlap = [&](Vec2 alo, Vec2 ahi, Vec2 clo, Vec2 chi) {
      return alo.x < chi.x && clo.x < ahi.x && (!two_d || (alo.y < chi.y && clo.y < ahi.y));
    };
    for (std::size_t k = 0; k < n; ++k) {
      if (!boxes_overlap(blo[k], bhi[k], wlo, whi)) continue;
      for (std::size_t l = 0; l < n; ++l) {
        const double df = f[l] - f[k];
        if (df == 0.0) continue;
        if (!boxes_overlap(blo[k], bhi[k], blo[l] + h, bhi[l] + h)) continue;
        out.value += df * df * overlap_volume(mesh, k, l, h, window);
      }
    }
  }

  const CellField r = density_ratio(m, pi);
  const double k_lower = *std::min_element(r.begin(), r.end());
  const double energy = dirichlet_energy(mesh, m, f, kernel, region);
  out.bound = k_lower > 0.0 ? hn * std::max(hn, mesh.size()) / k_lower * energy
                            : std::numeric_limits<double>::infinity();
  out.ratio = out.value == 0.0 ? 0.0 : out.value / out.bound;
  return out;
}

// ---------------------------------------------------------------- flow regularity

std::vector<RegularityRow> flow_regularity_observed(const Mesh &mesh, const DiscreteMeasure &pi,
                                                    const Trajectory &traj) {
  std::vector<RegularityRow> rows;
  const std::size_t n = mesh.num_cells();
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (!(traj.times[i] > 0.0)) continue;
    const CellField r = density_ratio(traj.measures[i], pi);
    RegularityRow row;
    row.t = traj.times[i];
    row.sup_r = *std::max_element(r.begin(), r.end());
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = k + 1; l < n; ++l) {
        const double dr = std::abs(r[k] - r[l]);
        if (dr == 0.0) continue;
        const double d = distance(mesh.cell(k).site, mesh.cell(l).site);
        row.holder_quarter = std::max(row.holder_quarter, dr / std::pow(d, 0.25));
        row.holder_half = std::max(row.holder_half, dr / std::sqrt(d));
        row.holder_one = std::max(row.holder_one, dr / d);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

CsvTable regularity_table(const std::vector<RegularityRow> &rows) {
  CsvTable t("flow_regularity", {"t", "sup_r", "holder_0.25", "holder_0.5", "holder_1"});
  for (const auto &r : rows) t.add_row({r.t, r.sup_r, r.holder_quarter, r.holder_half, r.holder_one});
  return t;
}

} // namespace gradflow
