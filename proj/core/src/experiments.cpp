#include "gradflow/experiments.hpp"

#include "gradflow/errors.hpp"
#include "gradflow/mesh_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

namespace gradflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double simpson(const std::vector<double> &f, double dt) {
  const std::size_t n = f.size() - 1;
  if (n % 2 != 0) throw DomainError("simpson: need an even number of intervals");
  double s = f.front() + f.back();
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * dt / 3.0;
}

} // namespace

// ---------------------------------------------------------------- threads

unsigned thread_count() {
  if (const char *env = std::getenv("GRADFLOW_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------- families

FamilyKind parse_family_kind(std::string_view name) {
  if (name == "uniform1d") return FamilyKind::uniform1d;
  if (name == "cartesian") return FamilyKind::cartesian;
  if (name == "voronoi") return FamilyKind::voronoi;
  if (name == "flattened") return FamilyKind::flattened;
  throw InputError("unknown mesh family '" + std::string(name) + "'");
}

std::string to_string(FamilyKind kind) {
  switch (kind) {
  case FamilyKind::uniform1d: return "uniform1d";
  case FamilyKind::cartesian: return "cartesian";
  case FamilyKind::voronoi: return "voronoi";
  case FamilyKind::flattened: return "flattened";
  }
  return "uniform1d";
}

MeshFamily MeshFamily::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw InputError("family spec needs 'kind:sizes', got '" + std::string(spec) + "'");
  MeshFamily fam;
  fam.kind = parse_family_kind(spec.substr(0, colon));
  const std::string_view sizes = spec.substr(colon + 1);
  const auto dots = sizes.find("..");
  if (dots != std::string_view::npos) {
    const long a = parse_integer(sizes.substr(0, dots), "family size");
    const long b = parse_integer(sizes.substr(dots + 2), "family size");
    if (a < 1 || b < a) throw InputError("family range must satisfy 1 <= a <= b");
    for (long n = a; n <= b; n *= 2) fam.sizes.push_back(static_cast<int>(n));
  } else {
    std::size_t start = 0;
    while (start <= sizes.size()) {
      const auto comma = sizes.find(',', start);
      const auto tok = sizes.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      const long n = parse_integer(tok, "family size");
      if (n < 1) throw InputError("family sizes must be positive");
      fam.sizes.push_back(static_cast<int>(n));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  return fam;
}

std::string MeshFamily::name() const {
  std::string s = to_string(kind) + ":";
  for (std::size_t i = 0; i < sizes.size(); ++i) s += (i ? "," : "") + std::to_string(sizes[i]);
  return s;
}

namespace {

double unit_uniform(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

Mesh MeshFamily::build(int n) const {
  if (n < 1) throw InputError("family size must be positive");
  switch (kind) {
  case FamilyKind::uniform1d: return build_uniform_interval_mesh(n);
  case FamilyKind::cartesian: return build_cartesian_mesh(n, n);
  case FamilyKind::voronoi: {
    std::mt19937_64 rng(seed + 1000003ULL * static_cast<std::uint64_t>(n));
    const double h = 1.0 / n;
    std::vector<Vec2> sites;
    sites.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double jx = 0.6 * (unit_uniform(rng) - 0.5), jy = 0.6 * (unit_uniform(rng) - 0.5);
        sites.push_back({(i + 0.5 + jx) * h, (j + 0.5 + jy) * h});
      }
    }
    return build_voronoi_mesh(sites, make_box({0.0, 0.0}, {1.0, 1.0}));
  }
  case FamilyKind::flattened: {
    const int nx = n, ny = 4 * n;
    std::vector<Vec2> sites;
    sites.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
      const double shift = j % 2 ? 0.25 : -0.25;
      for (int i = 0; i < nx; ++i) sites.push_back({(i + 0.5 + shift) / nx, (j + 0.5) / ny});
    }
    return build_voronoi_mesh(sites, make_box({0.0, 0.0}, {1.0, 1.0}));
  }
  }
  throw InputError("unknown mesh family");
}

std::vector<Mesh> MeshFamily::build_all() const {
  if (sizes.empty()) throw InputError("mesh family has no members");
  std::vector<std::optional<Mesh>> slots(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t i) { slots[i].emplace(build(sizes[i])); });
  std::vector<Mesh> out;
  out.reserve(slots.size());
  for (auto &s : slots) out.push_back(std::move(*s));
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i].size() < out[i - 1].size())) {
      throw InputError("mesh family " + name() + ": mesh size does not decrease at member " + std::to_string(i));
    }
  }
  return out;
}

// ---------------------------------------------------------------- results

void StudyResult::compute_orders() {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].order = kNaN;
    if (i == 0) continue;
    const auto &a = rows[i - 1], &b = rows[i];
    if (a.error > 0.0 && b.error > 0.0 && a.mesh_size > b.mesh_size) {
      rows[i].order = std::log(a.error / b.error) / std::log(a.mesh_size / b.mesh_size);
    }
  }
}

double StudyResult::extra(std::size_t row, std::string_view column) const {
  for (std::size_t c = 0; c < extra_columns.size(); ++c) {
    if (extra_columns[c] == column) return rows.at(row).extra.at(c);
  }
  throw InputError("study " + name + " has no column '" + std::string(column) + "'");
}

bool StudyResult::passed() const {
  return std::all_of(rules.begin(), rules.end(), [](const StudyRule &r) { return r.passed; });
}

CsvTable StudyResult::table() const {
  std::vector<std::string> cols = {"mesh_size", "cells", "value", "reference", "error", "order"};
  cols.insert(cols.end(), extra_columns.begin(), extra_columns.end());
  CsvTable t(name, cols);
  for (const auto &r : rows) {
    std::vector<CsvValue> row = {r.mesh_size, r.cells, r.value, r.reference, r.error, r.order};
    for (double v : r.extra) row.emplace_back(v);
    t.add_row(std::move(row));
  }
  return t;
}

std::string StudyResult::summary_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "gradflow-study-summary/1";
  j["study"] = name;
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto &[k, v] : parameters) j["parameters"][k] = v;
  j["rows"] = rows.size();
  j["rules"] = nlohmann::ordered_json::array();
  for (const auto &r : rules) j["rules"].push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  j["passed"] = passed();
  return j.dump(2) + "\n";
}

namespace {

StudyRule monotone_rule(const StudyResult &res, std::string name) {
  StudyRule rule{std::move(name), true, ""};
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    if (res.rows[i].error > res.rows[i - 1].error) {
      rule.passed = false;
      rule.detail = "error grows at row " + std::to_string(i);
      return rule;
    }
  }
  rule.detail = "errors non-increasing over " + std::to_string(res.rows.size()) + " rows";
  return rule;
}

std::string real_text(double v) { return format_real(v); }

} // namespace

// ---------------------------------------------------------------- gamma studies

MeasureRule parse_measure_rule(std::string_view name) {
  if (name == "stationary") return MeasureRule::stationary;
  if (name == "projected") return MeasureRule::projected;
  throw InputError("unknown measure rule '" + std::string(name) + "' (stationary or projected)");
}

StudyResult gamma_energy_study(const MeshFamily &family, std::string_view phi_name, const Potential &V,
                               const GammaEnergyOptions &options) {
  const std::vector<Mesh> meshes = family.build_all();
  const Domain &domain = meshes.front().domain();
  const SmoothFunction phi = make_function(phi_name, domain);
  const int panels = domain.dim == 1 ? 512 : 256;

  std::function<double(const Vec2 &)> density;
  std::optional<Density> rho;
  if (options.rule == MeasureRule::stationary) {
    const ContinuumReference ref = make_continuum_reference(domain, V, panels);
    density = [ref](const Vec2 &x) { return ref.sigma(x); };
  } else {
    rho = make_density(options.density, domain);
    density = rho->fn;
  }
  const double reference = continuous_dirichlet(phi, density, domain, panels);

  StudyResult res;
  res.name = "gamma_energy";
  res.parameters = {{"family", family.name()},
                    {"phi", std::string(phi_name)},
                    {"potential", V.name()},
                    {"measure", options.rule == MeasureRule::stationary ? "stationary" : "projected:" + options.density},
                    {"kernel", to_string(options.kernel)}};
  res.extra_columns = {"zeta", "isotropy_defect"};
  res.rows.resize(meshes.size());
  parallel_for(meshes.size(), [&](std::size_t i) {
    const Mesh &mesh = meshes[i];
    const FvStructure s = make_structure(mesh, V);
    const DiscreteMeasure m = options.rule == MeasureRule::stationary ? s.pi : project_measure(mesh, *rho);
    const CellField f = project_function(mesh, phi.value);
    StudyRow &row = res.rows[i];
    row.mesh_size = mesh.size();
    row.cells = mesh.num_cells();
    row.value = dirichlet_energy(mesh, m, f, options.kernel);
    row.reference = reference;
    row.error = std::abs(row.value - reference);
    row.extra = {regularity_report(mesh).zeta(), max_isotropy_defect(mesh, s.weights, s.pi)};
  });
  res.compute_orders();
  res.rules.push_back(monotone_rule(res, "error_monotone"));
  return res;
}

double boundary_layer_volume(const Domain &domain, Vec2 z, double eps, double r, int grid) {
  const double h = 0.5 * eps;
  if (domain.dim == 1) {
    const double lo = domain.shape.vertices[0].x, hi = domain.shape.vertices[1].x;
    std::array<std::pair<double, double>, 2> iv = {std::pair{z.x - h - r, z.x - h + r}, std::pair{z.x + h - r, z.x + h + r}};
    double total = 0.0, reach = -std::numeric_limits<double>::infinity();
    for (auto [a, b] : iv) {
      a = std::max({a, lo, reach});
      b = std::min(b, hi);
      if (b > a) total += b - a;
      reach = std::max(reach, b);
    }
    return total;
  }
  const auto &v = domain.shape.vertices;
  Vec2 blo = v[0], bhi = v[0];
  for (const auto &p : v) {
    blo = {std::min(blo.x, p.x), std::min(blo.y, p.y)};
    bhi = {std::max(bhi.x, p.x), std::max(bhi.y, p.y)};
  }
  const double dx = (bhi.x - blo.x) / grid, dy = (bhi.y - blo.y) / grid;
  const Vec2 qlo{z.x - h, z.y - h}, qhi{z.x + h, z.y + h};
  std::size_t count = 0;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const Vec2 p{blo.x + (i + 0.5) * dx, blo.y + (j + 0.5) * dy};
      if (!domain.contains(p)) continue;
      double d;
      const bool inside = p.x > qlo.x && p.x < qhi.x && p.y > qlo.y && p.y < qhi.y;
      if (inside) {
        d = std::min({p.x - qlo.x, qhi.x - p.x, p.y - qlo.y, qhi.y - p.y});
      } else {
        const double ex = std::max({qlo.x - p.x, 0.0, p.x - qhi.x});
        const double ey = std::max({qlo.y - p.y, 0.0, p.y - qhi.y});
        d = std::hypot(ex, ey);
      }
      if (d < r) ++count;
    }
  }
  return static_cast<double>(count) * dx * dy;
}

StudyResult gamma_affine_minimization_study(const MeshFamily &family, Vec2 z, Vec2 xi, double eps) {
  if (!(eps > 0.0)) throw DomainError("affine study: cube side must be positive");
  const std::vector<Mesh> meshes = family.build_all();
  const Domain &domain = meshes.front().domain();
  const int dim = domain.dim;
  if (dim == 1) {
    xi.y = 0.0;
    z.y = 0.0;
  }
  const double h = 0.5 * eps;
  // The closed cube must sit inside the open domain.
  std::vector<Vec2> corners = dim == 1 ? std::vector<Vec2>{{z.x - h, 0.0}, {z.x + h, 0.0}}
                                       : std::vector<Vec2>{{z.x - h, z.y - h}, {z.x + h, z.y - h},
                                                           {z.x + h, z.y + h}, {z.x - h, z.y + h}};
  for (const auto &c : corners) {
    bool inside;
    if (dim == 1) {
      inside = c.x > domain.shape.vertices[0].x && c.x < domain.shape.vertices[1].x;
    } else {
      inside = true;
      for (const auto &hp : edge_half_planes(domain.shape)) inside = inside && hp.signed_distance(c) < 0.0;
    }
    if (!inside) throw DomainError("affine study: the cube Q_eps(z) is not compactly inside the domain");
  }
  const double xi2 = dot(xi, xi);
  const double literal = std::pow(eps, dim) * xi2;
  const double reference = 0.5 * literal;
  const Box box{{z.x - h, z.y - h}, {z.x + h, z.y + h}};

  StudyResult res;
  res.name = "gamma_affine";
  res.parameters = {{"family", family.name()},
                    {"z", real_text(z.x) + "," + real_text(z.y)},
                    {"xi", real_text(xi.x) + "," + real_text(xi.y)},
                    {"eps", real_text(eps)}};
  res.extra_columns = {"harmonic_residual", "boundary_layer", "literal_gap"};
  res.rows.resize(meshes.size());
  parallel_for(meshes.size(), [&](std::size_t i) {
    const Mesh &mesh = meshes[i];
    const FvStructure s = make_structure(mesh, Potential::zero());
    CellField f(mesh.num_cells());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = dot(xi, mesh.cell(k).site - z);

    // Discrete Laplacian of f on cells whose closure lies in the open cube.
    double residual = 0.0;
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
      bool interior = true;
      for (const auto &p : mesh.cell(k).shape.vertices) {
        interior = interior && p.x > box.lo.x && p.x < box.hi.x && (dim == 1 || (p.y > box.lo.y && p.y < box.hi.y));
      }
      if (!interior) continue;
      double lap = 0.0;
      for (int e : mesh.cell_faces(k)) lap += s.weights.w[e] * (f[mesh.neighbour(k, e)] - f[k]);
      residual = std::max(residual, std::abs(lap));
    }

    StudyRow &row = res.rows[i];
    row.mesh_size = mesh.size();
    row.cells = mesh.num_cells();
    row.value = dirichlet_energy(mesh, s.pi, f, MeanKind::logarithmic, box);
    row.reference = reference;
    row.error = std::abs(row.value - reference);
    row.extra = {residual, boundary_layer_volume(domain, z, eps, 5.0 * mesh.size()), std::abs(row.value - literal)};
  });
  res.compute_orders();

  StudyRule harmonic{"harmonic_residual", true, "max residual <= 1e-11"};
  StudyRule layer{"boundary_layer_bound", true, "|F_N - eps^d |xi|^2 / 2| <= |xi|^2 |B(dQ, 5[T])|"};
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    if (res.rows[i].extra[0] > 1e-11) harmonic.passed = false;
    if (res.rows[i].error > xi2 * res.rows[i].extra[1]) layer.passed = false;
  }
  res.rules = {harmonic, layer};
  return res;
}

// ---------------------------------------------------------------- EDI

EdiReport edi_audit(const FvStructure &s, const DiscreteMeasure &m0, double T, int M) {
  if (s.mesh == nullptr) throw DomainError("edi_audit: structure has no mesh");
  if (s.mesh->num_cells() > 400) throw DomainError("edi_audit: exact flows are limited to 400 cells");
  if (!(T > 0.0) || M < 2 || M % 2 != 0) throw DomainError("edi_audit: need T > 0 and an even M >= 2");
  for (std::size_t k = 0; k < m0.size(); ++k) {
    if (!(m0[k] > 0.0)) {
      throw DomainError("edi_audit: m0 vanishes at cell " + std::to_string(k) +
                        " (Fisher information is infinite; mix m0 with pi first)");
    }
  }
  const Generator gen = assemble_generator(s);
  const ExactPropagator prop(gen);
  const int fine = 2 * M;
  std::vector<DiscreteMeasure> nodes(fine + 1);
  std::vector<double> dual(fine + 1), half_fisher(fine + 1);
  parallel_for(static_cast<std::size_t>(fine + 1), [&](std::size_t i) {
    const double t = T * static_cast<double>(i) / fine;
    DiscreteMeasure m = i == 0 ? m0 : prop.evolve(m0, t);
    const CellField rate = gen.apply(m.masses());
    dual[i] = dual_action(s, m, rate).value();
    half_fisher[i] = 0.5 * fisher(s, m).value();
    nodes[i] = std::move(m);
  });

  EdiReport rep;
  rep.intervals = M;
  rep.h0 = entropy(m0, s.pi);
  rep.hT = entropy(nodes.back(), s.pi);
  std::vector<double> dual_c, fisher_c;
  for (int i = 0; i <= fine; i += 2) {
    rep.times.push_back(T * i / fine);
    dual_c.push_back(dual[i]);
    fisher_c.push_back(half_fisher[i]);
  }
  rep.action_integral = simpson(dual_c, T / M);
  rep.fisher_integral = simpson(fisher_c, T / M);
  rep.residual = rep.h0 - rep.hT - (rep.action_integral + rep.fisher_integral);
  rep.residual_refined = rep.h0 - rep.hT - (simpson(dual, T / fine) + simpson(half_fisher, T / fine));
  rep.tol_q = 16.0 / 15.0 * std::abs(rep.residual - rep.residual_refined);
  for (int i = 0; i <= fine; ++i) {
    rep.identity_defect = std::max(rep.identity_defect, std::abs(dual[i] - half_fisher[i]) / (1.0 + 2.0 * half_fisher[i]));
  }
  rep.dual = std::move(dual_c);
  rep.half_fisher = std::move(fisher_c);
  return rep;
}

CsvTable EdiReport::table() const {
  CsvTable t("edi_integrands", {"t", "dual_action", "half_fisher"});
  for (std::size_t i = 0; i < times.size(); ++i) t.add_row({times[i], dual[i], half_fisher[i]});
  return t;
}

std::string EdiReport::summary_json(bool check_passed) const {
  nlohmann::ordered_json j;
  j["schema"] = "gradflow-edi-summary/1";
  j["intervals"] = intervals;
  j["H0"] = h0;
  j["HT"] = hT;
  j["action_integral"] = action_integral;
  j["fisher_integral"] = fisher_integral;
  j["residual"] = residual;
  j["residual_refined"] = residual_refined;
  j["tol_q"] = tol_q;
  j["identity_defect"] = identity_defect;
  j["passed"] = check_passed;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- evolution

namespace {

constexpr int kTimeNodes = 17;

/// Continuum (or fine-mesh) reference flow sampled on the study's t-grid.
struct FlowReference {
  std::string kind;
  std::function<double(const Vec2 &, std::size_t)> density;
  std::vector<PiecewiseDensity> profiles; // one-dimensional only
  std::vector<double> entropy;
  std::vector<double> fisher;
};

struct DiscreteFlow {
  std::vector<DiscreteMeasure> nodes;
};

DiscreteFlow discrete_flow(const FvStructure &s, const DiscreteMeasure &m0, const std::vector<double> &times) {
  const Generator gen = assemble_generator(s);
  DiscreteFlow flow;
  if (gen.size() <= 2000) {
    const ExactPropagator prop(gen);
    for (double t : times) flow.nodes.push_back(t == 0.0 ? m0 : prop.evolve(m0, t));
    return flow;
  }
  flow.nodes.push_back(m0);
  constexpr int kSub = 32;
  for (std::size_t i = 1; i < times.size(); ++i) {
    DiscreteMeasure m = flow.nodes.back();
    const double dt = (times[i] - times[i - 1]) / kSub;
    for (int k = 0; k < kSub; ++k) m = step_crank_nicolson(gen, m, dt);
    flow.nodes.push_back(std::move(m));
  }
  return flow;
}

bool rectangular(const Domain &d) {
  if (d.dim == 1) return true;
  const auto &v = d.shape.vertices;
  Vec2 lo = v[0], hi = v[0];
  for (const auto &p : v) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return std::abs(polygon_area(d.shape) - (hi.x - lo.x) * (hi.y - lo.y)) <= 1e-12 * d.volume();
}

FlowReference make_flow_reference(const MeshFamily &family, const std::vector<Mesh> &meshes, const Potential &V,
                                  std::string_view rho0, const std::vector<double> &times) {
  const Domain &domain = meshes.front().domain();
  const int panels = domain.dim == 1 ? 512 : 256;
  const ContinuumReference cref = make_continuum_reference(domain, V, panels);
  FlowReference ref;
  const std::size_t nt = times.size();
  const bool zero = V.name() == "zero";
  const bool closed = zero && rectangular(domain) && (rho0 == "cosine" || rho0 == "uniform");

  if (closed) {
    ref.kind = "closed-form";
    const auto &v = domain.shape.vertices;
    Vec2 lo = v[0], hi = v[0];
    for (const auto &p : v) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    const double vol = domain.volume();
    const int dim = domain.dim;
    const double lx = hi.x - lo.x, ly = hi.y - lo.y;
    constexpr double pi = std::numbers::pi;
    const double rate = (pi / lx) * (pi / lx) + (dim == 2 ? (pi / ly) * (pi / ly) : 0.0);
    const double amp0 = rho0 == "cosine" ? 0.5 : 0.0;
    ref.density = [=](const Vec2 &x, std::size_t i) {
      double c = std::cos(pi * (x.x - lo.x) / lx);
      if (dim == 2) c *= std::cos(pi * (x.y - lo.y) / ly);
      return (1.0 + amp0 * std::exp(-rate * times[i]) * c) / vol;
    };
    ref.entropy.resize(nt);
    ref.fisher.resize(nt);
    if (dim == 1) ref.profiles.resize(nt);
    parallel_for(nt, [&](std::size_t i) {
      auto rho = [&](const Vec2 &x) { return ref.density(x, i); };
      ref.entropy[i] = continuous_entropy(rho, cref, domain, panels);
      ref.fisher[i] = continuous_fisher(rho, cref, domain, panels);
      if (dim == 1) {
        ref.profiles[i] = average_density([&](double x) { return ref.density({x, 0.0}, i); }, lo.x, hi.x, 1 << 14);
      }
    });
    return ref;
  }

  // Fine-mesh reference; Richardson-combined cell averages in one dimension.
  const Density rho = make_density(rho0, domain);
  ref.kind = "fine-mesh";
  ref.fisher.assign(nt, kNaN);
  ref.entropy.resize(nt);
  if (family.kind == FamilyKind::uniform1d) {
    const int nmax = family.sizes.back();
    const double a = domain.shape.vertices[0].x, b = domain.shape.vertices[1].x;
    const Mesh fine = build_uniform_interval_mesh(4 * nmax, a, b);
    const Mesh coarse = build_uniform_interval_mesh(2 * nmax, a, b);
    const FvStructure sf = make_structure(fine, V), sc = make_structure(coarse, V);
    const DiscreteFlow ff = discrete_flow(sf, project_measure(fine, rho), times);
    const DiscreteFlow fc = discrete_flow(sc, project_measure(coarse, rho), times);
    ref.profiles.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) {
      std::vector<double> w(2 * nmax);
      for (int k = 0; k < 2 * nmax; ++k) {
        const double agg = ff.nodes[i][2 * k] + ff.nodes[i][2 * k + 1];
        w[k] = std::max((4.0 * agg - fc.nodes[i][k]) / 3.0, 0.0);
      }
      const DiscreteMeasure mr = DiscreteMeasure::normalized(std::move(w));
      ref.profiles[i] = piecewise_density(coarse, mr);
      ref.entropy[i] = entropy(ff.nodes[i], sf.pi);
    }
    auto profiles = ref.profiles;
    ref.density = [profiles](const Vec2 &x, std::size_t i) {
      const auto &p = profiles[i];
      auto it = std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), x.x);
      std::size_t k = it == p.breakpoints.begin() ? 0 : static_cast<std::size_t>(it - p.breakpoints.begin()) - 1;
      return p.values[std::min(k, p.values.size() - 1)];
    };
    return ref;
  }
  std::size_t max_cells = 0;
  for (const auto &m : meshes) max_cells = std::max(max_cells, m.num_cells());
  const int side = std::min(64, 4 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(max_cells)))));
  auto fine = std::make_shared<Mesh>(build_cartesian_mesh(side, side));
  // Family members live on the unit square, so cells index directly.
  const FvStructure sf = make_structure(*fine, V);
  const DiscreteFlow ff = discrete_flow(sf, project_measure(*fine, rho), times);
  auto dens = std::make_shared<std::vector<CellField>>();
  for (std::size_t i = 0; i < nt; ++i) {
    dens->push_back(embed_measure(*fine, ff.nodes[i]));
    ref.entropy[i] = entropy(ff.nodes[i], sf.pi);
  }
  ref.density = [side, dens](const Vec2 &x, std::size_t i) {
    const int ci = std::clamp(static_cast<int>(x.x * side), 0, side - 1);
    const int cj = std::clamp(static_cast<int>(x.y * side), 0, side - 1);
    return (*dens)[i][static_cast<std::size_t>(cj) * side + ci];
  };
  return ref;
}

} // namespace

StudyResult evolutionary_convergence_study(const MeshFamily &family, const Potential &V, std::string_view rho0,
                                           double T) {
  if (!(T > 0.0)) throw DomainError("evolutionary study: T must be positive");
  const std::vector<Mesh> meshes = family.build_all();
  const Domain &domain = meshes.front().domain();
  std::vector<double> times(kTimeNodes);
  for (int i = 0; i < kTimeNodes; ++i) times[i] = T * i / (kTimeNodes - 1);
  const FlowReference ref = make_flow_reference(family, meshes, V, rho0, times);
  const Density rho = make_density(rho0, domain);
  const double dt = T / (kTimeNodes - 1);
  const double fisher_ref_int =
      std::any_of(ref.fisher.begin(), ref.fisher.end(), [](double v) { return std::isnan(v); }) ? kNaN
                                                                                                  : simpson(ref.fisher, dt);

  StudyResult res;
  res.name = "evolutionary_convergence";
  res.parameters = {{"family", family.name()},
                    {"potential", V.name()},
                    {"rho0", std::string(rho0)},
                    {"T", real_text(T)},
                    {"time_nodes", std::to_string(kTimeNodes)},
                    {"metric", domain.dim == 1 ? "W2" : "L1"},
                    {"reference", ref.kind}};
  res.extra_columns = {"entropy_excess", "entropy_gap", "fisher_integral", "fisher_integral_ref", "dual_integral",
                       "zeta"};
  res.rows.resize(meshes.size());
  parallel_for(meshes.size(), [&](std::size_t mi) {
    const Mesh &mesh = meshes[mi];
    const FvStructure s = make_structure(mesh, V);
    const Generator gen = assemble_generator(s);
    const DiscreteFlow flow = discrete_flow(s, project_measure(mesh, rho), times);
    double sup_err = 0.0, excess = 0.0, gap = 0.0;
    std::vector<double> fis(kTimeNodes), dua(kTimeNodes);
    for (int i = 0; i < kTimeNodes; ++i) {
      const DiscreteMeasure &m = flow.nodes[i];
      double err;
      if (mesh.dim() == 1) {
        err = wasserstein_1d(piecewise_density(mesh, m), ref.profiles[i]);
      } else {
        err = 0.0;
        for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
          const double dk = m[k] / mesh.cell(k).volume;
          err += integrate_cell(mesh, k, [&](const Vec2 &x) { return std::abs(dk - ref.density(x, i)); }, {4});
        }
      }
      sup_err = std::max(sup_err, err);
      const double hn = entropy(m, s.pi);
      excess = std::max(excess, hn - ref.entropy[i]);
      gap = std::max(gap, std::abs(hn - ref.entropy[i]));
      fis[i] = fisher(s, m).value();
      dua[i] = dual_action(s, m, gen.apply(m.masses())).value();
    }
    StudyRow &row = res.rows[mi];
    row.mesh_size = mesh.size();
    row.cells = mesh.num_cells();
    row.value = sup_err;
    row.reference = 0.0;
    row.error = sup_err;
    row.extra = {std::max(excess, 0.0), gap, simpson(fis, dt), fisher_ref_int, simpson(dua, dt),
                 regularity_report(mesh).zeta()};
  });
  res.compute_orders();
  res.rules.push_back(monotone_rule(res, "error_monotone"));
  StudyRule jensen{"entropy_excess_vanishing", true, "max_t (H_N - H)^+ non-increasing"};
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    if (res.rows[i].extra[0] > res.rows[i - 1].extra[0] + 1e-12) jensen.passed = false;
  }
  res.rules.push_back(jensen);
  return res;
}

// ---------------------------------------------------------------- lower bounds

double continuum_dual_action_1d(const std::function<double(double)> &p, const std::function<double(double)> &eta,
                                double a, double b, int cells) {
  static constexpr std::array<double, 3> gx = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  auto integral = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int g = 0; g < 3; ++g) s += gw[g] * eta(mid + half * gx[g]);
    return s * half;
  };
  const double h = (b - a) / cells;
  double j_left = 0.0, sum = 0.0;
  for (int c = 0; c < cells; ++c) {
    const double lo = a + c * h, hi = lo + h, mid = lo + 0.5 * h;
    for (int g = 0; g < 3; ++g) {
      const double x = mid + 0.5 * h * gx[g];
      const double j = j_left + integral(lo, x);
      sum += gw[g] * 0.5 * h * j * j / p(x);
    }
    j_left += integral(lo, hi);
  }
  return 0.5 * sum;
}

StudyResult lower_bound_trend_study(const MeshFamily &family, std::string_view mu, std::string_view eta_name,
                                    const Potential &V) {
  const std::vector<Mesh> meshes = family.build_all();
  const Domain &domain = meshes.front().domain();
  const int panels = domain.dim == 1 ? 512 : 256;
  const Density rho = make_density(mu, domain);
  const SmoothFunction eta = make_function(eta_name, domain);
  const ContinuumReference cref = make_continuum_reference(domain, V, panels);
  const double h_ref = continuous_entropy(rho.fn, cref, domain, panels);
  const double i_ref = continuous_fisher(rho.fn, cref, domain, panels);
  double dual_ref = kNaN;
  if (domain.dim == 1) {
    const double a = domain.shape.vertices[0].x, b = domain.shape.vertices[1].x;
    dual_ref = continuum_dual_action_1d([&](double x) { return rho({x, 0.0}); },
                                        [&](double x) { return eta.value({x, 0.0}); }, a, b);
  }

  StudyResult res;
  res.name = "lower_bound_trend";
  res.parameters = {{"family", family.name()}, {"mu", std::string(mu)}, {"eta", std::string(eta_name)},
                    {"potential", V.name()}};
  res.extra_columns = {"fisher", "fisher_ref", "dual", "dual_ref"};
  res.rows.resize(meshes.size());
  parallel_for(meshes.size(), [&](std::size_t i) {
    const Mesh &mesh = meshes[i];
    const FvStructure s = make_structure(mesh, V);
    const DiscreteMeasure m = project_measure(mesh, rho);
    CellField e = project_signed(mesh, eta.value);
    double total = 0.0;
    for (double v : e) total += v;
    const double vol = domain.volume();
    for (std::size_t k = 0; k < e.size(); ++k) e[k] -= total * mesh.cell(k).volume / vol;
    StudyRow &row = res.rows[i];
    row.mesh_size = mesh.size();
    row.cells = mesh.num_cells();
    row.value = entropy(m, s.pi);
    row.reference = h_ref;
    row.error = std::abs(row.value - h_ref);
    row.extra = {fisher(s, m).value(), i_ref, dual_action(s, m, e).value(), dual_ref};
  });
  res.compute_orders();
  StudyRule jensen{"entropy_jensen", true, "H_N(P_N mu) <= H(mu) + 1e-12 on every row"};
  for (const auto &r : res.rows) {
    if (r.value > r.reference + 1e-12) jensen.passed = false;
  }
  res.rules.push_back(jensen);
  return res;
}

} // namespace gradflow
