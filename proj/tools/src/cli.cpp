#include "cli.hpp"

#include "gradflow/diagnostics.hpp"
#include "gradflow/dual_action.hpp"
#include "gradflow/dynamics.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/experiments.hpp"
#include "gradflow/io.hpp"
#include "gradflow/isotropy.hpp"
#include "gradflow/mesh_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>

namespace gradflow::cli {

namespace fs = std::filesystem;

namespace {

/// Failed --check; the message is printed and the exit code is 3.
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshSource {
  std::string file;
  std::string kind = "uniform1d";
  int n = 16;
  std::string sites;
  std::uint64_t seed = 42;
};

void add_mesh_source(CLI::App &cmd, MeshSource &src) {
  cmd.add_option("--mesh", src.file, "Mesh JSON file written by 'gradflow mesh'");
  cmd.add_option("--kind", src.kind, "uniform1d | cartesian | voronoi | flattened")->capture_default_str();
  cmd.add_option("--n", src.n, "Cells per side (n x n for 2D kinds)")->capture_default_str();
  cmd.add_option("--sites", src.sites, "CSV of Voronoi sites (x,y per row) in the unit square");
  cmd.add_option("--seed", src.seed, "Seed for jittered Voronoi sites")->capture_default_str();
}

std::vector<Vec2> read_sites(const fs::path &path) {
  if (!fs::exists(path)) throw InputError("sites file not found: " + path.string());
  std::istringstream in(read_file(path));
  std::vector<Vec2> sites;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("sites file: expected 'x,y' per line, got '" + line + "'");
    const std::string_view a(line.data(), comma), b(line.data() + comma + 1, line.size() - comma - 1);
    if (a == "x") continue; // header row
    sites.push_back({parse_real(a, "site x"), parse_real(b, "site y")});
  }
  if (sites.empty()) throw InputError("sites file is empty: " + path.string());
  return sites;
}

Mesh load_source(const MeshSource &src) {
  if (!src.file.empty()) {
    if (!fs::exists(src.file)) throw InputError("mesh file not found: " + src.file);
    return load_mesh(src.file);
  }
  if (!src.sites.empty()) {
    const auto sites = read_sites(src.sites);
    return build_voronoi_mesh(sites, make_box({0.0, 0.0}, {1.0, 1.0}));
  }
  MeshFamily fam;
  fam.kind = parse_family_kind(src.kind);
  fam.seed = src.seed;
  return fam.build(src.n);
}

/// "stationary", "projected:<density>", or a measure CSV; `mix` blends in pi.
DiscreteMeasure initial_measure(const std::string &spec, double mix, const Mesh &mesh, const FvStructure &s) {
  DiscreteMeasure m0;
  if (spec == "stationary") {
    m0 = s.pi;
  } else if (spec.rfind("projected:", 0) == 0) {
    m0 = project_measure(mesh, make_density(spec.substr(10), mesh.domain()));
  } else if (fs::exists(spec)) {
    m0 = load_measure(spec, mesh.num_cells());
  } else {
    throw InputError("--m0 must be 'stationary', 'projected:<density>' or an existing measure file: " + spec);
  }
  if (!(mix >= 0.0 && mix <= 1.0)) throw InputError("--mix must lie in [0, 1]");
  return mix > 0.0 ? DiscreteMeasure::mix(m0, s.pi, mix) : m0;
}

Vec2 parse_vec(const std::string &text, const char *what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return {parse_real(text, what), 0.0};
  return {parse_real(std::string_view(text).substr(0, comma), what),
          parse_real(std::string_view(text).substr(comma + 1), what)};
}

void write_summary(const fs::path &path, const nlohmann::ordered_json &j) { write_file_atomic(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------- commands

struct Common {
  std::string out = ".";
  std::string potential = "zero";
  bool check = false;
};

void cmd_mesh(const MeshSource &src, const Common &c, std::ostream &out) {
  const Mesh mesh = load_source(src);
  const FvStructure s = make_structure(mesh, Potential::parse(c.potential));
  const CellField iso = isotropy_defect(mesh, s.weights, s.pi);
  const RegularityReport reg = regularity_report(mesh);
  fs::create_directories(c.out);
  save_mesh(fs::path(c.out) / "mesh.json", mesh);
  CsvTable t("mesh_report", {"cell", "volume", "diameter", "pi", "isotropy_defect"});
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    t.add_row({k, mesh.cell(k).volume, mesh.cell_diameter(k), s.pi[k], iso[k]});
  }
  t.save(fs::path(c.out) / "mesh_report.csv");
  double iso_max = 0.0;
  for (double v : iso) iso_max = std::max(iso_max, v);
  nlohmann::ordered_json j;
  j["schema"] = "gradflow-mesh-summary/1";
  j["cells"] = mesh.num_cells();
  j["faces"] = mesh.faces().size();
  j["dim"] = mesh.dim();
  j["mesh_size"] = mesh.size();
  j["zeta"] = reg.zeta();
  j["zeta_inner"] = reg.zeta_inner;
  j["zeta_area"] = reg.zeta_area;
  j["orthogonality_defect"] = orthogonality_defect(mesh);
  j["isotropy_defect_max"] = iso_max;
  write_summary(fs::path(c.out) / "mesh_summary.json", j);
  out << "cells " << mesh.num_cells() << "  [T] " << format_real(mesh.size()) << "  zeta " << format_real(reg.zeta())
      << "  isotropy_defect_max " << format_real(iso_max) << "\n";
  if (const auto w = regularity_warning(reg, 1e-3); !w.empty()) out << "warning: " << w << "\n";
}

void cmd_solve(const MeshSource &src, const Common &c, const std::string &m0_spec, double mix, double T, int M,
               const std::string &scheme, std::ostream &out) {
  const Mesh mesh = load_source(src);
  const FvStructure s = make_structure(mesh, Potential::parse(c.potential));
  const DiscreteMeasure m0 = initial_measure(m0_spec, mix, mesh, s);
  if (!(T > 0.0) || M < 1) throw InputError("--T must be positive and --M at least 1");
  const Generator gen = assemble_generator(s);
  const Trajectory traj = solve_trajectory(gen, m0, T, M, parse_scheme(scheme));
  fs::create_directories(c.out);
  trajectory_table(traj).save(fs::path(c.out) / "trajectory.csv");
  CsvTable e("trajectory_entropy", {"t", "entropy", "fisher"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    e.add_row({traj.times[i], entropy(traj.measures[i], s.pi), fisher(s, traj.measures[i]).value()});
  }
  e.save(fs::path(c.out) / "entropy.csv");
  nlohmann::ordered_json j;
  j["schema"] = "gradflow-solve-summary/1";
  j["cells"] = mesh.num_cells();
  j["scheme"] = to_string(traj.scheme);
  j["dt_policy"] = traj.dt_policy;
  j["H0"] = entropy(traj.measures.front(), s.pi);
  j["HT"] = entropy(traj.measures.back(), s.pi);
  write_summary(fs::path(c.out) / "solve_summary.json", j);
  out << "scheme " << to_string(traj.scheme) << "  steps " << M << "  H(0) " << format_real(j["H0"].get<double>())
      << "  H(T) " << format_real(j["HT"].get<double>()) << "\n";
}

void cmd_edi(const MeshSource &src, const Common &c, const std::string &m0_spec, double mix, double T, int M,
             std::ostream &out) {
  const Mesh mesh = load_source(src);
  const FvStructure s = make_structure(mesh, Potential::parse(c.potential));
  const DiscreteMeasure m0 = initial_measure(m0_spec, mix, mesh, s);
  const EdiReport rep = edi_audit(s, m0, T, M);
  const bool ok = std::abs(rep.residual) <= 1e-5 * rep.h0 && rep.identity_defect <= 1e-8;
  fs::create_directories(c.out);
  rep.table().save(fs::path(c.out) / "edi.csv");
  write_file_atomic(fs::path(c.out) / "edi_summary.json", rep.summary_json(ok));
  out << "H0 " << format_real(rep.h0) << "  HT " << format_real(rep.hT) << "\n"
      << "residual " << format_real(rep.residual) << "  refined " << format_real(rep.residual_refined) << "  tol_q "
      << format_real(rep.tol_q) << "\n"
      << "identity_defect " << format_real(rep.identity_defect) << "\n";
  if (c.check && !ok) throw CheckFailure("EDI check failed: |residual| > 1e-5 H0 or identity defect > 1e-8");
}

void finish_study(const StudyResult &res, const Common &c, const std::string &stem, std::ostream &out) {
  fs::create_directories(c.out);
  res.table().save(fs::path(c.out) / (stem + ".csv"));
  write_file_atomic(fs::path(c.out) / (stem + "_summary.json"), res.summary_json());
  for (const auto &r : res.rows) {
    out << "[T] " << format_real(r.mesh_size) << "  value " << format_real(r.value) << "  error "
        << format_real(r.error) << "  order " << (std::isnan(r.order) ? std::string("-") : format_real(r.order)) << "\n";
  }
  for (const auto &rule : res.rules) out << (rule.passed ? "PASS " : "FAIL ") << rule.name << ": " << rule.detail << "\n";
  if (c.check && !res.passed()) throw CheckFailure("study rule failed");
}


} // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Finite-volume Fokker-Planck gradient-flow lab"};
  app.name("gradflow");
  app.require_subcommand(1);

  Common common;
  MeshSource src;
  std::string m0 = "stationary", scheme = "auto", family, phi = "cos", measure = "stationary", kernel = "log";
  std::string rho0 = "cosine", study = "evolution", mu = "cosine", eta = "cos";
  std::string z = "0.5,0.5", xi = "1,0", shift, field = "cos";
  double mix = 0.0, T = 0.5, eps = 0.25;
  int M = 256;
  bool affine = false;

  auto common_opts = [&](CLI::App *cmd, bool with_check) {
    cmd->add_option("--out", common.out, "Output directory")->capture_default_str();
    cmd->add_option("--potential", common.potential, "zero | linear:a[,b] | quadratic:c[,c2][;k] | double-well:c,w[,d]")
        ->capture_default_str();
    if (with_check) cmd->add_flag("--check", common.check, "Exit with code 3 when an acceptance rule fails");
  };

  auto *mesh_cmd = app.add_subcommand("mesh", "Build a mesh and report regularity and isotropy");
  add_mesh_source(*mesh_cmd, src);
  common_opts(mesh_cmd, false);

  auto *solve_cmd = app.add_subcommand("solve", "Evolve a discrete measure along the flow");
  add_mesh_source(*solve_cmd, src);
  common_opts(solve_cmd, false);
  solve_cmd->add_option("--m0", m0, "stationary | projected:<density> | measure CSV")->capture_default_str();
  solve_cmd->add_option("--mix", mix, "Blend weight of pi in m0")->capture_default_str();
  solve_cmd->add_option("--T", T, "Final time")->capture_default_str();
  solve_cmd->add_option("--M", M, "Number of time steps")->capture_default_str();
  solve_cmd->add_option("--scheme", scheme, "auto | implicit-euler | crank-nicolson | exact")->capture_default_str();

  auto *edi_cmd = app.add_subcommand("edi", "Audit the energy-dissipation balance along an exact flow");
  add_mesh_source(*edi_cmd, src);
  common_opts(edi_cmd, true);
  edi_cmd->add_option("--m0", m0, "stationary | projected:<density> | measure CSV")->capture_default_str();
  edi_cmd->add_option("--mix", mix, "Blend weight of pi in m0")->capture_default_str();
  edi_cmd->add_option("--T", T, "Final time")->capture_default_str();
  edi_cmd->add_option("--M", M, "Simpson intervals (even)")->capture_default_str();

  auto *gamma_cmd = app.add_subcommand("gamma", "Energy convergence under mesh refinement");
  common_opts(gamma_cmd, true);
  gamma_cmd->add_option("--family", family, "kind:a..b (doubling) or kind:a,b,c")->required();
  gamma_cmd->add_option("--phi", phi, "const | x | y | cos | coscos")->capture_default_str();
  gamma_cmd->add_option("--measure", measure, "stationary | projected:<density>")->capture_default_str();
  gamma_cmd->add_option("--kernel", kernel, "Mean used between neighbouring densities")->capture_default_str();
  gamma_cmd->add_flag("--affine", affine, "Run the affine minimisation study instead");
  gamma_cmd->add_option("--z", z, "Cube centre")->capture_default_str();
  gamma_cmd->add_option("--xi", xi, "Slope of the affine datum")->capture_default_str();
  gamma_cmd->add_option("--eps", eps, "Cube side")->capture_default_str();

  auto *conv_cmd = app.add_subcommand("converge", "Evolutionary convergence and lower-bound trends");
  common_opts(conv_cmd, true);
  conv_cmd->add_option("--family", family, "kind:a..b (doubling) or kind:a,b,c")->required();
  conv_cmd->add_option("--study", study, "evolution | lower-bound")->capture_default_str();
  conv_cmd->add_option("--rho0", rho0, "Initial density")->capture_default_str();
  conv_cmd->add_option("--T", T, "Final time")->capture_default_str();
  conv_cmd->add_option("--mu", mu, "Density for the lower-bound study")->capture_default_str();
  conv_cmd->add_option("--eta", eta, "Signed charge for the lower-bound study")->capture_default_str();

  auto *diag_cmd = app.add_subcommand("diagnose", "Condition, good-path and Holder reports for one mesh");
  add_mesh_source(*diag_cmd, src);
  common_opts(diag_cmd, false);
  diag_cmd->add_option("--m0", m0, "stationary | projected:<density> | measure CSV")->capture_default_str();
  diag_cmd->add_option("--mix", mix, "Blend weight of pi in m0")->capture_default_str();
  diag_cmd->add_option("--field", field, "Function whose Holder modulus is reported")->capture_default_str();
  diag_cmd->add_option("--shift", shift, "Shift vector h (default: [T] along x)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    std::string msg = e.what();
    err << "gradflow: " << msg << "\n";
    return kExitInput;
  }

  try {
    if (*mesh_cmd) {
      cmd_mesh(src, common, out);
    } else if (*solve_cmd) {
      cmd_solve(src, common, m0, mix, T, M, scheme, out);
    } else if (*edi_cmd) {
      cmd_edi(src, common, m0, mix, T, M, out);
    } else if (*gamma_cmd) {
      const MeshFamily fam = MeshFamily::parse(family);
      const Potential V = Potential::parse(common.potential);
      StudyResult res;
      if (affine) {
        res = gamma_affine_minimization_study(fam, parse_vec(z, "--z"), parse_vec(xi, "--xi"), eps);
      } else {
        GammaEnergyOptions opt;
        if (measure == "stationary") {
          opt.rule = MeasureRule::stationary;
        } else if (measure.rfind("projected:", 0) == 0) {
          opt.rule = MeasureRule::projected;
          opt.density = measure.substr(10);
        } else {
          throw InputError("--measure must be 'stationary' or 'projected:<density>'");
        }
        opt.kernel = parse_mean_kind(kernel);
        res = gamma_energy_study(fam, phi, V, opt);
      }
      finish_study(res, common, affine ? "gamma_affine" : "gamma", out);
    } else if (*conv_cmd) {
      const MeshFamily fam = MeshFamily::parse(family);
      const Potential V = Potential::parse(common.potential);
      if (study == "evolution") {
        finish_study(evolutionary_convergence_study(fam, V, rho0, T), common, "converge", out);
      } else if (study == "lower-bound") {
        finish_study(lower_bound_trend_study(fam, mu, eta, V), common, "lower_bound", out);
      } else {
        throw InputError("--study must be 'evolution' or 'lower-bound'");
      }
    } else if (*diag_cmd) {
      const Mesh mesh = load_source(src);
      const FvStructure s = make_structure(mesh, Potential::parse(common.potential));
      const DiscreteMeasure m = initial_measure(m0, mix, mesh, s);
      const Domain &dom = mesh.domain();
      Vec2 lo = dom.shape.vertices[0], hi = lo;
      for (const auto &p : dom.shape.vertices) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
      }
      const Vec2 centre = 0.5 * (lo + hi);
      const std::vector<Vec2> centres{dom.dim == 1 ? Vec2{centre.x, 0.0} : centre};
      const double span = hi.x - lo.x;
      const std::vector<double> eps_list{0.5 * span, 0.25 * span, 0.125 * span};
      const ConditionReport cond = condition_report(mesh, m, s.pi, centres, eps_list);
      const PathConstants pc = path_constants(mesh);
      const Vec2 h = shift.empty() ? Vec2{mesh.size(), 0.0} : parse_vec(shift, "--shift");
      const CellField f = project_function(mesh, make_function(field, dom).value);
      const HolderModulus hm =
          l2_holder_modulus(mesh, f, h, Box{lo, dom.dim == 1 ? Vec2{hi.x, 0.0} : hi}, m, s.pi);
      fs::create_directories(common.out);
      cond.bounds_table().save(fs::path(common.out) / "conditions.csv");
      cond.pc_table().save(fs::path(common.out) / "pc_profile.csv");
      CsvTable paths("path_constants", {"pairs", "c_count", "c_length", "invalid", "fallbacks"});
      paths.add_row({pc.pairs, pc.c_count, pc.c_length, pc.invalid, pc.fallbacks});
      paths.save(fs::path(common.out) / "path_constants.csv");
      CsvTable hol("holder_modulus", {"hx", "hy", "value", "bound", "ratio"});
      hol.add_row({h.x, h.y, hm.value, hm.bound, hm.ratio});
      hol.save(fs::path(common.out) / "holder.csv");
      out << "k_lower " << format_real(cond.k_lower) << "  k_upper " << format_real(cond.k_upper)
          << "  neighbour_osc " << format_real(cond.neighbour_osc) << "\n"
          << "C_count " << format_real(pc.c_count) << "  C_length " << format_real(pc.c_length) << "  pairs "
          << pc.pairs << "  fallbacks " << pc.fallbacks << "\n"
          << "holder value " << format_real(hm.value) << "  bound " << format_real(hm.bound) << "\n";
    }
  } catch (const CheckFailure &e) {
    err << "gradflow: " << e.what() << "\n";
    return kExitCheck;
  } catch (const InputError &e) {
    err << "gradflow: input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError &e) {
    err << "gradflow: invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error &e) {
    err << "gradflow: file error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception &e) {
    err << "gradflow: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

} // namespace gradflow::cli
