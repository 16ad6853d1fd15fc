#pragma once

// Convergence studies over mesh families: Dirichlet-energy convergence,
// affine cell problems, the EDI audit, convergence of discrete flows, and
// lower-bound trends for entropy, Fisher information and dual action.

#include "gradflow/diagnostics.hpp"
#include "gradflow/dual_action.hpp"
#include "gradflow/dynamics.hpp"
#include "gradflow/functionals.hpp"
#include "gradflow/io.hpp"
#include "gradflow/isotropy.hpp"
#include "gradflow/wasserstein.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gradflow {

// ---------------------------------------------------------------- threads

/// GRADFLOW_THREADS when set and positive, else the hardware concurrency.
unsigned thread_count();

/// Runs fn(0..n-1) on up to thread_count() threads. Each index writes its own
/// slot, so results do not depend on scheduling. The exception of the lowest
/// failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn);

// ---------------------------------------------------------------- families

enum class FamilyKind {
  /// n uniform cells of [0, 1].
  uniform1d,
  /// n x n squares of the unit square.
  cartesian,
  /// Voronoi cells of an n x n jittered lattice (jitter 0.3 h, seeded).
  voronoi,
  /// Voronoi cells of a staggered n x 4n lattice: cells four times wider than tall.
  flattened,
};

struct MeshFamily {
  FamilyKind kind = FamilyKind::uniform1d;
  std::vector<int> sizes;
  std::uint64_t seed = 42;

  /// "kind:a..b" (doubling from a up to b) or "kind:a,b,c".
  static MeshFamily parse(std::string_view spec);
  std::string name() const;
  int dim() const { return kind == FamilyKind::uniform1d ? 1 : 2; }

  Mesh build(int size) const;
  /// Members in order; throws InputError unless [T] strictly decreases.
  std::vector<Mesh> build_all() const;
};

FamilyKind parse_family_kind(std::string_view name);
std::string to_string(FamilyKind kind);

// ---------------------------------------------------------------- results

struct StudyRow {
  double mesh_size = 0.0;
  std::size_t cells = 0;
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;
  /// log(e_i / e_{i+1}) / log([T]_i / [T]_{i+1}) against the previous row; NaN on the first.
  double order = 0.0;
  std::vector<double> extra;
};

struct StudyRule {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct StudyResult {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::string> extra_columns;
  std::vector<StudyRow> rows;
  std::vector<StudyRule> rules;

  void compute_orders();
  double extra(std::size_t row, std::string_view column) const;
  bool passed() const;

  CsvTable table() const;
  std::string summary_json() const;
};

// ---------------------------------------------------------------- studies

enum class MeasureRule { stationary, projected };
MeasureRule parse_measure_rule(std::string_view name);

struct GammaEnergyOptions {
  MeasureRule rule = MeasureRule::stationary;
  /// Named density for the projected rule.
  std::string density = "cosine";
  MeanKind kernel = MeanKind::logarithmic;
};

/// F_N(P_N phi) against 1/2 int |grad phi|^2 dmu. Extra columns: zeta,
/// isotropy_defect.
StudyResult gamma_energy_study(const MeshFamily &family, std::string_view phi, const Potential &V,
                               const GammaEnergyOptions &options = {});

/// Affine data f(K) = <xi, x_K - z> on the cube Q_eps(z), m = pi, V = 0.
/// value = F_N(f, Q_eps), reference = eps^d |xi|^2 / 2. Extra columns:
/// harmonic_residual, boundary_layer, literal_gap (|value - eps^d |xi|^2|).
/// Throws DomainError unless the closed cube lies inside the open domain.
StudyResult gamma_affine_minimization_study(const MeshFamily &family, Vec2 z, Vec2 xi, double eps);

/// |B(boundary of Q_eps(z), r) cap domain|; exact in one dimension, on a
/// `grid` x `grid` midpoint lattice in two.
double boundary_layer_volume(const Domain &domain, Vec2 z, double eps, double r, int grid = 1024);

struct EdiReport {
  double h0 = 0.0;
  double hT = 0.0;
  double action_integral = 0.0;
  double fisher_integral = 0.0;
  /// H0 - HT - (action + fisher) with M Simpson intervals.
  double residual = 0.0;
  /// Same with 2M intervals.
  double residual_refined = 0.0;
  /// Richardson estimate 16/15 |residual - residual_refined|.
  double tol_q = 0.0;
  /// max over nodes |A*(m, dm/dt) - I(m)/2| / (1 + I(m)).
  double identity_defect = 0.0;
  int intervals = 0;
  /// Integrand values on the M grid.
  std::vector<double> times;
  std::vector<double> dual;
  std::vector<double> half_fisher;

  CsvTable table() const;
  std::string summary_json(bool check_passed) const;
};

/// Exact flow from m0 (at most 400 cells) sampled on 2M + 1 nodes. M must be even.
/// Throws DomainError when m0 vanishes on a cell.
EdiReport edi_audit(const FvStructure &s, const DiscreteMeasure &m0, double T, int M);

/// Sup over a 17-node t-grid of the solution error: W2 in one dimension, L1
/// of the density in two. Extra columns: entropy_excess (max_t of
/// (H_N - H)^+), entropy_gap, fisher_integral, fisher_integral_ref,
/// dual_integral, zeta.
StudyResult evolutionary_convergence_study(const MeshFamily &family, const Potential &V,
                                           std::string_view rho0, double T);

/// m_N = P_N mu and e_N = P_N eta (mean-corrected). value = H_N,
/// reference = H(mu). Extra columns: fisher, fisher_ref, dual, dual_ref.
/// The dual reference is solved in closed form in one dimension only (NaN otherwise).
StudyResult lower_bound_trend_study(const MeshFamily &family, std::string_view mu, std::string_view eta,
                                    const Potential &V);

/// Continuum dual action 1/2 int J^2 / p on an interval, J(x) = int_a^x eta,
/// p the Lebesgue density of mu; `cells` uniform cells with 3-point Gauss.
double continuum_dual_action_1d(const std::function<double(double)> &p, const std::function<double(double)> &eta,
                                double a, double b, int cells = 4096);

} // namespace gradflow
