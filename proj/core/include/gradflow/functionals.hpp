#pragma once

// Discrete entropy, action, Fisher information and Dirichlet energies, plus
// quadrature evaluations of their continuum counterparts for smooth data.
//
// All face sums run in face order, so results are reproducible bit for bit.

#include "gradflow/extended_real.hpp"
#include "gradflow/reference.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string_view>

namespace gradflow {

/// Open axis-aligned box; in one dimension only the x-range is used.
struct Box {
  Vec2 lo;
  Vec2 hi;
};

/// sum_K m(K) log(m(K)/pi(K)) with 0 log 0 = 0.
double entropy(const DiscreteMeasure &m, const DiscreteMeasure &pi);

/// 1/2 sum_faces (f_K - f_L)^2 kernel(r_K, r_L) w_KL, r = m / pi.
double action(const FvStructure &s, const DiscreteMeasure &m, std::span<const double> f,
              MeanKind kernel = MeanKind::logarithmic);

/// Same form with an explicit cell density r in place of m / pi.
double action_with_density(const FvStructure &s, std::span<const double> r, std::span<const double> f,
                           MeanKind kernel = MeanKind::logarithmic);

/// 2 A(m, -log r). +inf when a face joins an empty cell to an occupied one.
ExtendedReal fisher(const FvStructure &s, const DiscreteMeasure &m);

struct FisherDirichletGap {
  double half_fisher = 0.0;    // I(m) / 2
  double dirichlet_sqrt = 0.0; // 4 E(sqrt r), E(f) = A(pi, f)
  double gap = 0.0;            // |I/2 - 4 E(sqrt r)|
  double bound = 0.0;          // (4 eps / k_lower) E(sqrt r)
};

/// Requires m > 0 on every cell; throws DomainError otherwise.
FisherDirichletGap fisher_sqrt_gap(const FvStructure &s, const DiscreteMeasure &m);

/// 1/4 sum over ordered neighbour pairs in T|_A of (f_K - f_L)^2 U_KL |Gamma|/d,
/// U_KL = kernel(m(K)/|K|, m(L)/|L|). Without `region` every cell is selected.
double dirichlet_energy(const Mesh &mesh, const DiscreteMeasure &m, std::span<const double> f,
                        MeanKind kernel = MeanKind::logarithmic,
                        const std::optional<Box> &region = std::nullopt);

/// Cells whose closure meets the open region (all cells when absent).
std::vector<int> restrict_cells(const Mesh &mesh, const std::optional<Box> &region);

// ---------------------------------------------------------------- continuum

struct SmoothFunction {
  std::string name;
  std::function<double(const Vec2 &)> value;
  /// Optional analytic gradient; central differences (h = 1e-6) otherwise.
  std::function<Vec2(const Vec2 &)> gradient;

  Vec2 grad(const Vec2 &x, int dim) const;
};

/// "const", "x", "y", "cos" (cos(pi s) in the first coordinate), "coscos".
SmoothFunction make_function(std::string_view name, const Domain &domain);

/// Tensor Gauss quadrature (3 points per panel) over the domain's bounding
/// box; points outside a polygonal domain are dropped.
double integrate_domain(const Domain &domain, const std::function<double(const Vec2 &)> &fn,
                        int panels = 512);

/// Continuum reference density sigma = e^{-V} / Z_V.
struct ContinuumReference {
  Potential potential;
  double z = 1.0;
  double sigma(const Vec2 &x) const { return std::exp(-potential(x)) / z; }
};

ContinuumReference make_continuum_reference(const Domain &domain, const Potential &V, int panels = 512);

/// 1/2 int |grad phi|^2 density dx.
double continuous_dirichlet(const SmoothFunction &phi, const std::function<double(const Vec2 &)> &density,
                            const Domain &domain, int panels = 512);

/// int rho log(rho / sigma) dx.
double continuous_entropy(const std::function<double(const Vec2 &)> &rho, const ContinuumReference &ref,
                          const Domain &domain, int panels = 512);

/// 4 int |grad sqrt(rho/sigma)|^2 sigma dx, gradient by central differences.
double continuous_fisher(const std::function<double(const Vec2 &)> &rho, const ContinuumReference &ref,
                         const Domain &domain, int panels = 512);

} // namespace gradflow
