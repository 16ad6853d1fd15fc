#pragma once

// Discretisation of the reference measure e^{-V} dx / Z_V, face weights, and
// the projection / embedding operators between continuous and discrete data.

#include "gradflow/means.hpp"
#include "gradflow/mesh.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gradflow {

/// Real value per cell.
using CellField = std::vector<double>;

/// Potential V on the domain closure, selected by name.
class Potential {
public:
  Potential(std::string name, std::function<double(const Vec2 &)> fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}

  static Potential zero();
  /// V(x) = a . x
  static Potential linear(Vec2 slope);
  /// V(x) = strength |x - c|^2 / 2
  static Potential quadratic(Vec2 center, double strength = 1.0);
  /// V(x) = depth ((x_1 - c)^2 / w^2 - 1)^2
  static Potential double_well(double center, double width, double depth = 1.0);

  /// "zero", "linear:a1[,a2]", "quadratic:c1[,c2][;k]", "double-well:c,w[,depth]".
  static Potential parse(std::string_view spec);

  double operator()(const Vec2 &x) const { return fn_(x); }
  const std::string &name() const { return name_; }

private:
  std::string name_;
  std::function<double(const Vec2 &)> fn_;
};

/// Nonnegative masses per cell summing to one.
class DiscreteMeasure {
public:
  DiscreteMeasure() = default;
  /// Validates m >= 0 and |sum - 1| <= 1e-12; throws DomainError otherwise.
  explicit DiscreteMeasure(std::vector<double> masses);

  /// Clips negatives above -clip_tol to zero and rescales to unit mass.
  static DiscreteMeasure normalized(std::vector<double> weights, double clip_tol = 0.0);
  static DiscreteMeasure uniform(std::size_t n);
  /// (1 - lambda) a + lambda b
  static DiscreteMeasure mix(const DiscreteMeasure &a, const DiscreteMeasure &b, double lambda);

  std::size_t size() const { return masses_.size(); }
  double operator[](std::size_t k) const { return masses_[k]; }
  std::span<const double> masses() const { return masses_; }
  const std::vector<double> &values() const { return masses_; }

private:
  std::vector<double> masses_;
};

/// Densities r = m / pi, cellwise.
CellField density_ratio(const DiscreteMeasure &m, const DiscreteMeasure &pi);

/// Cell quadrature. order 0 selects the default: 5-point Gauss for d=1, the
/// centroid rule on the fan triangulation for d=2. order 1 is the centroid
/// rule; order k >= 2 is a Gauss rule on (k-1)-fold subdivided pieces.
struct Quadrature {
  int order = 0;
};

double integrate_cell(const Mesh &mesh, std::size_t k, const std::function<double(const Vec2 &)> &fn,
                      Quadrature quad = {});

/// Z_V = sum_K int_K e^{-V}.
double normalizing_constant(const Mesh &mesh, const Potential &V, Quadrature quad = {});

DiscreteMeasure discretize_reference(const Mesh &mesh, const Potential &V, Quadrature quad = {});

struct FaceWeights {
  MeanKind kind = MeanKind::logarithmic;
  /// w_KL, aligned with mesh.faces().
  std::vector<double> w;
  /// S_KL = mean(sigma(x_K), sigma(x_L)).
  std::vector<double> S;
  /// sigma(x_K) = e^{-V(x_K)} / Z_V.
  std::vector<double> sigma;
};

/// Throws InputError for sqrt_log_squared, which is a density kernel only.
FaceWeights face_weights(const Mesh &mesh, const Potential &V, MeanKind kind = MeanKind::logarithmic,
                         Quadrature quad = {});

/// Mesh, reference measure and weights bundled for the functionals.
/// Holds a pointer to `mesh`, which must outlive the structure.
struct FvStructure {
  const Mesh *mesh = nullptr;
  DiscreteMeasure pi;
  FaceWeights weights;
  std::string potential_name;
};

FvStructure make_structure(const Mesh &mesh, const Potential &V,
                           MeanKind kind = MeanKind::logarithmic, Quadrature quad = {});

/// Probability density with respect to Lebesgue measure.
struct Density {
  std::string name;
  std::function<double(const Vec2 &)> fn;

  double operator()(const Vec2 &x) const { return fn(x); }
};

/// "uniform", "cosine", "ramp" on an interval or axis-aligned rectangle,
/// normalised in closed form.
Density make_density(std::string_view name, const Domain &domain);

/// P_T: m(K) = int_K rho. Checks nonnegativity and total mass (|1 - sum| <= mass_tol).
DiscreteMeasure project_measure(const Mesh &mesh, const Density &rho, Quadrature quad = {4},
                                double mass_tol = 1e-8);
/// Projection of a signed density onto cell integrals, no normalisation.
CellField project_signed(const Mesh &mesh, const std::function<double(const Vec2 &)> &eta,
                         Quadrature quad = {4});

/// Q_T: density value m(K)/|K| on cell K.
CellField embed_measure(const Mesh &mesh, const DiscreteMeasure &m);

/// P_T on functions: point values at the sites.
CellField project_function(const Mesh &mesh, const std::function<double(const Vec2 &)> &phi);

/// Index of the cell containing p (lowest index on shared boundaries), or -1.
int locate_cell(const Mesh &mesh, const Vec2 &p);

/// Q_T on functions: the piecewise-constant extension of f.
class PiecewiseConstant {
public:
  PiecewiseConstant(const Mesh &mesh, CellField values) : mesh_(&mesh), values_(std::move(values)) {}
  double operator()(const Vec2 &p) const;
  const CellField &values() const { return values_; }

private:
  const Mesh *mesh_;
  CellField values_;
};

PiecewiseConstant embed_function(const Mesh &mesh, CellField f);

} // namespace gradflow
