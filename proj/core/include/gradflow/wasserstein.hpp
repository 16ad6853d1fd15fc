#pragma once

// Quadratic Wasserstein distance between piecewise-constant densities on an
// interval, through the quantile representation.

#include "gradflow/reference.hpp"

#include <functional>
#include <span>
#include <vector>

namespace gradflow {

/// Density `values[i]` on [breakpoints[i], breakpoints[i+1]].
struct PiecewiseDensity {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double mass() const;
};

/// Throws DomainError on negative values or when a mass differs from 1 by
/// more than 1e-10.
double wasserstein_1d(const PiecewiseDensity &p, const PiecewiseDensity &q);

/// Q_T m on an interval mesh.
PiecewiseDensity piecewise_density(const Mesh &mesh, const DiscreteMeasure &m);

/// Cell averages of a density on n uniform cells of [a, b] (3-point Gauss per
/// cell), rescaled to unit mass.
PiecewiseDensity average_density(const std::function<double(double)> &rho, double a, double b, int n);

} // namespace gradflow
