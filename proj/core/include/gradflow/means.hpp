#pragma once

// Two-variable means used for face averages and density kernels. Every kind
// satisfies min(a, b) <= mean(a, b) <= max(a, b) for a, b > 0.

#include <string>
#include <string_view>

namespace gradflow {

enum class MeanKind {
  min,
  max,
  arithmetic,
  geometric,
  harmonic,
  logarithmic,
  /// theta_log(sqrt a, sqrt b)^2, the kernel of the square-root Dirichlet identity.
  sqrt_log_squared,
};

/// Accepts "min", "max", "arithmetic", "geometric", "harmonic", "logarithmic"
/// (or "log"), "sqrt-log-squared". Throws InputError otherwise.
MeanKind parse_mean_kind(std::string_view name);
std::string to_string(MeanKind kind);

/// Logarithmic mean (a - b) / (log a - log b) with its continuous extensions.
/// Throws DomainError on negative arguments.
double log_mean(double a, double b);

double mean(MeanKind kind, double a, double b);

} // namespace gradflow
