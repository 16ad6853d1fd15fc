#include "gradflow/means.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gradflow {

MeanKind parse_mean_kind(std::string_view name) {
  if (name == "min") return MeanKind::min;
  if (name == "max") return MeanKind::max;
  if (name == "arithmetic") return MeanKind::arithmetic;
  if (name == "geometric") return MeanKind::geometric;
  if (name == "harmonic") return MeanKind::harmonic;
  if (name == "logarithmic" || name == "log") return MeanKind::logarithmic;
  if (name == "sqrt-log-squared") return MeanKind::sqrt_log_squared;
  throw InputError("unknown mean kind '" + std::string(name) + "'");
}

std::string to_string(MeanKind kind) {
  switch (kind) {
  case MeanKind::min: return "min";
  case MeanKind::max: return "max";
  case MeanKind::arithmetic: return "arithmetic";
  case MeanKind::geometric: return "geometric";
  case MeanKind::harmonic: return "harmonic";
  case MeanKind::logarithmic: return "logarithmic";
  case MeanKind::sqrt_log_squared: return "sqrt-log-squared";
  }
  return "unknown";
}

double log_mean(double a, double b) {
  if (a < 0.0 || b < 0.0 || std::isnan(a) || std::isnan(b)) {
    throw DomainError("log_mean: arguments must be nonnegative");
  }
  if (a == b) return a;
  if (a == 0.0 || b == 0.0) return 0.0;
  const double hi = std::max(a, b);
  if (std::abs(a - b) <= 1e-4 * hi) {
    // m u / artanh(u), with artanh(u)/u = 1 + u^2/3 + u^4/5 + u^6/7 + O(u^8).
    const double m = 0.5 * (a + b);
    const double u = (a - b) / (a + b);
    const double u2 = u * u;
    return m / (1.0 + u2 * (1.0 / 3.0 + u2 * (1.0 / 5.0 + u2 * (1.0 / 7.0))));
  }
  if (a <= 2.0 * b && b <= 2.0 * a) {
    // a - b is exact here; log1p avoids the cancellation in log a - log b.
    return (a - b) / std::log1p((a - b) / b);
  }
  return (a - b) / (std::log(a) - std::log(b));
}

namespace {

double raw_mean(MeanKind kind, double a, double b) {
  switch (kind) {
  case MeanKind::min: return std::min(a, b);
  case MeanKind::max: return std::max(a, b);
  case MeanKind::arithmetic: return 0.5 * (a + b);
  case MeanKind::geometric: return std::sqrt(a * b);
  case MeanKind::harmonic: return (a + b) > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
  case MeanKind::logarithmic: return log_mean(a, b);
  case MeanKind::sqrt_log_squared: {
    const double t = log_mean(std::sqrt(a), std::sqrt(b));
    return t * t;
  }
  }
  return 0.0;
}

} // namespace

double mean(MeanKind kind, double a, double b) {
  // Rounding may push a value one ulp outside [min, max].
  return std::clamp(raw_mean(kind, a, b), std::min(a, b), std::max(a, b));
}

} // namespace gradflow
