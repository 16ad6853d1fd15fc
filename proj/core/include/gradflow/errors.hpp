#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gradflow {

/// Invalid user input: malformed mesh specs, unknown names, bad files.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Mesh construction rejected; `index` locates the offending entry when known.
class MeshError : public InputError {
public:
  explicit MeshError(const std::string &what, std::ptrdiff_t index = -1)
      : InputError(what), index_(index) {}
  std::ptrdiff_t index() const noexcept { return index_; }

private:
  std::ptrdiff_t index_;
};

/// A precondition of a numerical operation does not hold for the given data.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative or direct solver failed; carries the final relative residual.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string &what, double residual)
      : std::runtime_error(what + " (relative residual " + format(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }
  double residual_;
};

} // namespace gradflow
