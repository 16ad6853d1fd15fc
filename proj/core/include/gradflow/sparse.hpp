#pragma once

// Compressed-row symmetric matrices and a Jacobi-preconditioned conjugate
// gradient solver. All reductions run in index order.

#include <cstddef>
#include <span>
#include <vector>

namespace gradflow {

struct CsrMatrix {
  std::size_t n = 0;
  std::vector<int> offsets; // n + 1 entries
  std::vector<int> columns;
  std::vector<double> values;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
};

/// Builds a CSR matrix from (row, col, value) triplets; duplicates are summed.
struct Triplet {
  int row;
  int col;
  double value;
};
CsrMatrix csr_from_triplets(std::size_t n, std::vector<Triplet> triplets);

struct CgOptions {
  double relative_tolerance = 1e-12;
  /// 0 selects 10 * n.
  int max_iterations = 0;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves A x = b for symmetric positive (semi)definite A, starting from x.
///
/// With `components`, A is assumed singular with kernel spanned by the
/// indicator vectors of each component label >= 0; iterates are kept
/// mean-zero per component. Unknowns labelled -1 are pinned to zero.
/// b must be balanced on each component.
CgResult conjugate_gradient(const CsrMatrix &a, std::span<const double> b, std::span<double> x,
                            const CgOptions &options = {}, std::span<const int> components = {});

} // namespace gradflow
