#pragma once

// Onsager operator B(m) and the dual action
//   A*(m, sigma) = sup_f { <sigma, f> - A(m, f) },
// evaluated as 1/2 <sigma, f> with B f = sigma.
//
// B is normalised so that <f, B f> = 2 A(m, f); its rows are
// (B f)(K) = sum_L theta(r_K, r_L) w_KL (f(K) - f(L)).

#include "gradflow/extended_real.hpp"
#include "gradflow/reference.hpp"
#include "gradflow/sparse.hpp"

#include <span>
#include <string>

namespace gradflow {

struct OnsagerOperator {
  CsrMatrix matrix;
  /// Connected component of each cell in the graph of faces with
  /// theta * w > 0; -1 for cells with no such face.
  std::vector<int> components;
  int num_components = 0;

  /// B f
  CellField apply(std::span<const double> f) const;
};

OnsagerOperator assemble_onsager(const FvStructure &s, const DiscreteMeasure &m,
                                 MeanKind kernel = MeanKind::logarithmic);

struct DualSolution {
  ExtendedReal value;
  /// Potential with B f = sigma, mean zero per component; empty when infinite.
  CellField potential;
  int iterations = 0;
  double residual = 0.0;
  /// Set when the value is infinite.
  std::string diagnostic;
};

/// Throws SolverError when CG does not meet the tolerance.
DualSolution dual_solve(const OnsagerOperator &op, std::span<const double> sigma);

ExtendedReal dual_action(const FvStructure &s, const DiscreteMeasure &m, std::span<const double> sigma,
                         MeanKind kernel = MeanKind::logarithmic);

} // namespace gradflow
