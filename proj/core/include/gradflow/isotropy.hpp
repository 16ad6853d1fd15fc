#pragma once

// Second-moment isotropy defect of the weighted neighbour graph.

#include "gradflow/reference.hpp"

namespace gradflow {

/// Per cell: max(lambda_max(M_K / pi(K) - I), 0),
/// M_K = 1/2 sum_L w_KL (x_K - x_L) (x_K - x_L)^T.
/// Throws DomainError when pi vanishes on a cell.
CellField isotropy_defect(const Mesh &mesh, const FaceWeights &weights, const DiscreteMeasure &pi);

/// Largest entry of isotropy_defect; 0 for an empty mesh.
double max_isotropy_defect(const Mesh &mesh, const FaceWeights &weights, const DiscreteMeasure &pi);

} // namespace gradflow
