#include "gradflow/isotropy.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gradflow {

CellField isotropy_defect(const Mesh &mesh, const FaceWeights &weights, const DiscreteMeasure &pi) {
  const std::size_t n = mesh.num_cells();
  if (pi.size() != n || weights.w.size() != mesh.num_faces()) {
    throw DomainError("isotropy_defect: weights or reference measure do not match the mesh");
  }
  // Symmetric second moments (xx, xy, yy) per cell.
  std::vector<double> mxx(n, 0.0), mxy(n, 0.0), myy(n, 0.0);
  const auto &faces = mesh.faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const Vec2 dx = mesh.cell(faces[e].k).site - mesh.cell(faces[e].l).site;
    const double h = 0.5 * weights.w[e];
    for (int c : {faces[e].k, faces[e].l}) {
      mxx[c] += h * dx.x * dx.x;
      mxy[c] += h * dx.x * dx.y;
      myy[c] += h * dx.y * dx.y;
    }
  }
  CellField out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(pi[k] > 0.0)) throw DomainError("isotropy_defect: reference measure vanishes at cell " + std::to_string(k));
    double lmax = 0.0;
    if (mesh.dim() == 1) {
      lmax = mxx[k] / pi[k];
    } else {
      const double a = mxx[k] / pi[k], b = mxy[k] / pi[k], c = myy[k] / pi[k];
      lmax = 0.5 * (a + c) + std::hypot(0.5 * (a - c), b);
    }
    out[k] = std::max(lmax - 1.0, 0.0);
  }
  return out;
}

double max_isotropy_defect(const Mesh &mesh, const FaceWeights &weights, const DiscreteMeasure &pi) {
  const CellField d = isotropy_defect(mesh, weights, pi);
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

} // namespace gradflow
