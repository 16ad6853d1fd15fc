#include "gradflow/dual_action.hpp"

#include "gradflow/errors.hpp"

#include <cmath>
#include <numeric>

namespace gradflow {

CellField OnsagerOperator::apply(std::span<const double> f) const {
  CellField out(matrix.n);
  matrix.multiply(f, out);
  return out;
}

namespace {

int find_root(std::vector<int> &parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

} // namespace

OnsagerOperator assemble_onsager(const FvStructure &s, const DiscreteMeasure &m, MeanKind kernel) {
  const CellField r = density_ratio(m, s.pi);
  const std::size_t n = r.size();
  if (s.mesh == nullptr || s.mesh->num_cells() != n) throw DomainError("assemble_onsager: size mismatch");
  const auto &faces = s.mesh->faces();

  std::vector<Triplet> trip;
  trip.reserve(4 * faces.size() + n);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> active(n, 0);
  for (std::size_t k = 0; k < n; ++k) trip.push_back({static_cast<int>(k), static_cast<int>(k), 0.0});
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const int k = faces[e].k, l = faces[e].l;
    const double c = mean(kernel, r[k], r[l]) * s.weights.w[e];
    if (!(c > 0.0)) continue;
    trip.push_back({k, k, c});
    trip.push_back({l, l, c});
    trip.push_back({k, l, -c});
    trip.push_back({l, k, -c});
    active[k] = active[l] = 1;
    const int a = find_root(parent, k), b = find_root(parent, l);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  OnsagerOperator op;
  op.matrix = csr_from_triplets(n, std::move(trip));
  op.components.assign(n, -1);
  std::vector<int> label(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    if (!active[k]) continue;
    const int root = find_root(parent, static_cast<int>(k));
    if (label[root] < 0) label[root] = op.num_components++;
    op.components[k] = label[root];
  }
  return op;
}

DualSolution dual_solve(const OnsagerOperator &op, std::span<const double> sigma) {
  const std::size_t n = op.matrix.n;
  if (sigma.size() != n) throw DomainError("dual_action: sigma does not match the mesh");
  DualSolution out;

  double norm2 = 0.0;
  for (double v : sigma) norm2 += v * v;
  const double norm = std::sqrt(norm2);
  if (norm == 0.0) {
    out.value = ExtendedReal(0.0);
    out.potential.assign(n, 0.0);
    return out;
  }

  // sigma must vanish on every component of the kernel of B.
  std::vector<double> sums(op.num_components, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (op.components[k] >= 0) {
      sums[op.components[k]] += sigma[k];
    } else if (std::abs(sigma[k]) > 1e-8 * norm) {
      out.value = ExtendedReal::infinity();
      out.diagnostic = "sigma charges cell " + std::to_string(k) + ", which carries no mobility";
      return out;
    }
  }
  for (int c = 0; c < op.num_components; ++c) {
    if (std::abs(sums[c]) > 1e-8 * norm) {
      out.value = ExtendedReal::infinity();
      out.diagnostic = "sigma is unbalanced on component " + std::to_string(c) + " (sum " +
                       std::to_string(sums[c]) + ")";
      return out;
    }
  }

  out.potential.assign(n, 0.0);
  const CgResult cg = conjugate_gradient(op.matrix, sigma, out.potential, {}, op.components);
  out.iterations = cg.iterations;
  out.residual = cg.relative_residual;
  if (!cg.converged) throw SolverError("dual_action: conjugate gradient did not converge", cg.relative_residual);

  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (op.components[k] >= 0) s += sigma[k] * out.potential[k];
  }
  out.value = ExtendedReal(std::max(0.5 * s, 0.0));
  return out;
}

ExtendedReal dual_action(const FvStructure &s, const DiscreteMeasure &m, std::span<const double> sigma,
                         MeanKind kernel) {
  return dual_solve(assemble_onsager(s, m, kernel), sigma).value;
}

} // namespace gradflow
