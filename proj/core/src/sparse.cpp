#include "gradflow/sparse.hpp"

#include "gradflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gradflow {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int p = offsets[i]; p < offsets[i + 1]; ++p) s += values[p] * x[columns[p]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int p = offsets[i]; p < offsets[i + 1]; ++p) {
      if (static_cast<std::size_t>(columns[p]) == i) d[i] += values[p];
    }
  }
  return d;
}

CsrMatrix csr_from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet &a, const Triplet &b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.n = n;
  m.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < triplets.size();) {
    const auto &t = triplets[i];
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n) {
      throw DomainError("csr_from_triplets: index out of range");
    }
    double v = 0.0;
    std::size_t j = i;
    for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j) v += triplets[j].value;
    m.columns.push_back(t.col);
    m.values.push_back(v);
    ++m.offsets[t.row + 1];
    i = j;
  }
  for (std::size_t i = 0; i < n; ++i) m.offsets[i + 1] += m.offsets[i];
  return m;
}

namespace {

// CG runs in extended precision: on chains with kappa ~ n^2 the double
// rounding floor of the true residual sits near 1e-12 relative.
using Real = long double;

Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void multiply(const CsrMatrix &a, std::span<const Real> x, std::span<Real> y) {
  for (std::size_t i = 0; i < a.n; ++i) {
    Real s = 0.0L;
    for (int p = a.offsets[i]; p < a.offsets[i + 1]; ++p) s += static_cast<Real>(a.values[p]) * x[a.columns[p]];
    y[i] = s;
  }
}

class Projector {
public:
  explicit Projector(std::span<const int> labels) : labels_(labels) {
    int count = 0;
    for (int c : labels) count = std::max(count, c + 1);
    sizes_.assign(count, 0.0L);
    for (int c : labels) {
      if (c >= 0) sizes_[c] += 1.0L;
    }
    sums_.resize(count);
  }

  void apply(std::span<Real> v) {
    if (labels_.empty()) return;
    std::fill(sums_.begin(), sums_.end(), 0.0L);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (labels_[i] >= 0) sums_[labels_[i]] += v[i];
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = labels_[i] >= 0 ? v[i] - sums_[labels_[i]] / sizes_[labels_[i]] : 0.0L;
    }
  }

private:
  std::span<const int> labels_;
  std::vector<Real> sizes_;
  std::vector<Real> sums_;
};

} // namespace

CgResult conjugate_gradient(const CsrMatrix &a, std::span<const double> b, std::span<double> x_out,
                            const CgOptions &options, std::span<const int> components) {
  const std::size_t n = a.n;
  if (b.size() != n || x_out.size() != n || (!components.empty() && components.size() != n)) {
    throw DomainError("conjugate_gradient: size mismatch");
  }
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(10 * n);
  Projector project(components);

  const std::vector<double> diag = a.diagonal();
  std::vector<Real> inv_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool pinned = !components.empty() && components[i] < 0;
    inv_diag[i] = (diag[i] > 0.0 && !pinned) ? 1.0L / diag[i] : 0.0L;
  }

  std::vector<Real> rhs(b.begin(), b.end()), x(x_out.begin(), x_out.end());
  project.apply(rhs);
  project.apply(x);

  CgResult result;
  const Real bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0L) {
    std::fill(x_out.begin(), x_out.end(), 0.0);
    result.converged = true;
    return result;
  }

  std::vector<Real> r(n), z(n), p(n), q(n);
  auto true_residual = [&] {
    multiply(a, x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
    project.apply(r);
    return std::sqrt(dot(r, r));
  };

  // The recurrence residual drifts from the true one; restart from the
  // current iterate until the true residual meets the tolerance.
  const Real target = static_cast<Real>(options.relative_tolerance) * bnorm;
  Real rnorm = true_residual();
  int used = 0;
  for (int restart = 0; restart < 4 && rnorm > target && used < max_iter; ++restart) {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    project.apply(z);
    p = z;
    Real rz = dot(r, z);
    while (used < max_iter && rnorm > target) {
      multiply(a, p, q);
      project.apply(q);
      const Real pq = dot(p, q);
      if (!(pq > 0.0L)) break;
      const Real alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      project.apply(z);
      const Real rz_new = dot(r, z);
      const Real beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      rnorm = std::sqrt(dot(r, r));
      ++used;
    }
    rnorm = true_residual();
  }
  for (std::size_t i = 0; i < n; ++i) x_out[i] = static_cast<double>(x[i]);
  result.iterations = used;
  result.relative_residual = static_cast<double>(rnorm / bnorm);
  result.converged = rnorm <= target;
  return result;
}

} // namespace gradflow
