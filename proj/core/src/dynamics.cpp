#include "gradflow/dynamics.hpp"

#include "gradflow/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace gradflow {

namespace {

constexpr double kClip = 1e-12;

} // namespace

Generator::Generator(const Mesh &mesh, CellField pi, std::vector<double> w)
    : mesh_(&mesh), pi_(std::move(pi)), w_(std::move(w)) {
  const std::size_t n = mesh.num_cells();
  if (pi_.size() != n || w_.size() != mesh.num_faces()) throw DomainError("generator: size mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(pi_[k] > 0.0)) throw DomainError("generator: reference measure vanishes at cell " + std::to_string(k));
  }
  std::vector<Triplet> trip;
  trip.reserve(n + 4 * w_.size());
  for (std::size_t k = 0; k < n; ++k) trip.push_back({static_cast<int>(k), static_cast<int>(k), 0.0});
  tridiagonal_ = mesh.dim() == 1;
  const auto &faces = mesh.faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const int k = faces[e].k, l = faces[e].l;
    trip.push_back({k, l, w_[e] / pi_[l]});
    trip.push_back({l, k, w_[e] / pi_[k]});
    trip.push_back({k, k, -w_[e] / pi_[k]});
    trip.push_back({l, l, -w_[e] / pi_[l]});
    if (std::abs(k - l) != 1) tridiagonal_ = false;
  }
  matrix_ = csr_from_triplets(n, std::move(trip));
}

CellField Generator::apply(std::span<const double> m) const {
  if (m.size() != size()) throw DomainError("generator: field size mismatch");
  // Flux form keeps sum(L m) at round-off level.
  CellField out(size(), 0.0);
  const auto &faces = mesh_->faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const int k = faces[e].k, l = faces[e].l;
    const double flux = w_[e] * (m[l] / pi_[l] - m[k] / pi_[k]);
    out[k] += flux;
    out[l] -= flux;
  }
  return out;
}

CsrMatrix Generator::shifted_operator(double c) const {
  const std::size_t n = size();
  std::vector<Triplet> trip;
  trip.reserve(n + 4 * w_.size());
  for (std::size_t k = 0; k < n; ++k) trip.push_back({static_cast<int>(k), static_cast<int>(k), pi_[k]});
  const auto &faces = mesh_->faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const int k = faces[e].k, l = faces[e].l;
    const double v = c * w_[e];
    trip.push_back({k, k, v});
    trip.push_back({l, l, v});
    trip.push_back({k, l, -v});
    trip.push_back({l, k, -v});
  }
  return csr_from_triplets(n, std::move(trip));
}

Generator assemble_generator(const FvStructure &s) {
  if (s.mesh == nullptr) throw DomainError("assemble_generator: structure has no mesh");
  return Generator(*s.mesh, s.pi.values(), s.weights.w);
}

Scheme parse_scheme(std::string_view name) {
  if (name == "auto") return Scheme::automatic;
  if (name == "implicit-euler") return Scheme::implicit_euler;
  if (name == "crank-nicolson") return Scheme::crank_nicolson;
  if (name == "exact") return Scheme::exact_dense;
  throw InputError("unknown scheme '" + std::string(name) + "'");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
  case Scheme::automatic: return "auto";
  case Scheme::implicit_euler: return "implicit-euler";
  case Scheme::crank_nicolson: return "crank-nicolson";
  case Scheme::exact_dense: return "exact";
  }
  return "auto";
}

namespace {

/// Solves (D + c W') r = rhs.
CellField solve_shifted(const Generator &gen, double c, std::span<const double> rhs) {
  const std::size_t n = gen.size();
  CellField r(n, 0.0);
  if (gen.tridiagonal()) {
    // Thomas algorithm; the matrix is a diagonally dominant M-matrix.
    std::vector<double> diag(gen.pi()), off(n > 0 ? n - 1 : 0, 0.0);
    const auto &faces = gen.mesh().faces();
    for (std::size_t e = 0; e < faces.size(); ++e) {
      const int k = std::min(faces[e].k, faces[e].l);
      const double v = c * gen.weights()[e];
      diag[k] += v;
      diag[k + 1] += v;
      off[k] -= v;
    }
    std::vector<double> cp(n, 0.0), dp(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double lower = i > 0 ? off[i - 1] : 0.0;
      const double denom = diag[i] - (i > 0 ? lower * cp[i - 1] : 0.0);
      cp[i] = i + 1 < n ? off[i] / denom : 0.0;
      dp[i] = (rhs[i] - (i > 0 ? lower * dp[i - 1] : 0.0)) / denom;
    }
    for (std::size_t i = n; i-- > 0;) r[i] = dp[i] - (i + 1 < n ? cp[i] * r[i + 1] : 0.0);
    return r;
  }
  const CsrMatrix a = gen.shifted_operator(c);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] / gen.pi()[k];
  const CgResult cg = conjugate_gradient(a, rhs, r);
  if (!cg.converged) throw SolverError("time step: conjugate gradient did not converge", cg.relative_residual);
  return r;
}

DiscreteMeasure from_density(const Generator &gen, const CellField &r) {
  std::vector<double> m(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) m[k] = gen.pi()[k] * r[k];
  return DiscreteMeasure::normalized(std::move(m), kClip);
}

} // namespace

DiscreteMeasure step_implicit_euler(const Generator &gen, const DiscreteMeasure &m, double dt) {
  if (!(dt > 0.0)) throw DomainError("step_implicit_euler: dt must be positive");
  if (m.size() != gen.size()) throw DomainError("step_implicit_euler: size mismatch");
  return from_density(gen, solve_shifted(gen, dt, m.masses()));
}

DiscreteMeasure step_crank_nicolson(const Generator &gen, const DiscreteMeasure &m, double dt) {
  if (!(dt > 0.0)) throw DomainError("step_crank_nicolson: dt must be positive");
  if (m.size() != gen.size()) throw DomainError("step_crank_nicolson: size mismatch");
  CellField rhs = gen.apply(m.masses());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = m[k] + 0.5 * dt * rhs[k];
  return from_density(gen, solve_shifted(gen, 0.5 * dt, rhs));
}

struct ExactPropagator::Impl {
  Eigen::VectorXd sqrt_pi;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd q;
};

ExactPropagator::ExactPropagator(const Generator &gen) : impl_(std::make_unique<Impl>()) {
  const std::size_t n = gen.size();
  if (n > 2000) throw DomainError("exact propagator limited to 2000 cells, got " + std::to_string(n));
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  impl_->sqrt_pi.resize(n);
  for (std::size_t k = 0; k < n; ++k) impl_->sqrt_pi[k] = std::sqrt(gen.pi()[k]);
  const auto &faces = gen.mesh().faces();
  for (std::size_t e = 0; e < faces.size(); ++e) {
    const int k = faces[e].k, l = faces[e].l;
    const double w = gen.weights()[e];
    const double off = w / (impl_->sqrt_pi[k] * impl_->sqrt_pi[l]);
    s(k, l) += off;
    s(l, k) += off;
    s(k, k) -= w / gen.pi()[k];
    s(l, l) -= w / gen.pi()[l];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw SolverError("exact propagator: eigendecomposition failed", 1.0);
  impl_->eigenvalues = eig.eigenvalues();
  impl_->q = eig.eigenvectors();
}

ExactPropagator::~ExactPropagator() = default;
ExactPropagator::ExactPropagator(ExactPropagator &&) noexcept = default;
ExactPropagator &ExactPropagator::operator=(ExactPropagator &&) noexcept = default;

DiscreteMeasure ExactPropagator::evolve(const DiscreteMeasure &m0, double t) const {
  const auto n = impl_->sqrt_pi.size();
  if (static_cast<Eigen::Index>(m0.size()) != n) throw DomainError("exact propagator: size mismatch");
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = m0[k] / impl_->sqrt_pi[k];
  Eigen::VectorXd c = impl_->q.transpose() * v;
  for (Eigen::Index i = 0; i < n; ++i) c[i] *= std::exp(std::min(impl_->eigenvalues[i], 0.0) * t);
  const Eigen::VectorXd u = impl_->q * c;
  std::vector<double> m(n);
  for (Eigen::Index k = 0; k < n; ++k) m[k] = impl_->sqrt_pi[k] * u[k];
  return DiscreteMeasure::normalized(std::move(m), kClip);
}

std::vector<double> ExactPropagator::spectrum() const {
  return {impl_->eigenvalues.data(), impl_->eigenvalues.data() + impl_->eigenvalues.size()};
}

double ExactPropagator::spectral_gap() const {
  const auto n = impl_->eigenvalues.size();
  return n < 2 ? 0.0 : -impl_->eigenvalues[n - 2];
}

Trajectory solve_trajectory(const Generator &gen, const DiscreteMeasure &m0, double T, int M, Scheme scheme) {
  if (!(T > 0.0) || M < 1) throw DomainError("solve_trajectory: need T > 0 and M >= 1");
  if (m0.size() != gen.size()) throw DomainError("solve_trajectory: size mismatch");
  if (scheme == Scheme::automatic) scheme = gen.size() <= 400 ? Scheme::exact_dense : Scheme::implicit_euler;
  const double dt = T / M;
  Trajectory traj;
  traj.scheme = scheme;
  char policy[64];
  std::snprintf(policy, sizeof policy, "uniform dt=%.17g", dt);
  traj.dt_policy = policy;
  traj.times.reserve(M + 1);
  traj.measures.reserve(M + 1);
  traj.times.push_back(0.0);
  traj.measures.push_back(m0);
  if (scheme == Scheme::exact_dense) {
    const ExactPropagator prop(gen);
    for (int i = 1; i <= M; ++i) {
      const double t = T * i / M;
      traj.times.push_back(t);
      traj.measures.push_back(prop.evolve(m0, t));
    }
    return traj;
  }
  for (int i = 1; i <= M; ++i) {
    const auto &prev = traj.measures.back();
    traj.measures.push_back(scheme == Scheme::implicit_euler ? step_implicit_euler(gen, prev, dt)
                                                             : step_crank_nicolson(gen, prev, dt));
    traj.times.push_back(T * i / M);
  }
  return traj;
}

CellField time_derivative(const Generator &gen, const Trajectory &traj, std::size_t i) {
  if (i >= traj.measures.size()) throw DomainError("time_derivative: node index out of range");
  return gen.apply(traj.measures[i].masses());
}

CsvTable trajectory_table(const Trajectory &traj) {
  CsvTable t("trajectory", {"t", "cell", "mass"});
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto &m = traj.measures[i];
    for (std::size_t k = 0; k < m.size(); ++k) t.add_row({traj.times[i], k, m[k]});
  }
  return t;
}

} // namespace gradflow
