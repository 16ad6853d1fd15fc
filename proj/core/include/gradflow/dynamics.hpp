#pragma once

// Discrete Fokker-Planck flow  dm/dt = L m,
//   (L m)(K) = sum_{L ~ K} w_KL (m(L)/pi(L) - m(K)/pi(K)),
// with time steppers and a dense spectral propagator for small meshes.

#include "gradflow/io.hpp"
#include "gradflow/reference.hpp"
#include "gradflow/sparse.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gradflow {

class Generator {
public:
  Generator(const Mesh &mesh, CellField pi, std::vector<double> w);

  std::size_t size() const { return pi_.size(); }
  const Mesh &mesh() const { return *mesh_; }
  const CellField &pi() const { return pi_; }
  const std::vector<double> &weights() const { return w_; }
  /// L as a sparse matrix, L_KL = w_KL / pi_L, L_KK = -sum_L w_KL / pi_K.
  const CsrMatrix &matrix() const { return matrix_; }

  /// L m
  CellField apply(std::span<const double> m) const;

  /// D + c W', D = diag(pi), W' the weighted graph Laplacian (SPD for c > 0).
  CsrMatrix shifted_operator(double c) const;

  /// True when every face joins consecutive cells (one-dimensional chain).
  bool tridiagonal() const { return tridiagonal_; }

private:
  const Mesh *mesh_;
  CellField pi_;
  std::vector<double> w_;
  CsrMatrix matrix_;
  bool tridiagonal_ = false;
};

Generator assemble_generator(const FvStructure &s);

enum class Scheme { automatic, implicit_euler, crank_nicolson, exact_dense };

/// "auto", "implicit-euler", "crank-nicolson", "exact"; throws InputError otherwise.
Scheme parse_scheme(std::string_view name);
std::string to_string(Scheme scheme);

/// Solves (I - dt L) m+ = m. Throws SolverError when the linear solve fails.
DiscreteMeasure step_implicit_euler(const Generator &gen, const DiscreteMeasure &m, double dt);

/// Solves (I - dt/2 L) m+ = (I + dt/2 L) m. Negatives below -1e-12 throw DomainError.
DiscreteMeasure step_crank_nicolson(const Generator &gen, const DiscreteMeasure &m, double dt);

/// Dense symmetric eigendecomposition of D^{-1/2} W' D^{-1/2}.
class ExactPropagator {
public:
  /// Throws DomainError beyond 2000 cells.
  explicit ExactPropagator(const Generator &gen);
  ~ExactPropagator();
  ExactPropagator(ExactPropagator &&) noexcept;
  ExactPropagator &operator=(ExactPropagator &&) noexcept;

  /// m_t = D^{1/2} Q e^{t Lambda} Q^T D^{-1/2} m0.
  DiscreteMeasure evolve(const DiscreteMeasure &m0, double t) const;
  /// Eigenvalues of L in ascending order (all <= 0).
  std::vector<double> spectrum() const;
  /// Smallest nonzero decay rate -lambda_2.
  double spectral_gap() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DiscreteMeasure> measures;
  Scheme scheme = Scheme::automatic;
  /// "uniform dt = T/M" with the step recorded.
  std::string dt_policy;
};

/// Uniform grid t_i = i T / M, i = 0..M. `automatic` picks exact_dense up to
/// 400 cells and implicit Euler beyond.
Trajectory solve_trajectory(const Generator &gen, const DiscreteMeasure &m0, double T, int M,
                            Scheme scheme = Scheme::automatic);

/// dm/dt at node i, evaluated through the generator.
CellField time_derivative(const Generator &gen, const Trajectory &traj, std::size_t i);

/// (t, cell, mass) rows.
CsvTable trajectory_table(const Trajectory &traj);

} // namespace gradflow
