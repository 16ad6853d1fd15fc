#include "gradflow/dual_action.hpp"
#include "gradflow/dynamics.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/functionals.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gradflow;

namespace {

using Dense = std::vector<std::vector<double>>;

Dense dense_generator(const Mesh &mesh, const FvStructure &s) {
  const std::size_t n = mesh.num_cells();
  Dense l(n, std::vector<double>(n, 0.0));
  for (std::size_t e = 0; e < mesh.num_faces(); ++e) {
    const auto &f = mesh.face(e);
    const double w = s.weights.w[e];
    l[f.k][f.l] += w / s.pi[f.l];
    l[f.l][f.k] += w / s.pi[f.k];
    l[f.k][f.k] -= w / s.pi[f.k];
    l[f.l][f.l] -= w / s.pi[f.l];
  }
  return l;
}

Dense multiply(const Dense &a, const Dense &b) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Oracle: e^{tL} by scaling and squaring of a degree-24 Taylor polynomial.
std::vector<double> expm_apply(Dense l, double t, const std::vector<double> &v) {
  const std::size_t n = l.size();
  double norm = 0.0;
  for (const auto &row : l) {
    double s = 0.0;
    for (double x : row) s += std::abs(x);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  double scale = t;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  for (auto &row : l)
    for (auto &x : row) x *= scale;
  Dense e(n, std::vector<double>(n, 0.0)), term(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) e[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 24; ++k) {
    term = multiply(term, l);
    for (auto &row : term)
      for (auto &x : row) x /= k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) e = multiply(e, e);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += e[i][j] * v[j];
  return out;
}

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

} // namespace

TEST(Generator, TwoCellMatrix) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const auto gen = assemble_generator(s);
  const auto lm = gen.apply(std::vector<double>{0.75, 0.25});
  EXPECT_NEAR(lm[0], -2.0, 1e-14);
  EXPECT_NEAR(lm[1], 2.0, 1e-14);
  const auto zero = gen.apply(s.pi.values());
  EXPECT_NEAR(zero[0], 0.0, 1e-15);
}

TEST(Generator, ReversibilityAndConservation) {
  gradflow::testing::Gen g(43);
  for (int t = 0; t < 100; ++t) {
    const Mesh m = g.mesh();
    const auto s = make_structure(m, g.potential());
    const auto gen = assemble_generator(s);
    const auto a = g.vector(m.num_cells(), 0.0, 1.0), b = g.vector(m.num_cells(), 0.0, 1.0);
    const auto la = gen.apply(a), lb = gen.apply(b);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      lhs += la[k] * b[k] / s.pi[k];
      rhs += a[k] / s.pi[k] * lb[k];
      scale += std::abs(la[k] * b[k] / s.pi[k]);
    }
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + scale));
    EXPECT_NEAR(sum(la), 0.0, 1e-13 * (1.0 + scale));
    const auto lpi = gen.apply(s.pi.values());
    for (double v : lpi) EXPECT_NEAR(v, 0.0, 1e-12 * (1.0 + scale));
  }
}

TEST(ImplicitEuler, TwoCellStep) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const auto gen = assemble_generator(s);
  const auto next = step_implicit_euler(gen, DiscreteMeasure({1.0, 0.0}), 0.125);
  EXPECT_NEAR(next[0], 0.75, 1e-12);
  EXPECT_NEAR(next[1], 0.25, 1e-12);
  const auto fixed = step_implicit_euler(gen, s.pi, 0.3);
  EXPECT_NEAR(fixed[0], 0.5, 1e-14);
}

TEST(ImplicitEuler, ConsistentWithGenerator) {
  const Mesh m = build_cartesian_mesh(5, 4);
  const auto s = make_structure(m, Potential::linear({1.0, -0.5}));
  const auto gen = assemble_generator(s);
  gradflow::testing::Gen g(47);
  const auto mu = g.positive_measure(m.num_cells());
  const double dt = 1e-6;
  const auto next = step_implicit_euler(gen, mu, dt);
  const auto lm = gen.apply(mu.masses());
  for (std::size_t k = 0; k < lm.size(); ++k) EXPECT_NEAR((next[k] - mu[k]) / dt, lm[k], 1e-4 * (1.0 + std::abs(lm[k])));
}

TEST(Exact, TwoCellDecay) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const auto gen = assemble_generator(s);
  const ExactPropagator prop(gen);
  const auto mt = prop.evolve(DiscreteMeasure({1.0, 0.0}), 0.1);
  EXPECT_NEAR(mt[0], 0.5 + 0.5 * std::exp(-0.8), 1e-12);
  EXPECT_NEAR(prop.spectral_gap(), 8.0, 1e-10);
  const auto still = prop.evolve(s.pi, 2.0);
  EXPECT_NEAR(still[0], 0.5, 1e-14);
}

TEST(Exact, MatchesTaylorOracle) {
  gradflow::testing::Gen g(53);
  for (int t = 0; t < 15; ++t) {
    const Mesh m = g.mesh(30, 5);
    const auto s = make_structure(m, g.potential());
    const auto gen = assemble_generator(s);
    const ExactPropagator prop(gen);
    const auto mu = g.positive_measure(m.num_cells());
    const double time = g.uniform(0.001, 0.2);
    const auto ref = expm_apply(dense_generator(m, s), time, mu.values());
    const auto got = prop.evolve(mu, time);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(got[k], ref[k], 1e-10);
  }
}

TEST(CrankNicolson, SecondOrderInTime) {
  const Mesh m = build_uniform_interval_mesh(12);
  const auto s = make_structure(m, Potential::zero());
  const auto gen = assemble_generator(s);
  const auto m0 = project_measure(m, make_density("cosine", m.domain()));
  const auto exact = ExactPropagator(gen).evolve(m0, 0.05);
  double prev = 0.0;
  for (int steps : {10, 20, 40}) {
    DiscreteMeasure x = m0;
    for (int i = 0; i < steps; ++i) x = step_crank_nicolson(gen, x, 0.05 / steps);
    double err = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) err = std::max(err, std::abs(x[k] - exact[k]));
    if (prev > 0.0) EXPECT_GT(prev / err, 3.5);
    prev = err;
  }
}

TEST(Trajectory, StationaryIsConstant) {
  const Mesh m = build_uniform_interval_mesh(16);
  const auto s = make_structure(m, Potential::quadratic({0.4, 0.0}, 2.0));
  const auto gen = assemble_generator(s);
  for (Scheme sc : {Scheme::implicit_euler, Scheme::crank_nicolson, Scheme::exact_dense}) {
    const auto traj = solve_trajectory(gen, s.pi, 1.0, 8, sc);
    ASSERT_EQ(traj.measures.size(), 9u);
    for (const auto &mt : traj.measures)
      for (std::size_t k = 0; k < mt.size(); ++k) EXPECT_NEAR(mt[k], s.pi[k], 1e-13);
  }
  EXPECT_EQ(parse_scheme("auto"), Scheme::automatic);
  EXPECT_THROW(parse_scheme("rk4"), InputError);
}

TEST(Trajectory, AutomaticSchemeSelection) {
  const Mesh small = build_uniform_interval_mesh(10);
  const auto s = make_structure(small, Potential::zero());
  EXPECT_EQ(solve_trajectory(assemble_generator(s), s.pi, 0.1, 2).scheme, Scheme::exact_dense);
  const Mesh big = build_cartesian_mesh(21, 20);
  const auto sb = make_structure(big, Potential::zero());
  EXPECT_EQ(solve_trajectory(assemble_generator(sb), sb.pi, 0.1, 2).scheme, Scheme::implicit_euler);
}

TEST(Trajectory, TimeDerivativeTwoCell) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const auto gen = assemble_generator(s);
  const auto traj = solve_trajectory(gen, DiscreteMeasure({0.75, 0.25}), 0.1, 1);
  const auto d = time_derivative(gen, traj, 0);
  EXPECT_NEAR(d[0], -2.0, 1e-14);
  EXPECT_NEAR(d[1], 2.0, 1e-14);
}

// Properties over 1000 random cases: mass conservation per step, positivity of
// implicit Euler, and entropy monotonicity along implicit-Euler steps.
TEST(DynamicsProperty, ConservationPositivityMonotonicity) {
  gradflow::testing::Gen g(59);
  for (int t = 0; t < 1000; ++t) {
    const Mesh m = g.mesh(32, 6);
    const auto s = make_structure(m, g.potential());
    const auto gen = assemble_generator(s);
    std::vector<double> w = g.vector(m.num_cells(), 0.0, 1.0);
    if (g.coin()) w[g.integer(0, static_cast<int>(w.size()) - 1)] = 0.0;
    const auto mu = DiscreteMeasure::normalized(w);
    const double dt = std::exp(g.uniform(std::log(1e-5), std::log(1.0)));
    const auto next = step_implicit_euler(gen, mu, dt);
    EXPECT_NEAR(sum(next.masses()), 1.0, 1e-13);
    for (std::size_t k = 0; k < next.size(); ++k) EXPECT_GE(next[k], 0.0);
    EXPECT_LE(entropy(next, s.pi), entropy(mu, s.pi) + 1e-12);
  }
}

TEST(DynamicsProperty, ExactFlowEntropyMonotoneAndIdentity) {
  gradflow::testing::Gen g(61);
  for (int t = 0; t < 40; ++t) {
    const Mesh m = g.mesh(40, 6);
    const auto s = make_structure(m, g.potential());
    const auto gen = assemble_generator(s);
    const auto traj = solve_trajectory(gen, g.positive_measure(m.num_cells()), 0.2, 10, Scheme::exact_dense);
    for (std::size_t i = 0; i < traj.measures.size(); ++i) {
      EXPECT_NEAR(sum(traj.measures[i].masses()), 1.0, 1e-13);
      if (i > 0) EXPECT_LE(entropy(traj.measures[i], s.pi), entropy(traj.measures[i - 1], s.pi) + 1e-12);
      const auto rate = time_derivative(gen, traj, i);
      const double I = fisher(s, traj.measures[i]).value();
      EXPECT_NEAR(dual_action(s, traj.measures[i], rate).value(), 0.5 * I, 1e-8 * (1.0 + I));
    }
  }
}
