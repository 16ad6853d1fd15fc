#include "gradflow/errors.hpp"
#include "gradflow/functionals.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gradflow;

namespace {

FvStructure two_cell(const Mesh &m) { return make_structure(m, Potential::zero()); }

} // namespace

TEST(Entropy, Examples) {
  const DiscreteMeasure half({0.5, 0.5});
  EXPECT_EQ(entropy(half, half), 0.0);
  EXPECT_NEAR(entropy(DiscreteMeasure({1.0, 0.0}), half), std::log(2.0), 1e-15);
  EXPECT_NEAR(entropy(DiscreteMeasure({0.75, 0.25}), half), 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_THROW(entropy(half, DiscreteMeasure({1.0, 0.0})), DomainError);
}

TEST(Action, Examples) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = two_cell(m);
  const std::vector<double> c{3.0, 3.0}, f01{0.0, 1.0}, f10{1.0, 0.0};
  EXPECT_EQ(action(s, s.pi, c), 0.0);
  EXPECT_NEAR(action(s, s.pi, f01), 1.0, 1e-15);
  EXPECT_NEAR(action(s, DiscreteMeasure({0.75, 0.25}), f10), 1.0 / std::log(3.0), 1e-15);
}

TEST(Fisher, Examples) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = two_cell(m);
  EXPECT_EQ(fisher(s, s.pi).value(), 0.0);
  EXPECT_NEAR(fisher(s, DiscreteMeasure({0.75, 0.25})).value(), 2.0 * std::log(3.0), 1e-14);
  EXPECT_TRUE(fisher(s, DiscreteMeasure({1.0, 0.0})).is_infinite());
}

TEST(Fisher, EqualsTwiceActionOfMinusLogDensity) {
  gradflow::testing::Gen g(31);
  for (int t = 0; t < 50; ++t) {
    const Mesh m = g.mesh();
    const auto s = make_structure(m, g.potential());
    const auto mu = g.positive_measure(m.num_cells());
    const auto r = density_ratio(mu, s.pi);
    std::vector<double> f(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) f[k] = -std::log(r[k]);
    const double I = fisher(s, mu).value();
    EXPECT_NEAR(I, 2.0 * action(s, mu, f), 1e-12 * (1.0 + I));
  }
}

TEST(DirichletEnergy, AffineClosedForm) {
  for (int n : {2, 10, 33}) {
    const Mesh m = build_uniform_interval_mesh(n);
    const auto s = make_structure(m, Potential::zero());
    const auto f = project_function(m, [](const Vec2 &x) { return x.x; });
    EXPECT_NEAR(dirichlet_energy(m, s.pi, f), 0.5 * (n - 1.0) / n, 1e-14);
  }
}

TEST(DirichletEnergy, RegionSelection) {
  const Mesh m = build_uniform_interval_mesh(4);
  const auto s = make_structure(m, Potential::zero());
  const auto f = project_function(m, [](const Vec2 &x) { return x.x; });
  // Cells 0 and 1 meet (0, 1/2); one face between them: 1/2 * h^2 * (1/h) = h/2.
  EXPECT_NEAR(dirichlet_energy(m, s.pi, f, MeanKind::logarithmic, Box{{0.0, 0.0}, {0.5, 0.0}}), 0.125, 1e-15);
  const std::vector<double> c(4, 2.0);
  EXPECT_EQ(dirichlet_energy(m, s.pi, c, MeanKind::logarithmic, Box{{0.1, 0.0}, {0.9, 0.0}}), 0.0);
}

TEST(Continuum, DirichletExamples) {
  const Mesh m = build_uniform_interval_mesh(4);
  const Domain &d = m.domain();
  auto lebesgue = [](const Vec2 &) { return 1.0; };
  EXPECT_NEAR(continuous_dirichlet(make_function("const", d), lebesgue, d), 0.0, 1e-15);
  EXPECT_NEAR(continuous_dirichlet(make_function("x", d), lebesgue, d), 0.5, 1e-14);
  EXPECT_NEAR(continuous_dirichlet(make_function("cos", d), lebesgue, d), std::numbers::pi * std::numbers::pi / 4.0, 1e-12);
}

// Property: action is exactly invariant under adding constants (the face
// differences are computed from the shifted values, so compare to round-off
// in the differences).
TEST(ActionProperty, GaugeInvariance) {
  gradflow::testing::Gen g(13);
  for (int t = 0; t < 1000; ++t) {
    const Mesh m = g.mesh(24, 6);
    const auto s = make_structure(m, Potential::zero());
    const auto mu = g.positive_measure(m.num_cells());
    std::vector<double> f(m.num_cells());
    for (auto &v : f) v = static_cast<double>(g.integer(-1000, 1000)) / 64.0;
    const double c = static_cast<double>(g.integer(-1000, 1000)) / 8.0;
    std::vector<double> fc(f);
    for (auto &v : fc) v += c;
    // Dyadic values keep every difference exact, so equality is exact.
    EXPECT_EQ(action(s, mu, f), action(s, mu, fc));
  }
}

// Property: gap between Fisher/2 and 4 E(sqrt r) stays below (4 eps / k) E(sqrt r).
TEST(FisherDirichlet, GapBound) {
  gradflow::testing::Gen g(17);
  for (int t = 0; t < 200; ++t) {
    const Mesh m = g.mesh(48, 8);
    const auto s = make_structure(m, g.potential());
    const auto mu = DiscreteMeasure::normalized(g.vector(m.num_cells(), 0.05, 3.0));
    const auto gap = fisher_sqrt_gap(s, mu);
    EXPECT_LE(gap.gap, gap.bound * (1.0 + 1e-12) + 1e-15);
  }
}

TEST(FisherDirichlet, ThetaTildeIdentity) {
  // Action with the sqrt-log-squared kernel on -log r equals 4 E(sqrt r) with pi weights.
  gradflow::testing::Gen g(19);
  for (int t = 0; t < 30; ++t) {
    const Mesh m = g.mesh();
    const auto s = make_structure(m, Potential::zero());
    const auto mu = g.positive_measure(m.num_cells());
    const auto r = density_ratio(mu, s.pi);
    std::vector<double> f(r.size()), root(r.size()), ones(r.size(), 1.0);
    for (std::size_t k = 0; k < r.size(); ++k) {
      f[k] = -std::log(r[k]);
      root[k] = std::sqrt(r[k]);
    }
    const double lhs = action(s, mu, f, MeanKind::sqrt_log_squared);
    const double rhs = 4.0 * action_with_density(s, ones, root);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + rhs));
  }
}
