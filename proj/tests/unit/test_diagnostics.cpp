#include "gradflow/diagnostics.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/wasserstein.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gradflow;

TEST(Conditions, Examples) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const std::vector<Vec2> centres{{0.25, 0.0}};
  const std::vector<double> eps{0.2};
  const auto at_pi = condition_report(m, s.pi, s.pi, centres, eps);
  EXPECT_DOUBLE_EQ(at_pi.k_lower, 1.0);
  EXPECT_DOUBLE_EQ(at_pi.k_upper, 1.0);
  EXPECT_DOUBLE_EQ(at_pi.neighbour_osc, 0.0);
  const auto r = condition_report(m, DiscreteMeasure({0.75, 0.25}), s.pi, centres, eps);
  EXPECT_DOUBLE_EQ(r.k_lower, 0.5);
  EXPECT_DOUBLE_EQ(r.k_upper, 1.5);
  EXPECT_DOUBLE_EQ(r.neighbour_osc, 1.0);
  ASSERT_EQ(r.pc_profile.size(), 1u);
  // The cube (0.15, 0.35) meets only cell 0.
  EXPECT_DOUBLE_EQ(r.pc_profile[0].sup, 1.5);
  EXPECT_DOUBLE_EQ(r.pc_profile[0].inf, 1.5);
  EXPECT_EQ(r.pc_profile[0].cells, 1u);
}

TEST(GoodPaths, Examples) {
  const Mesh m = build_uniform_interval_mesh(9);
  const auto self = good_path(m, 3, 3);
  EXPECT_EQ(self.cells, (std::vector<int>{3}));
  EXPECT_EQ(self.steps(), 0u);
  const auto adj = good_path(m, 3, 4);
  EXPECT_EQ(adj.cells, (std::vector<int>{3, 4}));
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      const auto p = good_path(m, i, j);
      EXPECT_EQ(p.steps(), static_cast<std::size_t>(std::abs(i - j)));
      EXPECT_NEAR(p.length, std::abs(m.cell(i).site.x - m.cell(j).site.x), 1e-14);
      EXPECT_TRUE(is_valid_path(m, p, i, j));
    }
  }
}

TEST(GoodPaths, Constants) {
  const auto u = path_constants(build_uniform_interval_mesh(20));
  EXPECT_NEAR(u.c_count, 1.0, 1e-13);
  EXPECT_NEAR(u.c_length, 1.0, 1e-14);
  const auto c = path_constants(build_cartesian_mesh(16, 16));
  EXPECT_LE(c.c_length, std::sqrt(2.0) + 1e-12);
  EXPECT_EQ(c.invalid, 0u);
  const auto one = path_constants(build_uniform_interval_mesh(1));
  EXPECT_EQ(one.c_count, 0.0);
  EXPECT_EQ(one.c_length, 0.0);
}

TEST(GoodPaths, WalksValidOnRandomVoronoi) {
  gradflow::testing::Gen g(67);
  for (int t = 0; t < 10; ++t) {
    const Mesh m = g.jittered_voronoi(g.integer(3, 9));
    const auto pc = path_constants(m);
    EXPECT_EQ(pc.invalid, 0u);
    EXPECT_GT(pc.pairs, 0u);
  }
}

TEST(Holder, Examples) {
  const Mesh m = build_uniform_interval_mesh(4);
  const auto s = make_structure(m, Potential::zero());
  const Box whole{{0.0, 0.0}, {1.0, 0.0}};
  const std::vector<double> c(4, 1.0), alt{0.0, 1.0, 0.0, 1.0};
  EXPECT_EQ(l2_holder_modulus(m, c, {0.25, 0.0}, whole, s.pi, s.pi).value, 0.0);
  EXPECT_EQ(l2_holder_modulus(m, alt, {0.0, 0.0}, whole, s.pi, s.pi).value, 0.0);
  // Over A itself three shifted cells overlap: 3/4. Trimming A by |h| keeps two.
  EXPECT_NEAR(l2_holder_modulus(m, alt, {0.25, 0.0}, whole, s.pi, s.pi, MeanKind::logarithmic, false).value, 0.75, 1e-15);
  const auto trimmed = l2_holder_modulus(m, alt, {0.25, 0.0}, whole, s.pi, s.pi);
  EXPECT_NEAR(trimmed.value, 0.5, 1e-15);
  // Bound without constant: 1/4 * 1/4 * F_T = 6/16, so the working C is 4/3.
  EXPECT_NEAR(trimmed.ratio, 4.0 / 3.0, 1e-14);
}

TEST(HolderProperty, BoundHoldsOnRandomFields) {
  gradflow::testing::Gen g(71);
  for (int t = 0; t < 40; ++t) {
    const bool one_d = g.coin();
    const Mesh m = one_d ? g.graded_interval(g.integer(4, 40)) : g.jittered_voronoi(g.integer(3, 7));
    const auto s = make_structure(m, Potential::zero());
    const auto mu = g.positive_measure(m.num_cells());
    const auto f = g.vector(m.num_cells(), -1.0, 1.0);
    const double len = g.uniform(0.01, 0.3);
    const double ang = g.uniform(0.0, 6.283185307179586);
    const Vec2 h = one_d ? Vec2{len, 0.0} : Vec2{len * std::cos(ang), len * std::sin(ang)};
    const Box whole{{0.0, 0.0}, {1.0, one_d ? 0.0 : 1.0}};
    const auto hm = l2_holder_modulus(m, f, h, whole, mu, s.pi);
    EXPECT_LE(hm.value, hm.bound * (1.0 + 1e-12));
  }
}

TEST(FlowRegularity, TwoCellSup) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const auto gen = assemble_generator(s);
  const auto traj = solve_trajectory(gen, DiscreteMeasure({1.0, 0.0}), 0.1, 1, Scheme::exact_dense);
  const auto rows = flow_regularity_observed(m, s.pi, traj);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].sup_r, 1.0 + std::exp(-0.8), 1e-12);
  const auto still = flow_regularity_observed(m, s.pi, solve_trajectory(gen, s.pi, 0.1, 2));
  for (const auto &r : still) EXPECT_NEAR(r.holder_one, 0.0, 1e-13);
}

// ---------------------------------------------------------------- Wasserstein

namespace {

PiecewiseDensity uniform_on(double a, double b) { return {{a, b}, {1.0 / (b - a)}}; }

// Oracle: midpoint rule in u on inverse CDFs found by bisection.
double quantile_w2(const PiecewiseDensity &p, const PiecewiseDensity &q, int samples = 400000) {
  auto inverse = [](const PiecewiseDensity &d, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      const double w = d.values[i] * (d.breakpoints[i + 1] - d.breakpoints[i]);
      if (acc + w >= u && w > 0.0) return d.breakpoints[i] + (u - acc) / d.values[i];
      acc += w;
    }
    return d.breakpoints.back();
  };
  double s = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double u = (i + 0.5) / samples;
    const double d = inverse(p, u) - inverse(q, u);
    s += d * d;
  }
  return std::sqrt(s / samples);
}

PiecewiseDensity random_density(gradflow::testing::Gen &g) {
  const int n = g.integer(1, 12);
  std::vector<double> bp{0.0};
  for (int i = 0; i < n; ++i) bp.push_back(bp.back() + g.uniform(0.1, 1.0));
  for (auto &b : bp) b /= bp.back();
  std::vector<double> v(n);
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = g.coin() && n > 1 ? 0.0 : g.uniform(0.1, 2.0);
    mass += v[i] * (bp[i + 1] - bp[i]);
  }
  if (mass == 0.0) {
    v[0] = 1.0;
    mass = bp[1];
  }
  for (auto &x : v) x /= mass;
  return {bp, v};
}

} // namespace

TEST(Wasserstein, Examples) {
  const auto one = uniform_on(0.0, 1.0);
  EXPECT_EQ(wasserstein_1d(one, one), 0.0);
  // p = 1, q = 2x: quantiles u and sqrt(u).
  const auto ramp = average_density([](double x) { return 2.0 * x; }, 0.0, 1.0, 1 << 14);
  EXPECT_NEAR(wasserstein_1d(one, ramp), std::sqrt(1.0 / 30.0), 1e-7);
  const PiecewiseDensity left{{0.0, 0.5, 1.0}, {2.0, 0.0}}, right{{0.0, 0.5, 1.0}, {0.0, 2.0}};
  EXPECT_NEAR(wasserstein_1d(left, right), 0.5, 1e-15);
  EXPECT_THROW(wasserstein_1d(one, PiecewiseDensity{{0.0, 1.0}, {0.9}}), DomainError);
}

TEST(Wasserstein, MatchesQuantileOracle) {
  gradflow::testing::Gen g(73);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_density(g), q = random_density(g);
    EXPECT_NEAR(wasserstein_1d(p, q), quantile_w2(p, q), 1e-5);
  }
}

TEST(WassersteinProperty, TriangleInequality) {
  gradflow::testing::Gen g(79);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_density(g), b = random_density(g), c = random_density(g);
    const double ab = wasserstein_1d(a, b), bc = wasserstein_1d(b, c), ac = wasserstein_1d(a, c);
    EXPECT_LE(ac, ab + bc + 1e-10);
    EXPECT_NEAR(ab, wasserstein_1d(b, a), 1e-12);
  }
}
