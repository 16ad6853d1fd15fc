#include "gradflow/errors.hpp"
#include "gradflow/experiments.hpp"
#include "gradflow/functionals.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

using namespace gradflow;

TEST(Family, Parse) {
  const auto a = MeshFamily::parse("uniform1d:16..256");
  EXPECT_EQ(a.kind, FamilyKind::uniform1d);
  EXPECT_EQ(a.sizes, (std::vector<int>{16, 32, 64, 128, 256}));
  const auto b = MeshFamily::parse("voronoi:4,6,9");
  EXPECT_EQ(b.sizes, (std::vector<int>{4, 6, 9}));
  EXPECT_EQ(b.name(), "voronoi:4,6,9");
  EXPECT_THROW(MeshFamily::parse("hexagonal:4"), InputError);
  EXPECT_THROW(MeshFamily::parse("cartesian"), InputError);
  EXPECT_THROW(MeshFamily::parse("cartesian:8..4"), InputError);
  EXPECT_THROW(MeshFamily::parse("cartesian:4,x"), InputError);
}

TEST(Family, BuildRequiresRefinement) {
  EXPECT_THROW(MeshFamily::parse("uniform1d:32,16").build_all(), InputError);
  const auto meshes = MeshFamily::parse("flattened:2..4").build_all();
  ASSERT_EQ(meshes.size(), 2u);
  EXPECT_EQ(meshes[0].num_cells(), 16u);
  EXPECT_EQ(meshes[1].num_cells(), 64u);
}

TEST(Family, VoronoiIsSeedDeterministic) {
  MeshFamily f{FamilyKind::voronoi, {6}};
  const Mesh a = f.build(6), b = f.build(6);
  for (std::size_t k = 0; k < a.num_cells(); ++k) EXPECT_EQ(a.cell(k).site, b.cell(k).site);
  f.seed = 43;
  EXPECT_FALSE(f.build(6).cell(0).site == a.cell(0).site);
}

TEST(Threads, ParallelForCoversEveryIndexAndRethrowsLowest) {
  ::setenv("GRADFLOW_THREADS", "4", 1);
  EXPECT_EQ(thread_count(), 4u);
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto &h : hits) EXPECT_EQ(h.load(), 1);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error &e) {
    EXPECT_STREQ(e.what(), "17");
  }
  ::unsetenv("GRADFLOW_THREADS");
}

TEST(Threads, ResultsDoNotDependOnThreadCount) {
  const auto fam = MeshFamily::parse("cartesian:4..16");
  ::setenv("GRADFLOW_THREADS", "1", 1);
  const std::string one = gamma_energy_study(fam, "coscos", Potential::zero()).table().to_string();
  ::setenv("GRADFLOW_THREADS", "3", 1);
  const std::string three = gamma_energy_study(fam, "coscos", Potential::zero()).table().to_string();
  ::unsetenv("GRADFLOW_THREADS");
  EXPECT_EQ(one, three);
}

TEST(GammaEnergy, ConstantAndAffine) {
  const auto fam = MeshFamily::parse("uniform1d:8..64");
  const auto c = gamma_energy_study(fam, "const", Potential::zero());
  for (const auto &r : c.rows) {
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.reference, 0.0);
  }
  const auto x = gamma_energy_study(fam, "x", Potential::zero());
  for (const auto &r : x.rows) {
    EXPECT_NEAR(r.value, 0.5 * (1.0 - 1.0 / r.cells), 1e-12);
    EXPECT_NEAR(r.error, 0.5 / r.cells, 1e-12);
  }
  EXPECT_NEAR(x.rows.back().order, 1.0, 1e-9);
  EXPECT_TRUE(x.passed());
}

TEST(GammaEnergy, CosineOrderTwo) {
  const auto res = gamma_energy_study(MeshFamily::parse("uniform1d:16..128"), "cos", Potential::zero());
  EXPECT_NEAR(res.rows[0].reference, std::numbers::pi * std::numbers::pi / 4.0, 1e-10);
  for (std::size_t i = 1; i < res.rows.size(); ++i) EXPECT_NEAR(res.rows[i].order, 2.0, 0.05);
}

TEST(GammaEnergy, ProjectedRuleUsesDensity) {
  GammaEnergyOptions opt;
  opt.rule = MeasureRule::projected;
  opt.density = "ramp";
  const auto res = gamma_energy_study(MeshFamily::parse("uniform1d:32..256"), "x", Potential::zero(), opt);
  // 1/2 int 2x dx = 1/2.
  EXPECT_NEAR(res.rows[0].reference, 0.5, 1e-12);
  EXPECT_LT(res.rows.back().error, res.rows.front().error);
}

TEST(AffineStudy, ZeroSlopeAndRejection) {
  const auto fam = MeshFamily::parse("cartesian:8,16");
  const auto zero = gamma_affine_minimization_study(fam, {0.5, 0.5}, {0.0, 0.0}, 0.5);
  for (const auto &r : zero.rows) EXPECT_EQ(r.value, 0.0);
  EXPECT_THROW(gamma_affine_minimization_study(fam, {0.2, 0.5}, {1.0, 0.0}, 0.5), DomainError);
  EXPECT_THROW(gamma_affine_minimization_study(fam, {0.5, 0.5}, {1.0, 0.0}, 0.0), DomainError);
}

TEST(AffineStudy, HarmonicAndWithinBoundaryLayer) {
  const auto res = gamma_affine_minimization_study(MeshFamily::parse("voronoi:8..32"), {0.5, 0.5}, {0.6, 0.8}, 0.5);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    EXPECT_LE(res.extra(i, "harmonic_residual"), 1e-11);
    EXPECT_LE(res.rows[i].error, res.extra(i, "boundary_layer"));
    EXPECT_NEAR(res.rows[i].reference, 0.5 * 0.25, 1e-15);
  }
}

TEST(BoundaryLayer, OneDimensionalUnion) {
  const Mesh m = build_uniform_interval_mesh(4);
  EXPECT_NEAR(boundary_layer_volume(m.domain(), {0.5, 0.0}, 0.5, 0.1), 0.4, 1e-15);
  EXPECT_NEAR(boundary_layer_volume(m.domain(), {0.5, 0.0}, 0.5, 0.3), 1.0, 1e-15);
  EXPECT_NEAR(boundary_layer_volume(m.domain(), {0.5, 0.0}, 0.2, 0.2), 0.6, 1e-15);
}

TEST(BoundaryLayer, TwoDimensionalFrame) {
  const Mesh m = build_cartesian_mesh(2, 2);
  // Inner frame s^2 - (s - 2r)^2 plus outer frame 4 s r + pi r^2, s = 1/2.
  const double r = 0.05, side = 0.5;
  const double exact = 8.0 * side * r - 4.0 * r * r + std::numbers::pi * r * r;
  // Midpoint lattice: error of order perimeter x spacing.
  EXPECT_NEAR(boundary_layer_volume(m.domain(), {0.5, 0.5}, side, r), exact, 1e-2 * exact);
}

TEST(Edi, StationaryIsAllZero) {
  const Mesh m = build_uniform_interval_mesh(6);
  const auto s = make_structure(m, Potential::zero());
  const auto rep = edi_audit(s, s.pi, 0.5, 8);
  EXPECT_EQ(rep.h0, 0.0);
  EXPECT_NEAR(rep.action_integral, 0.0, 1e-25);
  EXPECT_NEAR(rep.residual, 0.0, 1e-25);
}

TEST(Edi, TwoCellClosedForm) {
  const Mesh m = build_uniform_interval_mesh(2);
  const auto s = make_structure(m, Potential::zero());
  const DiscreteMeasure m0({0.9, 0.1});
  const double T = 0.5;
  auto h = [](double a) { return a * std::log(2.0 * a) + (1.0 - a) * std::log(2.0 * (1.0 - a)); };
  const double drop = h(0.9) - h(0.5 + 0.4 * std::exp(-8.0 * T));
  double prev = 1e300;
  for (int M : {8, 16, 32, 64}) {
    const auto rep = edi_audit(s, m0, T, M);
    EXPECT_NEAR(rep.h0 - rep.hT, drop, 1e-14);
    if (M > 8) EXPECT_GT(prev / std::abs(rep.residual), 4.0);
    EXPECT_NEAR(rep.action_integral, rep.fisher_integral, 1e-10);
    EXPECT_LE(std::abs(rep.residual), 1.5 * rep.tol_q + 1e-15);
    prev = std::abs(rep.residual);
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Edi, Preconditions) {
  const Mesh m = build_uniform_interval_mesh(3);
  const auto s = make_structure(m, Potential::zero());
  EXPECT_THROW(edi_audit(s, DiscreteMeasure({0.5, 0.5, 0.0}), 0.5, 8), DomainError);
  EXPECT_THROW(edi_audit(s, s.pi, 0.5, 7), DomainError);
  const Mesh big = build_cartesian_mesh(21, 20);
  const auto sb = make_structure(big, Potential::zero());
  EXPECT_THROW(edi_audit(sb, sb.pi, 0.5, 8), DomainError);
}

TEST(Evolution, UniformInitialDataHasNoError) {
  const auto res = evolutionary_convergence_study(MeshFamily::parse("uniform1d:8..32"), Potential::zero(), "uniform", 0.1);
  for (const auto &r : res.rows) EXPECT_LT(r.error, 1e-12);
}

TEST(Evolution, CosineOneDimensional) {
  const auto res = evolutionary_convergence_study(MeshFamily::parse("uniform1d:16..64"), Potential::zero(), "cosine", 0.1);
  EXPECT_TRUE(res.passed());
  for (std::size_t i = 1; i < res.rows.size(); ++i) EXPECT_GE(res.rows[i].order, 1.0);
}

TEST(Evolution, FineMeshReferenceWithPotential) {
  const auto res = evolutionary_convergence_study(MeshFamily::parse("uniform1d:8..32"), Potential::linear({1.0, 0.0}), "cosine", 0.05);
  for (std::size_t i = 1; i < res.rows.size(); ++i) EXPECT_LT(res.rows[i].error, res.rows[i - 1].error);
  EXPECT_TRUE(std::isnan(res.extra(0, "fisher_integral_ref")));
}

TEST(Evolution, TwoDimensionalL1) {
  const auto res = evolutionary_convergence_study(MeshFamily::parse("cartesian:4..16"), Potential::zero(), "cosine", 0.05);
  for (std::size_t i = 1; i < res.rows.size(); ++i) EXPECT_LT(res.rows[i].error, res.rows[i - 1].error);
}

TEST(LowerBound, LebesgueGivesZero) {
  const auto res = lower_bound_trend_study(MeshFamily::parse("uniform1d:8..32"), "uniform", "cos", Potential::zero());
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    EXPECT_NEAR(res.rows[i].value, 0.0, 1e-14);
    EXPECT_NEAR(res.rows[i].reference, 0.0, 1e-14);
    EXPECT_NEAR(res.extra(i, "fisher"), 0.0, 1e-12);
    EXPECT_NEAR(res.extra(i, "fisher_ref"), 0.0, 1e-8);
  }
  EXPECT_TRUE(res.passed());
}

TEST(LowerBound, DualTrendApproachesContinuum) {
  const auto res = lower_bound_trend_study(MeshFamily::parse("uniform1d:16..128"), "cosine", "cos", Potential::zero());
  const double ref = res.extra(0, "dual_ref");
  const double first = std::abs(res.extra(0, "dual") - ref), last = std::abs(res.extra(res.rows.size() - 1, "dual") - ref);
  EXPECT_LT(last, first);
  // eta = cos(pi x), mu Lebesgue: 1/2 int (sin(pi x)/pi)^2 = 1/(4 pi^2).
  const double lebesgue = continuum_dual_action_1d([](double) { return 1.0; },
                                                   [](double x) { return std::cos(std::numbers::pi * x); }, 0.0, 1.0);
  EXPECT_NEAR(lebesgue, 0.25 / (std::numbers::pi * std::numbers::pi), 1e-12);
}

TEST(StudyResult, TableAndJson) {
  const auto res = gamma_energy_study(MeshFamily::parse("uniform1d:4,8"), "x", Potential::zero());
  const auto t = res.table();
  EXPECT_EQ(t.schema(), "gamma_energy");
  EXPECT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(t.columns().back(), "isotropy_defect");
  const std::string j = res.summary_json();
  EXPECT_NE(j.find("\"study\": \"gamma_energy\""), std::string::npos);
  EXPECT_NE(j.find("\"passed\": true"), std::string::npos);
  EXPECT_THROW(res.extra(0, "missing"), InputError);
}
