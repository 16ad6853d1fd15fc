#include "gradflow/errors.hpp"
#include "gradflow/mesh.hpp"
#include "gradflow/mesh_io.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gradflow;

TEST(IntervalMesh, TwoUniformCells) {
  const Mesh m = build_uniform_interval_mesh(2);
  ASSERT_EQ(m.num_cells(), 2u);
  ASSERT_EQ(m.num_faces(), 1u);
  EXPECT_DOUBLE_EQ(m.cell(0).site.x, 0.25);
  EXPECT_DOUBLE_EQ(m.cell(1).site.x, 0.75);
  EXPECT_DOUBLE_EQ(m.face(0).distance, 0.5);
  EXPECT_DOUBLE_EQ(m.face(0).area, 1.0);
}

TEST(IntervalMesh, SingleCellHasNoFaces) {
  const Mesh m = build_uniform_interval_mesh(1);
  EXPECT_EQ(m.num_cells(), 1u);
  EXPECT_EQ(m.num_faces(), 0u);
}

TEST(IntervalMesh, GradedDistancesAreMidpointGaps) {
  const std::vector<double> bp{0.0, 0.1, 0.3, 0.6, 1.0};
  const Mesh m = build_interval_mesh(bp);
  ASSERT_EQ(m.num_faces(), 3u);
  EXPECT_NEAR(m.face(0).distance, 0.15, 1e-15);
  EXPECT_NEAR(m.face(1).distance, 0.25, 1e-15);
  EXPECT_NEAR(m.face(2).distance, 0.35, 1e-15);
}

TEST(IntervalMesh, RejectsNonMonotoneBreakpointsWithIndex) {
  const std::vector<double> bp{0.0, 0.4, 0.3, 1.0};
  try {
    build_interval_mesh(bp);
    FAIL() << "expected MeshError";
  } catch (const MeshError &e) {
    EXPECT_EQ(e.index(), 2);
  }
}

TEST(CartesianMesh, FaceCounts) {
  const Mesh a = build_cartesian_mesh(2, 1);
  ASSERT_EQ(a.num_faces(), 1u);
  EXPECT_DOUBLE_EQ(a.face(0).area, 1.0);
  EXPECT_DOUBLE_EQ(a.face(0).distance, 0.5);

  const Mesh b = build_cartesian_mesh(3, 3);
  ASSERT_EQ(b.num_faces(), 12u);
  for (const auto &f : b.faces()) {
    EXPECT_NEAR(f.area, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(f.distance, 1.0 / 3.0, 1e-15);
  }
  EXPECT_EQ(build_cartesian_mesh(1, 1).num_faces(), 0u);
  EXPECT_THROW(build_cartesian_mesh(0, 2), MeshError);
  EXPECT_THROW(build_cartesian_mesh(2, 2, {0.0, 0.0}, {0.0, 1.0}), MeshError);
}

TEST(VoronoiMesh, TwoSiteBisector) {
  const std::vector<Vec2> sites{{0.25, 0.5}, {0.75, 0.5}};
  const Mesh m = build_voronoi_mesh(sites, make_box({0, 0}, {1, 1}));
  ASSERT_EQ(m.num_faces(), 1u);
  EXPECT_NEAR(m.face(0).area, 1.0, 1e-14);
  EXPECT_NEAR(m.face(0).distance, 0.5, 1e-14);
  EXPECT_NEAR(m.face(0).a.x, 0.5, 1e-14);
  EXPECT_NEAR(m.face(0).b.x, 0.5, 1e-14);
}

TEST(VoronoiMesh, SingleSiteIsWholeDomain) {
  const std::vector<Vec2> sites{{0.3, 0.6}};
  const Mesh m = build_voronoi_mesh(sites, make_box({0, 0}, {1, 1}));
  EXPECT_EQ(m.num_cells(), 1u);
  EXPECT_NEAR(m.cell(0).volume, 1.0, 1e-15);
}

TEST(VoronoiMesh, QuadrantSitesGiveCartesian2x2) {
  const std::vector<Vec2> sites{{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  const Mesh m = build_voronoi_mesh(sites, make_box({0, 0}, {1, 1}));
  ASSERT_EQ(m.num_faces(), 4u);
  for (const auto &f : m.faces()) {
    EXPECT_NEAR(f.area, 0.5, 1e-14);
    EXPECT_NEAR(f.distance, 0.5, 1e-14);
  }
}

TEST(VoronoiMesh, RejectsDuplicateAndOutsideSites) {
  const std::vector<Vec2> dup{{0.2, 0.2}, {0.2, 0.2}};
  EXPECT_THROW(build_voronoi_mesh(dup, make_box({0, 0}, {1, 1})), MeshError);
  const std::vector<Vec2> outside{{0.2, 0.2}, {1.2, 0.2}};
  EXPECT_THROW(build_voronoi_mesh(outside, make_box({0, 0}, {1, 1})), MeshError);
}

TEST(Regularity, UniformAndCartesianZeta) {
  const auto r1 = regularity_report(build_uniform_interval_mesh(10));
  EXPECT_NEAR(r1.mesh_size, 0.1, 1e-15);
  EXPECT_NEAR(r1.zeta_inner, 0.5, 1e-12);
  const auto r2 = regularity_report(build_cartesian_mesh(6, 6));
  EXPECT_NEAR(r2.mesh_size, std::sqrt(2.0) / 6.0, 1e-15);
  EXPECT_NEAR(r2.zeta_inner, 1.0 / (2.0 * std::sqrt(2.0)), 1e-12);
  EXPECT_EQ(regularity_report(build_uniform_interval_mesh(1)).zeta_area, 1.0);
}

TEST(CellsMeetingBox, OpenBoxExcludesClosureContact) {
  const Mesh m = build_uniform_interval_mesh(4);
  const auto cells = cells_meeting_open_box(m, {0.0, 0.0}, {0.5, 0.0});
  EXPECT_EQ(cells, (std::vector<int>{0, 1}));
}

// Property: Voronoi meshes from random sites have orthogonal faces, tile the
// domain, and sites bisect their faces.
TEST(VoronoiProperty, OrthogonalityAndTiling) {
  gradflow::testing::Gen g(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = g.integer(2, 60);
    std::vector<Vec2> sites;
    for (int i = 0; i < n; ++i) sites.push_back({g.uniform(0.01, 0.99), g.uniform(0.01, 0.99)});
    const Mesh m = build_voronoi_mesh(sites, make_box({0, 0}, {1, 1}));
    double total = 0.0;
    for (const auto &c : m.cells()) total += c.volume;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE(orthogonality_defect(m), 1e-9);
    for (const auto &f : m.faces()) {
      const Vec2 mid = 0.5 * (f.a + f.b);
      // Interface points are equidistant from both sites.
      EXPECT_NEAR(distance(f.a, m.cell(f.k).site), distance(f.a, m.cell(f.l).site), 1e-9);
      EXPECT_NEAR(distance(mid, m.cell(f.k).site), distance(mid, m.cell(f.l).site), 1e-9);
    }
    EXPECT_TRUE(m.connected());
  }
}

TEST(MeshIo, RoundTripIsBitExact) {
  gradflow::testing::Gen g(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Mesh m = g.mesh();
    const std::string text = mesh_to_string(m);
    const Mesh back = mesh_from_string(text);
    ASSERT_EQ(back.num_cells(), m.num_cells());
    ASSERT_EQ(back.num_faces(), m.num_faces());
    for (std::size_t k = 0; k < m.num_cells(); ++k) {
      EXPECT_EQ(back.cell(k).site, m.cell(k).site);
      EXPECT_EQ(back.cell(k).volume, m.cell(k).volume);
    }
    for (std::size_t f = 0; f < m.num_faces(); ++f) {
      EXPECT_EQ(back.face(f).area, m.face(f).area);
      EXPECT_EQ(back.face(f).distance, m.face(f).distance);
    }
    EXPECT_EQ(mesh_to_string(back), text);
  }
}

TEST(MeshIo, MalformedInputIsInputError) {
  EXPECT_THROW(mesh_from_string("{not json"), InputError);
  EXPECT_THROW(mesh_from_string("{}"), InputError);
}

TEST(Geometry, ClipAndShrink) {
  const Polygon box = make_box({0, 0}, {1, 1});
  EXPECT_NEAR(polygon_area(box), 1.0, 1e-15);
  HalfPlane hp;
  hp.normal = {1.0, 0.0};
  hp.offset = 0.25;
  EXPECT_NEAR(polygon_area(clip(box, hp)), 0.25, 1e-15);
  EXPECT_NEAR(polygon_area(shrink(box, 0.1)), 0.64, 1e-14);
  EXPECT_TRUE(contains(box, {0.5, 0.5}));
  EXPECT_FALSE(contains(box, {1.5, 0.5}));
}
