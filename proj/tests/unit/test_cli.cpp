#include "cli.hpp"

#include "gradflow/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gradflow");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = gradflow::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path dir(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / "gradflow_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

} // namespace

TEST(Cli, MeshUniform) {
  const auto d = dir("mesh1");
  const auto r = run({"mesh", "--kind", "uniform1d", "--n", "16", "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(d / "mesh.json"));
  const auto t = gradflow::CsvTable::load(d / "mesh_report.csv");
  EXPECT_EQ(t.rows().size(), 16u);
  EXPECT_NE(r.out.find("zeta 0.5"), std::string::npos);
}

TEST(Cli, MeshCartesianIsotropic) {
  const auto d = dir("mesh2");
  ASSERT_EQ(run({"mesh", "--kind", "cartesian", "--n", "8", "--out", d.string()}).code, 0);
  const auto t = gradflow::CsvTable::load(d / "mesh_report.csv");
  ASSERT_EQ(t.rows().size(), 64u);
  const auto col = t.column("isotropy_defect");
  for (const auto &row : t.rows()) EXPECT_LE(gradflow::parse_real(row[col]), 1e-12);
}

TEST(Cli, DuplicateSitesExitTwo) {
  const auto d = dir("mesh3");
  std::ofstream(d / "sites.csv") << "x,y\n0.2,0.2\n0.2,0.2\n0.7,0.7\n";
  const auto r = run({"mesh", "--kind", "voronoi", "--sites", (d / "sites.csv").string(), "--out", d.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("duplicate"), std::string::npos);
}

TEST(Cli, MissingFilesAndBadFlagsExitTwo) {
  const auto d = dir("missing");
  EXPECT_EQ(run({"edi", "--mesh", (d / "nope.json").string(), "--out", d.string()}).code, 2);
  EXPECT_EQ(run({"solve", "--m0", (d / "nope.csv").string(), "--out", d.string()}).code, 2);
  EXPECT_EQ(run({"solve", "--bogus"}).code, 2);
  EXPECT_EQ(run({"gamma", "--family", "hexagon:3", "--out", d.string()}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, EdiCheckPasses) {
  const auto d = dir("edi");
  ASSERT_EQ(run({"mesh", "--kind", "uniform1d", "--n", "16", "--out", d.string()}).code, 0);
  const auto r = run({"edi", "--mesh", (d / "mesh.json").string(), "--potential", "zero", "--m0", "projected:cosine",
                      "--T", "0.5", "--M", "256", "--check", "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("residual"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "edi_summary.json"));
}

TEST(Cli, CheckFailureExitThree) {
  const auto d = dir("edi3");
  // Too few Simpson intervals for the 1e-5 H0 rule on a linear potential.
  const auto r = run({"edi", "--kind", "uniform1d", "--n", "32", "--potential", "linear:1", "--m0", "projected:cosine",
                      "--mix", "0.1", "--T", "0.5", "--M", "8", "--check", "--out", d.string()});
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, ConvergeFiveRows) {
  const auto d = dir("conv");
  const auto r = run({"converge", "--family", "uniform1d:16..256", "--potential", "zero", "--rho0", "cosine", "--T", "0.1",
                      "--out", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = gradflow::CsvTable::load(d / "converge.csv");
  EXPECT_EQ(t.rows().size(), 5u);
  EXPECT_EQ(t.rows()[0][t.column("order")], "nan");
  EXPECT_NE(t.rows()[4][t.column("order")], "nan");
}

TEST(Cli, SolveStationaryIsConstant) {
  const auto d = dir("solve");
  ASSERT_EQ(run({"solve", "--m0", "stationary", "--out", d.string()}).code, 0);
  const auto t = gradflow::CsvTable::load(d / "trajectory.csv");
  const auto col = t.column("mass");
  for (const auto &row : t.rows()) EXPECT_NEAR(gradflow::parse_real(row[col]), 1.0 / 16.0, 1e-15);
}

TEST(Cli, OutputsAreDeterministic) {
  const auto a = dir("det_a"), b = dir("det_b");
  for (const auto &d : {a, b}) {
    ASSERT_EQ(run({"gamma", "--family", "voronoi:4..16", "--phi", "coscos", "--out", d.string()}).code, 0);
  }
  EXPECT_EQ(gradflow::read_file(a / "gamma.csv"), gradflow::read_file(b / "gamma.csv"));
  EXPECT_EQ(gradflow::read_file(a / "gamma_summary.json"), gradflow::read_file(b / "gamma_summary.json"));
}

TEST(Cli, DiagnoseAndGammaVariants) {
  const auto d = dir("diag");
  ASSERT_EQ(run({"diagnose", "--kind", "voronoi", "--n", "6", "--m0", "projected:cosine", "--out", d.string()}).code, 0);
  EXPECT_TRUE(fs::exists(d / "path_constants.csv"));
  EXPECT_TRUE(fs::exists(d / "holder.csv"));
  EXPECT_EQ(run({"gamma", "--affine", "--family", "cartesian:8..32", "--xi", "0.6,0.8", "--check", "--out", d.string()}).code, 0);
  EXPECT_EQ(run({"converge", "--study", "lower-bound", "--family", "uniform1d:8..32", "--check", "--out", d.string()}).code, 0);
}
