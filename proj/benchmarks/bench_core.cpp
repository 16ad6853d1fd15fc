#include "gradflow/dual_action.hpp"
#include "gradflow/dynamics.hpp"
#include "gradflow/experiments.hpp"
#include "gradflow/mesh.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace gradflow;

namespace {

std::vector<Vec2> jittered_sites(int n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<Vec2> sites;
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) sites.push_back({(i + 0.5 + u(rng)) * h, (j + 0.5 + u(rng)) * h});
  }
  return sites;
}

void BM_VoronoiBuild(benchmark::State &state) {
  const auto sites = jittered_sites(static_cast<int>(state.range(0)));
  const Polygon square = make_box({0.0, 0.0}, {1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(build_voronoi_mesh(sites, square));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(sites.size()));
}
BENCHMARK(BM_VoronoiBuild)->Arg(8)->Arg(16)->Arg(32);

void BM_GeneratorApply(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = build_cartesian_mesh(n, n);
  const auto s = make_structure(mesh, Potential::linear({1.0, 0.0}));
  const auto gen = assemble_generator(s);
  const std::vector<double> m(s.pi.values().begin(), s.pi.values().end());
  for (auto _ : state) benchmark::DoNotOptimize(gen.apply(m));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(mesh.num_cells()));
}
BENCHMARK(BM_GeneratorApply)->Arg(16)->Arg(64)->Arg(256);

// Dual-action Poisson solve: CG on the weighted Laplacian.
void BM_ConjugateGradient(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = build_uniform_interval_mesh(n);
  const auto s = make_structure(mesh, Potential::zero());
  std::vector<double> sigma(n, 0.0);
  for (int k = 0; k < n; ++k) sigma[k] = std::cos(3.0 * (k + 0.5) / n);
  double mean = 0.0;
  for (double v : sigma) mean += v / n;
  for (double &v : sigma) v -= mean;
  for (auto _ : state) benchmark::DoNotOptimize(dual_action(s, s.pi, sigma));
}
BENCHMARK(BM_ConjugateGradient)->Arg(64)->Arg(256)->Arg(1024);

void BM_ExactPropagator(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = build_cartesian_mesh(n, n);
  const auto s = make_structure(mesh, Potential::zero());
  const auto gen = assemble_generator(s);
  for (auto _ : state) benchmark::DoNotOptimize(ExactPropagator(gen));
}
BENCHMARK(BM_ExactPropagator)->Arg(8)->Arg(16);

void BM_ImplicitEulerStep(benchmark::State &state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = build_cartesian_mesh(n, n);
  const auto s = make_structure(mesh, Potential::zero());
  const auto gen = assemble_generator(s);
  std::vector<double> w(mesh.num_cells(), 1.0);
  w[0] = 10.0;
  const auto m0 = DiscreteMeasure::normalized(w);
  for (auto _ : state) benchmark::DoNotOptimize(step_implicit_euler(gen, m0, 1e-3));
}
BENCHMARK(BM_ImplicitEulerStep)->Arg(32)->Arg(64);

} // namespace
BENCHMARK_MAIN();
