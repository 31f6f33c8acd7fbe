#include <cmath>
#include <memory>
#include <numbers>

#include <benchmark/benchmark.h>

#include "pim/assembly.hpp"
#include "pim/eigensolve.hpp"
#include "pim/operators.hpp"
#include "pim/pointcloud.hpp"

namespace {

std::shared_ptr<const pim::PointCloud> interval_cloud(int n) {
  return std::make_shared<const pim::PointCloud>(pim::sample_interval(n, std::numbers::pi));
}

double bandwidth(const pim::PointCloud& cloud) { return 0.01 * std::sqrt(cloud.h_estimate()); }

void BM_AssembleInterval(benchmark::State& state) {
  const auto cloud = interval_cloud(static_cast<int>(state.range(0)));
  const auto kernel = pim::wendland_kernel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(pim::assemble_pencil(cloud, kernel, bandwidth(*cloud)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AssembleInterval)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

void BM_AssembleSphere(benchmark::State& state) {
  const auto cloud = std::make_shared<const pim::PointCloud>(pim::sample_sphere(static_cast<int>(state.range(0))));
  const auto kernel = pim::wendland_kernel();
  const double t = 0.1 * cloud->h_estimate();
  for (auto _ : state) benchmark::DoNotOptimize(pim::assemble_pencil(cloud, kernel, t));
}
BENCHMARK(BM_AssembleSphere)->RangeMultiplier(4)->Range(1 << 10, 1 << 14);

void BM_DenseEigs(benchmark::State& state) {
  const auto cloud = interval_cloud(static_cast<int>(state.range(0)));
  const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), bandwidth(*cloud));
  for (auto _ : state) benchmark::DoNotOptimize(pim::dense_generalized_eigs(pencil.A, pencil.B, 10));
}
BENCHMARK(BM_DenseEigs)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_LanczosEigs(benchmark::State& state) {
  const auto cloud = interval_cloud(static_cast<int>(state.range(0)));
  const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), bandwidth(*cloud));
  for (auto _ : state) benchmark::DoNotOptimize(pim::lanczos_generalized_eigs(pencil.A, pencil.B, 10));
}
BENCHMARK(BM_LanczosEigs)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMillisecond);

void BM_PoissonCholesky(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto cloud = interval_cloud(n);
  const auto pencil = pim::assemble_pencil(cloud, pim::wendland_kernel(), bandwidth(*cloud));
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) f[i] = -std::cos(cloud->points()(i, 0));
  for (auto _ : state) benchmark::DoNotOptimize(pim::poisson_solve(pencil, f));
}
BENCHMARK(BM_PoissonCholesky)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
