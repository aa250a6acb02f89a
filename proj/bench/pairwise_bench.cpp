// Serial reference kernels against their OpenMP counterparts.
//
//   ./build/bench/pairwise_bench --benchmark_filter=Msvgd
//
// Thread count follows OMP_NUM_THREADS.

#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "mirrorcoin/mied.hpp"
#include "mirrorcoin/pairwise.hpp"

using namespace mirrorcoin;

namespace {

Cloud dual_cloud(int n, int d) {
  Rng rng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  Cloud y(n, d);
  for (auto& v : y.reshaped()) v = normal(rng);
  return y;
}

MirroredTarget sparse_dirichlet(int d) {
  Vec alpha = Vec::Constant(d + 1, 0.1);
  Vec counts = Vec::Zero(d + 1);
  counts.head(3) << 90, 5, 5;
  return MirroredTarget(std::make_shared<SparseDirichlet>(alpha, counts), MirrorMap::entropic_simplex(d));
}

template <bool Parallel>
void BM_Msvgd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MirroredTarget mt = sparse_dirichlet(20);
  const Cloud y = dual_cloud(n, 20);
  const double h = median_bandwidth(y);
  for (auto _ : state) {
    Cloud dir = Parallel ? parallel::msvgd_direction(y, mt, KernelFamily::IMQ, h)
                         : serial::msvgd_direction(y, mt, KernelFamily::IMQ, h);
    benchmark::DoNotOptimize(dir.data());
  }
}

template <bool Parallel>
void BM_Mksdd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MirroredTarget mt(std::make_shared<ExponentialOrthant>(2, 1.0), MirrorMap::positive_orthant(2));
  const Cloud y = dual_cloud(n, 2);
  const double h = median_bandwidth(y);
  for (auto _ : state) {
    Cloud dir = Parallel ? parallel::mksdd_direction(y, mt, KernelFamily::IMQ, h)
                         : serial::mksdd_direction(y, mt, KernelFamily::IMQ, h);
    benchmark::DoNotOptimize(dir.data());
  }
}

template <bool Parallel>
void BM_EnergyDistance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Cloud a = dual_cloud(n, 20);
  const Cloud b = dual_cloud(1000, 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? parallel::energy_distance(a, b) : serial::energy_distance(a, b));
  }
}

template <Execution Exec>
void BM_MieGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const UniformBox box(2, -1.0, 1.0);
  const Cloud w = dual_cloud(n, 2);
  const Reparam r = Reparam::tanh_box(-1.0, 1.0);
  const Mollifier m = riesz_for_dim(2);
  for (auto _ : state) {
    Cloud g = mie_gradient(w, r, m, box, Exec);
    benchmark::DoNotOptimize(g.data());
  }
}

}  // namespace

BENCHMARK(BM_Msvgd<false>)->Name("Msvgd/serial")->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_Msvgd<true>)->Name("Msvgd/parallel")->Arg(50)->Arg(200)->Arg(800);
BENCHMARK(BM_Mksdd<false>)->Name("Mksdd/serial")->Arg(30)->Arg(300);
BENCHMARK(BM_Mksdd<true>)->Name("Mksdd/parallel")->Arg(30)->Arg(300);
BENCHMARK(BM_EnergyDistance<false>)->Name("EnergyDistance/serial")->Arg(50)->Arg(1000);
BENCHMARK(BM_EnergyDistance<true>)->Name("EnergyDistance/parallel")->Arg(50)->Arg(1000);
BENCHMARK(BM_MieGradient<Execution::Serial>)->Name("MieGradient/serial")->Arg(100)->Arg(1000);
BENCHMARK(BM_MieGradient<Execution::Parallel>)->Name("MieGradient/parallel")->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
