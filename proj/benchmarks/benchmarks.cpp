#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "hydro/gbt.hpp"
#include "hydro/gpr.hpp"
#include "hydro/neuralnet.hpp"
#include "hydro/numerics/linalg.hpp"
#include "hydro/pca.hpp"

namespace {

using namespace hydro;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

Vector random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

Matrix spd(std::size_t n) {
  const auto a = random_matrix(n, n, 1);
  auto k = a.transpose() * a;
  for (std::size_t i = 0; i < n; ++i) k(i, i) += static_cast<double>(n);
  return k;
}

void BM_Cholesky(benchmark::State& state) {
  const auto k = spd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(CholeskyFactor(k));
}
BENCHMARK(BM_Cholesky)->Arg(100)->Arg(400)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Svd(benchmark::State& state) {
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 48, 2);
  for (auto _ : state) benchmark::DoNotOptimize(svd(x));
}
BENCHMARK(BM_Svd)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_PcaFit(benchmark::State& state) {
  const auto x = random_matrix(1460, 24, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(x, MinEnergy{0.99}));
}
BENCHMARK(BM_PcaFit)->Unit(benchmark::kMillisecond);

void BM_LogMarginalLikelihood(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto z = random_matrix(n, 6, 4);
  const auto y = random_vector(n, 5);
  GprHyperparams h;
  h.log_length_scales = Vector(6, 0.5);
  h.log_nugget_std = -3.0;
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal_likelihood(h, z, y));
}
BENCHMARK(BM_LogMarginalLikelihood)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_GbtFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_matrix(n, 48, 6);
  Vector y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = std::sin(x(r, 0)) + x(r, 1) * x(r, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_gbt(x, y, GbtConfig{}));
}
BENCHMARK(BM_GbtFit)->Arg(1460)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_CnnForwardBatch(benchmark::State& state) {
  const auto net = build_cnn(24, 7);
  const auto x = random_matrix(static_cast<std::size_t>(state.range(0)), 48, 8);
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(net, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CnnForwardBatch)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_CnnBackward(benchmark::State& state) {
  const auto net = build_cnn(24, 9);
  const auto x = random_vector(48, 10);
  for (auto _ : state) benchmark::DoNotOptimize(backward(net, x, 0.5));
}
BENCHMARK(BM_CnnBackward)->Unit(benchmark::kMicrosecond);

void BM_MlpForwardBatch(benchmark::State& state) {
  const auto net = build_mlp(24, 11);
  const auto x = random_matrix(1024, 48, 12);
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(net, x));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_MlpForwardBatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
