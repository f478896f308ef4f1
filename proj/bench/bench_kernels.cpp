// Serial reference vs OpenMP kernels at the sizes used by training and
// surface evaluation. Run with OMP_NUM_THREADS set to compare scaling.
#include <benchmark/benchmark.h>

#include "sngp/kernels.hpp"
#include "sngp/linalg.hpp"
#include "sngp/rng.hpp"

namespace {

using namespace sngp;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.flat()) v = rng.normal();
  return m;
}

// Lower-triangular factor with a safe diagonal.
Matrix random_lower(std::size_t n, std::uint64_t seed) {
  Matrix l = random_matrix(n, n, seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) l(i, j) = 0.0;
    l(i, i) = 2.0 + std::abs(l(i, i));
  }
  return l;
}

template <auto Fn>
void BM_affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n, 128, 1), w = random_matrix(128, 128, 2);
  const Vector b(128, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, w, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Fn>
void BM_random_features(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix h = random_matrix(n, 128, 3), w = random_matrix(1024, 128, 4);
  const Vector b(1024, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(h, w, b, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

template <auto Fn>
void BM_accumulate_outer(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix phi = random_matrix(128, d, 5);
  const Vector weights(128, 0.25);
  Matrix p(d, d);
  for (auto _ : state) {
    Fn(p, phi, weights, 0.001);
    benchmark::ClobberMemory();
  }
}

template <auto Fn>
void BM_quadratic_forms(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Matrix lower = random_lower(d, 6), phi = random_matrix(1000, d, 7);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(lower, phi));
}

}  // namespace

BENCHMARK(BM_affine<kernels::serial::affine>)->Name("affine/serial")->Arg(1000)->Arg(10000);
BENCHMARK(BM_affine<kernels::omp::affine>)->Name("affine/omp")->Arg(1000)->Arg(10000);
BENCHMARK(BM_random_features<kernels::serial::random_features>)->Name("random_features/serial")->Arg(128)->Arg(2000);
BENCHMARK(BM_random_features<kernels::omp::random_features>)->Name("random_features/omp")->Arg(128)->Arg(2000);
BENCHMARK(BM_accumulate_outer<kernels::serial::accumulate_weighted_outer>)->Name("accumulate_outer/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_accumulate_outer<kernels::omp::accumulate_weighted_outer>)->Name("accumulate_outer/omp")->Arg(256)->Arg(1024);
BENCHMARK(BM_quadratic_forms<kernels::serial::quadratic_forms>)->Name("quadratic_forms/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_quadratic_forms<kernels::omp::quadratic_forms>)->Name("quadratic_forms/omp")->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
