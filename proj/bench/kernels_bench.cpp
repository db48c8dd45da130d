// Serial reference vs OpenMP kernels. Arg = nodes per side.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "membrane/kernels.hpp"

namespace k = membrane::kernels;

namespace {

struct Fixture {
  int n;
  std::vector<std::uint8_t> free;
  std::vector<double> a, b, out;

  explicit Fixture(int n_) : n(n_), free(static_cast<std::size_t>(n_) * n_, 0), a(free.size()), b(free.size()), out(free.size()) {
    for (int j = 1; j + 1 < n; ++j)
      for (int i = 1; i + 1 < n; ++i) free[static_cast<std::size_t>(j) * n + i] = (i + j) % 7 != 0;
    for (std::size_t q = 0; q < a.size(); ++q) {
      a[q] = free[q] ? 0.001 * static_cast<double>(q % 1000) : 0.0;
      b[q] = free[q] ? 1.0 - 0.0005 * static_cast<double>(q % 997) : 0.0;
    }
  }
  k::StencilLayout layout() const { return {n, n, free}; }
};

template <bool Parallel>
void BM_stencil(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) k::parallel::apply_stencil(f.layout(), f.a, f.out);
    else k::serial::apply_stencil(f.layout(), f.a, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.a.size()));
}

template <bool Parallel>
void BM_dot(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    double d = Parallel ? k::parallel::dot(f.a, f.b) : k::serial::dot(f.a, f.b);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.a.size()));
}

template <bool Parallel>
void BM_laplacian(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  const double h = 2.0 / (f.n - 1);
  for (auto _ : state) {
    if constexpr (Parallel) k::parallel::laplacian(f.n, f.n, h, f.a, f.out);
    else k::serial::laplacian(f.n, f.n, h, f.a, f.out);
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.a.size()));
}

template <bool Parallel>
void BM_axpy(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) k::parallel::axpy(1e-9, f.a, f.b);
    else k::serial::axpy(1e-9, f.a, f.b);
    benchmark::DoNotOptimize(f.b.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.a.size()));
}

}  // namespace

#define SIZES ->Arg(129)->Arg(257)->Arg(513)->Arg(1025)
BENCHMARK(BM_stencil<false>) SIZES;
BENCHMARK(BM_stencil<true>) SIZES;
BENCHMARK(BM_dot<false>) SIZES;
BENCHMARK(BM_dot<true>) SIZES;
BENCHMARK(BM_laplacian<false>) SIZES;
BENCHMARK(BM_laplacian<true>) SIZES;
BENCHMARK(BM_axpy<false>) SIZES;
BENCHMARK(BM_axpy<true>) SIZES;

BENCHMARK_MAIN();
