#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the
// straightforward reference used by the tests and the benchmark, `parallel`
// is the OpenMP version the library calls.
//
// Reductions in `parallel` sum fixed-size blocks and combine the block sums in
// index order, so results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace membrane::kernels {

/// Layout of a masked 5-point operator on an nx-by-ny node array.
/// free[k] != 0 marks unknowns; all other entries of input vectors must be 0.
struct StencilLayout {
  int nx = 0;
  int ny = 0;
  std::span<const std::uint8_t> free;
};

inline constexpr std::size_t kReductionBlock = 4096;

namespace serial {

/// out[k] = 4 in[k] - sum of the four neighbours, on free nodes; 0 elsewhere.
void apply_stencil(const StencilLayout& layout, std::span<const double> in, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta y
void xpby(std::span<const double> x, double beta, std::span<double> y);
double max_abs(std::span<const double> a);
/// 5-point Laplacian on interior nodes, 0 on the boundary ring.
void laplacian(int nx, int ny, double h, std::span<const double> in, std::span<double> out);

}  // namespace serial

namespace parallel {

void apply_stencil(const StencilLayout& layout, std::span<const double> in, std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
double max_abs(std::span<const double> a);
void laplacian(int nx, int ny, double h, std::span<const double> in, std::span<double> out);

/// Deterministic sum of f(0..n-1): blocks of kReductionBlock summed in
/// parallel, block sums combined in order.
template <typename F>
double block_sum(std::size_t n, F&& f) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::int64_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = lo + kReductionBlock < n ? lo + kReductionBlock : n;
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += f(k);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace parallel

}  // namespace membrane::kernels
