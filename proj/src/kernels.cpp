#include "membrane/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace membrane::kernels {

namespace serial {

void apply_stencil(const StencilLayout& layout, std::span<const double> in, std::span<double> out) {
  const int nx = layout.nx;
  const int ny = layout.ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (!layout.free[k]) {
        out[k] = 0.0;
        continue;
      }
      // free nodes are never on the boundary ring
      out[k] = 4.0 * in[k] - in[k - 1] - in[k + 1] - in[k - nx] - in[k + nx];
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + beta * y[k];
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void laplacian(int nx, int ny, double h, std::span<const double> in, std::span<double> out) {
  const double inv_h2 = 1.0 / (h * h);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
        out[k] = 0.0;
        continue;
      }
      out[k] = (in[k - 1] + in[k + 1] + in[k - nx] + in[k + nx] - 4.0 * in[k]) * inv_h2;
    }
  }
}

}  // namespace serial

namespace parallel {

void apply_stencil(const StencilLayout& layout, std::span<const double> in, std::span<double> out) {
  const int nx = layout.nx;
  const int ny = layout.ny;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (!layout.free[k]) {
        out[k] = 0.0;
        continue;
      }
      out[k] = 4.0 * in[k] - in[k - 1] - in[k + 1] - in[k - nx] - in[k + nx];
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return block_sum(a.size(), [&](std::size_t k) { return a[k] * b[k]; });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t k = 0; k < n; ++k) y[k] = x[k] + beta * y[k];
}

double max_abs(std::span<const double> a) {
  const auto n = static_cast<std::int64_t>(a.size());
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m)
  for (std::int64_t k = 0; k < n; ++k) m = std::max(m, std::abs(a[k]));
  return m;
}

void laplacian(int nx, int ny, double h, std::span<const double> in, std::span<double> out) {
  const double inv_h2 = 1.0 / (h * h);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) {
        out[k] = 0.0;
        continue;
      }
      out[k] = (in[k - 1] + in[k + 1] + in[k - nx] + in[k + nx] - 4.0 * in[k]) * inv_h2;
    }
  }
}

}  // namespace parallel

}  // namespace membrane::kernels
