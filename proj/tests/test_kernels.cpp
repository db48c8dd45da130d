#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>
#include <vector>

#include "membrane/kernels.hpp"

using namespace membrane;
namespace k = membrane::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

struct Masked {
  int nx, ny;
  std::vector<std::uint8_t> free;
  std::vector<double> x;
};

Masked masked_input(int nx, int ny) {
  Masked m{nx, ny, std::vector<std::uint8_t>(nx * ny, 0), random_vector(nx * ny, 3)};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const bool interior = i > 0 && j > 0 && i < nx - 1 && j < ny - 1;
      m.free[j * nx + i] = interior && (3 * i + j) % 5 != 0;
      if (!m.free[j * nx + i]) m.x[j * nx + i] = 0.0;
    }
  return m;
}

}  // namespace

TEST_CASE("stencil: serial and parallel agree bitwise") {
  const Masked m = masked_input(131, 97);
  const k::StencilLayout layout{m.nx, m.ny, m.free};
  std::vector<double> a(m.x.size(), 7.0), b(m.x.size(), -7.0);
  k::serial::apply_stencil(layout, m.x, a);
  k::parallel::apply_stencil(layout, m.x, b);
  CHECK(a == b);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!m.free[i]) CHECK(a[i] == 0.0);
}

TEST_CASE("stencil is the symmetric masked operator") {
  // <A x, y> = <x, A y> and <A x, x> > 0 on the free set.
  const Masked m = masked_input(23, 19);
  std::vector<double> y = random_vector(m.x.size(), 11);
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!m.free[i]) y[i] = 0.0;
  const k::StencilLayout layout{m.nx, m.ny, m.free};
  std::vector<double> ax(m.x.size()), ay(m.x.size());
  k::serial::apply_stencil(layout, m.x, ax);
  k::serial::apply_stencil(layout, y, ay);
  CHECK(k::serial::dot(ax, y) == doctest::Approx(k::serial::dot(m.x, ay)).epsilon(1e-13));
  CHECK(k::serial::dot(ax, m.x) > 0.0);
}

TEST_CASE("vector kernels agree with the serial reference") {
  for (std::size_t n : {std::size_t{5}, std::size_t{4096}, std::size_t{50001}}) {
    const auto a = random_vector(n, 1), b = random_vector(n, 2);
    CHECK(k::parallel::dot(a, b) == doctest::Approx(k::serial::dot(a, b)).epsilon(1e-13));
    CHECK(k::parallel::max_abs(a) == k::serial::max_abs(a));

    auto y1 = b, y2 = b;
    k::serial::axpy(0.37, a, y1);
    k::parallel::axpy(0.37, a, y2);
    CHECK(y1 == y2);
    k::serial::xpby(a, -1.25, y1);
    k::parallel::xpby(a, -1.25, y2);
    CHECK(y1 == y2);
  }
}

TEST_CASE("parallel reductions do not depend on the thread count") {
  const auto a = random_vector(100003, 5), b = random_vector(100003, 6);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = k::parallel::dot(a, b);
  omp_set_num_threads(4);
  const double four = k::parallel::dot(a, b);
  omp_set_num_threads(saved);
  CHECK(one == four);
}

TEST_CASE("laplacian kernel: exact on quadratics, serial equals parallel") {
  const int nx = 41, ny = 33;
  const double h = 0.05;
  std::vector<double> u(nx * ny), l1(nx * ny), l2(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = i * h, y = j * h;
      u[j * nx + i] = 2 * x * x - y * y + x * y;
    }
  k::serial::laplacian(nx, ny, h, u, l1);
  k::parallel::laplacian(nx, ny, h, u, l2);
  CHECK(l1 == l2);
  CHECK(l1[5 * nx + 7] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(l1[0] == 0.0);
}
