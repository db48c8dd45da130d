#include "membrane/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "membrane/kernels.hpp"

namespace membrane {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_disk(const Grid2D& g, Point c, double r, const char* what) {
  if (!(r > 0.0)) throw MonotonicityError(std::string(what) + ": radius must be positive");
  if (!g.contains_disk(c, r)) {
    std::ostringstream msg;
    msg << what << ": ball of radius " << r << " at (" << c.x << ", " << c.y << ") exits the domain";
    throw MonotonicityError(msg.str());
  }
}

void require_quadrature(int nq) {
  if (nq < 4) throw MonotonicityError("quadrature density must be at least 4");
}

// Polar midpoint rule for ∫_{B_r(c)} F.
template <typename F>
double disk_integral(Point c, double r, int nq, F&& integrand) {
  const double dr = r / nq, dt = 2.0 * kPi / nq;
  const std::size_t n = static_cast<std::size_t>(nq) * static_cast<std::size_t>(nq);
  const double sum = kernels::parallel::block_sum(n, [&](std::size_t k) {
    const int a = static_cast<int>(k / nq), b = static_cast<int>(k % nq);
    const double rho = (a + 0.5) * dr, t = (b + 0.5) * dt;
    return integrand(Point{c.x + rho * std::cos(t), c.y + rho * std::sin(t)}) * rho;
  });
  return sum * dr * dt;
}

// Trapezoid rule for ∫_{∂B_r(c)} F.
template <typename F>
double circle_integral(Point c, double r, int nq, F&& integrand) {
  const double dt = 2.0 * kPi / nq;
  const double sum = kernels::parallel::block_sum(static_cast<std::size_t>(nq), [&](std::size_t b) {
    const double t = static_cast<double>(b) * dt;
    return integrand(Point{c.x + r * std::cos(t), c.y + r * std::sin(t)});
  });
  return sum * r * dt;
}

double gradient_energy(const GradientFields& g, Point c, double r, int nq) {
  return disk_integral(c, r, nq, [&](Point p) {
    const double gx = interpolate(g.dx, p), gy = interpolate(g.dy, p);
    return gx * gx + gy * gy;
  });
}

}  // namespace

RadiusLadder RadiusLadder::make(Point center, std::vector<double> radii, const Grid2D& grid) {
  if (radii.empty()) throw MonotonicityError("radius ladder is empty");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw MonotonicityError("radius ladder entries must be positive");
    if (k > 0 && !(radii[k] < radii[k - 1])) throw MonotonicityError("radius ladder must be strictly decreasing");
  }
  require_disk(grid, center, radii.front(), "radius ladder");
  return {center, std::move(radii)};
}

RadiusLadder RadiusLadder::from_multiples(Point center, std::vector<double> multiples_of_h, const Grid2D& grid) {
  std::sort(multiples_of_h.begin(), multiples_of_h.end(), std::greater<>());
  for (double& m : multiples_of_h) m *= grid.h();
  return make(center, std::move(multiples_of_h), grid);
}

void MonotonicityProfile::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::vector<int> flag(values.size(), 0);
  for (const auto& v : violations) flag[v.second] = 1;
  out << std::setprecision(17) << "r,value,violation_flag\n";
  for (std::size_t k = 0; k < values.size(); ++k) out << ladder.radii[k] << ',' << values[k] << ',' << flag[k] << '\n';
}

double weiss_phi(const ScalarField& u, Point x0, double r, double lambda_plus, double lambda_minus, int nq) {
  return weiss_phi(u, gradient_fields(u), x0, r, lambda_plus, lambda_minus, nq);
}

double weiss_phi(const ScalarField& u, const GradientFields& grad, Point x0, double r, double lambda_plus,
                 double lambda_minus, int nq) {
  require_quadrature(nq);
  require_disk(u.grid(), x0, r, "weiss_phi");
  if (!(r > 2.0 * u.grid().h())) throw MonotonicityError("weiss_phi: radius under-resolved (needs r > 2h)");
  const double bulk = disk_integral(x0, r, nq, [&](Point p) {
    const double gx = interpolate(grad.dx, p), gy = interpolate(grad.dy, p);
    const double v = interpolate(u, p);
    return gx * gx + gy * gy + lambda_plus * std::max(v, 0.0) + lambda_minus * std::max(-v, 0.0);
  });
  const double rim = circle_integral(x0, r, nq, [&](Point p) {
    const double v = interpolate(u, p);
    return v * v;
  });
  const double r2 = r * r;
  return bulk / (r2 * r2) - 2.0 * rim / (r2 * r2 * r);
}

double acf_psi(const ScalarField& h1, const ScalarField& h2, Point z, double r, int nq) {
  require_same_grid(h1.grid(), h2.grid(), "acf_psi");
  for (const ScalarField* h : {&h1, &h2})
    for (double v : h->values())
      if (v < -1e-12) throw MonotonicityError("acf_psi: input function is negative");
  return acf_psi(gradient_fields(h1), gradient_fields(h2), z, r, nq);
}

double acf_psi(const GradientFields& grad_h1, const GradientFields& grad_h2, Point z, double r, int nq) {
  require_quadrature(nq);
  require_disk(grad_h1.dx.grid(), z, r, "acf_psi");
  const double a = gradient_energy(grad_h1, z, r, nq);
  if (a == 0.0) return 0.0;
  const double b = gradient_energy(grad_h2, z, r, nq);
  const double r2 = r * r;
  return a * b / (r2 * r2);
}

std::pair<ScalarField, ScalarField> directional_parts(const ScalarField& u, Vec2 e) {
  const double len = std::hypot(e[0], e[1]);
  if (std::abs(len - 1.0) > 1e-12) throw MonotonicityError("directional_parts: direction must be a unit vector");
  const GradientFields g = gradient_fields(u);
  ScalarField h1(u.grid()), h2(u.grid());
  auto& a = h1.values();
  auto& b = h2.values();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = e[0] * g.dx.values()[k] + e[1] * g.dy.values()[k];
    a[k] = std::max(d, 0.0);
    b[k] = -std::min(d, 0.0);
  }
  return {std::move(h1), std::move(h2)};
}

double s_norm(const ScalarField& u, Point y, double r, int nq) {
  require_quadrature(nq);
  require_disk(u.grid(), y, r, "s_norm");
  const double rim = circle_integral(y, r, nq, [&](Point p) {
    const double v = interpolate(u, p);
    return v * v;
  });
  return std::sqrt(std::max(rim, 0.0) / r);
}

namespace {

ScalarField rescale(const ScalarField& u, Point y, double r, const Grid2D& target, double divisor) {
  const Grid2D& src = u.grid();
  ScalarField out(target);
  for (int j = 0; j < target.ny(); ++j) {
    for (int i = 0; i < target.nx(); ++i) {
      const Point x = target.node(i, j);
      Point p = y + r * x;
      if (norm(x) > 1.0 + 1e-12) {
        p.x = std::clamp(p.x, src.x_min(), src.x_max());
        p.y = std::clamp(p.y, src.y_min(), src.y_max());
      }
      out(i, j) = interpolate(u, p) / divisor;
    }
  }
  return out;
}

}  // namespace

ScalarField blowup_rescale(const ScalarField& u, Point y, double r, const Grid2D& target, int nq) {
  require_disk(u.grid(), y, r, "blowup_rescale");
  const double s = s_norm(u, y, r, nq);
  if (!(s > 0.0)) {
    std::ostringstream msg;
    msg << "blowup_rescale: S_r vanishes at (" << y.x << ", " << y.y << "), r = " << r;
    throw ZeroNormError(msg.str());
  }
  return rescale(u, y, r, target, s);
}

ScalarField quadratic_rescale(const ScalarField& u, Point y, double r, const Grid2D& target) {
  require_disk(u.grid(), y, r, "quadratic_rescale");
  return rescale(u, y, r, target, r * r);
}

double default_tol_mono(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return 1e-2 * m + 1e-8;
}

namespace {

MonotonicityProfile finish_profile(const RadiusLadder& ladder, std::vector<double> values, double tol_mono) {
  MonotonicityProfile out{ladder, std::move(values), {}, tol_mono};
  if (out.tol_mono < 0.0) out.tol_mono = default_tol_mono(out.values);
  for (std::size_t k = 0; k + 1 < out.values.size(); ++k) {
    if (!std::isfinite(out.values[k]) || !std::isfinite(out.values[k + 1]))
      throw MonotonicityError("non-finite functional value on ladder");
    if (out.values[k + 1] > out.values[k] + out.tol_mono) out.violations.emplace_back(k, k + 1);
  }
  return out;
}

}  // namespace

MonotonicityProfile phi_ladder(const ScalarField& u, const RadiusLadder& ladder, double lambda_plus,
                               double lambda_minus, int nq, double tol_mono) {
  const GradientFields grad = gradient_fields(u);
  std::vector<double> values;
  for (double r : ladder.radii) values.push_back(weiss_phi(u, grad, ladder.center, r, lambda_plus, lambda_minus, nq));
  return finish_profile(ladder, std::move(values), tol_mono);
}

MonotonicityProfile psi_ladder(const ScalarField& h1, const ScalarField& h2, const RadiusLadder& ladder, int nq,
                               double tol_mono) {
  require_same_grid(h1.grid(), h2.grid(), "psi_ladder");
  for (const ScalarField* h : {&h1, &h2})
    for (double v : h->values())
      if (v < -1e-12) throw MonotonicityError("psi_ladder: input function is negative");
  const GradientFields g1 = gradient_fields(h1), g2 = gradient_fields(h2);
  std::vector<double> values;
  for (double r : ladder.radii) values.push_back(acf_psi(g1, g2, ladder.center, r, nq));
  return finish_profile(ladder, std::move(values), tol_mono);
}

}  // namespace membrane
