#include "membrane/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "membrane/experiment.hpp"
#include "membrane/freeboundary.hpp"
#include "membrane/kernels.hpp"
#include "membrane/monotonicity.hpp"
#include "membrane/profiles.hpp"
#include "membrane/solver.hpp"

namespace membrane {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

double max_error(const ScalarField& u, const std::function<double(Point)>& exact) {
  double err = 0.0;
  const Grid2D& g = u.grid();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) err = std::max(err, std::abs(u(i, j) - exact(g.node(i, j))));
  return err;
}

SelftestResult polynomial_reproduction() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const OnePhasePolynomial q = OnePhasePolynomial::isotropic(2.0);
  const SolveResult r = solve(ProblemSpec::make(profile_boundary_trace(q, g), 2.0, 2.0));
  const double err = max_error(r.u, [&](Point p) { return eval_polynomial(q, p); });
  return {"solver reproduces (λ₊/8)|x|²", err <= 1e-8, "max error " + num(err)};
}

SelftestResult zero_data() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 17, 17);
  const SolveResult r = solve(ProblemSpec::make(BoundaryValues(g), 2.0, 2.0));
  const double err = max_error(r.u, [](Point) { return 0.0; });
  return {"zero data gives zero", err == 0.0 && r.report.iterations == 1,
          "sweeps " + std::to_string(r.report.iterations)};
}

SelftestResult comparison_constant_shift() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const GlobalProfile v;
  const ProblemSpec a = ProblemSpec::make(profile_boundary_trace(v, g), 2.0, 2.0);
  ProblemSpec b = a;
  b.boundary = a.boundary.plus([](Point) { return 1.0; }, 0.05);
  const ComparisonResult c = comparison_check(solve(b).u, solve(a).u, b.boundary, a.boundary);
  return {"comparison under constant shift", c.holds && c.sup_interior_diff <= 0.05 + 1e-8,
          "sup interior " + num(c.sup_interior_diff)};
}

SelftestResult weiss_constant() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 257, 257);
  const GlobalProfile v;
  const ScalarField u = ScalarField::sample(g, [&](Point p) { return eval_profile(v, p); });
  const double phi = weiss_phi(u, {0, 0}, 0.5, 2.0, 2.0);
  const double rel = std::abs(phi - kPi / 8) / (kPi / 8);
  return {"Weiss functional of the profile is π/8", rel <= 1e-2, "Φ(0.5) = " + num(phi)};
}

SelftestResult acf_constant() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 257, 257);
  const ScalarField h1 = ScalarField::sample(g, [](Point p) { return std::max(p.x, 0.0); });
  const ScalarField h2 = ScalarField::sample(g, [](Point p) { return std::max(-p.x, 0.0); });
  const double psi = acf_psi(h1, h2, {0, 0}, 0.75);
  const double exact = kPi * kPi / 4;
  const double rel = std::abs(psi - exact) / exact;
  return {"ACF functional of (x₁⁺, x₁⁻) is π²/4", rel <= 2e-2, "Ψ(0.75) = " + num(psi)};
}

SelftestResult profile_distance() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const GlobalProfile v = GlobalProfile::make(1.5, 0.0, -0.25, 0.0, 2.0, 2.0);
  const ScalarField f = ScalarField::sample(g, [&](Point p) { return eval_profile(v, p); });
  const DistanceResult d = dist_to_Mstar(f);
  return {"exact profile sits in M*", d.distance <= 1e-5 && std::abs(d.best.tau + 0.25) <= 1e-4,
          "distance " + num(d.distance)};
}

SelftestResult reflection_endpoints() {
  GlobalProfile v;
  v.theta = -0.3;
  const AngularSamples phi = circle_trace([&](Point p) { return eval_profile(v, p); }, {0, 0}, 0.0, 1.0, 360);
  const AngularSamples xi = reflection_xi(phi);
  double lowest = 0.0;
  for (double x : xi.values) lowest = std::min(lowest, x);
  const bool ends = xi.values.front() == 0.0 && xi.values.back() == 0.0;
  return {"reflection ξ vanishes at 0 and π", ends && lowest >= -1e-6, "min ξ " + num(lowest)};
}

SelftestResult contour_line() {
  const Grid2D g = build_grid(-1, 1, -1, 1, 41, 41);
  const ScalarField f = ScalarField::sample(g, [](Point p) { return p.x - 0.3; });
  const auto lines = contour_above(f, 0.0);
  double worst = 0.0;
  for (const auto& l : lines)
    for (const Point& p : l.points) worst = std::max(worst, std::abs(p.x - 0.3));
  const double len = clipped_length(lines, Rect::of(g));
  return {"marching squares recovers a straight level line", worst <= 1e-12 && std::abs(len - 2.0) <= 1e-12,
          "length " + num(len)};
}

SelftestResult hausdorff_translation() {
  std::vector<Point> a, b;
  const double t = 0.1;
  for (int k = 0; k <= 10; ++k) {
    a.push_back({0.1 * k, 0.0});
    b.push_back({0.1 * k + 3 * t, 4 * t});
  }
  const double d = hausdorff_distance(a, b);
  // Translation by 5t moves each vertex 5t; the nearest shifted vertex is
  // never closer than the vertical offset 4t and the endpoints see 5t.
  return {"Hausdorff distance of a translated segment", std::abs(d - 5 * t) <= 1e-12, "d = " + num(d)};
}

SelftestResult kernels_agree() {
  const int nx = 37, ny = 29;
  std::vector<double> x(nx * ny), y1(nx * ny, 0.0), y2(nx * ny, 0.0);
  std::vector<std::uint8_t> free(nx * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      x[j * nx + i] = std::sin(0.3 * i) * std::cos(0.7 * j);
      free[j * nx + i] = (i > 0 && j > 0 && i < nx - 1 && j < ny - 1 && (i + 2 * j) % 7 != 0) ? 1 : 0;
    }
  const kernels::StencilLayout layout{nx, ny, free};
  kernels::serial::apply_stencil(layout, x, y1);
  kernels::parallel::apply_stencil(layout, x, y2);
  const bool same = y1 == y2 && kernels::serial::dot(x, y1) == kernels::parallel::dot(x, y2);
  return {"serial and parallel kernels agree", same, same ? "bitwise equal" : "mismatch"};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::function<SelftestResult()>> checks = {
      polynomial_reproduction, zero_data,        comparison_constant_shift, weiss_constant, acf_constant,
      profile_distance,        reflection_endpoints, contour_line,          hausdorff_translation, kernels_agree};
  std::vector<SelftestResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"check threw", false, e.what()});
    }
  }
  return out;
}

bool print_selftest(const std::vector<SelftestResult>& results, std::ostream& out) {
  bool all = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.passed;
  }
  return all;
}

}  // namespace membrane
