#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "membrane/profiles.hpp"
#include "membrane/solver.hpp"

using namespace membrane;

namespace {

ProblemSpec profile_problem(const GlobalProfile& v, int n) {
  const Grid2D g = build_grid(-1, 1, -1, 1, n, n);
  return ProblemSpec::make(profile_boundary_trace(v, g), v.lambda_plus, v.lambda_minus);
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

// Solve data with a genuinely two-dimensional free boundary.
ProblemSpec wavy_problem(int n) {
  const GlobalProfile v = GlobalProfile::make(1.0, 0.0, -0.4, 0.0, 2.0, 2.0);
  ProblemSpec spec = profile_problem(v, n);
  spec.boundary = spec.boundary.plus([](Point p) { return std::sin(2 * M_PI * p.y); }, 0.05);
  return spec;
}

}  // namespace

TEST_CASE("zero boundary data gives the zero solution in one sweep") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 17, 17);
  const SolveResult r = solve(ProblemSpec::make(BoundaryValues(g), 2.0, 2.0));
  for (double v : r.u.values()) CHECK(v == 0.0);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.converged);
  CHECK(r.report.final_energy == 0.0);
}

TEST_CASE("one-phase polynomials are reproduced exactly") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  for (const OnePhasePolynomial& q :
       {OnePhasePolynomial::isotropic(2.0), OnePhasePolynomial::make(-0.3, 0.2, -0.45, Phase::negative, 2.0, 3.0)}) {
    const ProblemSpec spec = ProblemSpec::make(profile_boundary_trace(q, g), 2.0, 3.0);
    const SolveResult r = solve(spec);
    const ScalarField exact = ScalarField::sample(g, [&](Point p) { return eval_polynomial(q, p); });
    CHECK(sup_diff(r.u, exact) <= 1e-8);
  }
}

TEST_CASE("an axis-aligned profile with kinks on node columns is a discrete solution") {
  const GlobalProfile v = GlobalProfile::make(1.0, 0.0, -0.25, 0.0, 2.0, 2.0);
  const ProblemSpec spec = profile_problem(v, 33);
  const ScalarField exact = ScalarField::sample(spec.grid, [&](Point p) { return eval_profile(v, p); });
  CHECK(sup_diff(solve(spec).u, exact) <= 1e-8);
}

TEST_CASE("postconditions: boundary attained, residual small outside the band, energy non-increasing") {
  const ProblemSpec spec = wavy_problem(65);
  const SolveResult r = solve(spec);
  spec.boundary.for_each([&](int i, int j, double v) { CHECK(r.u(i, j) == v); });
  const ScalarField res = residual_field(spec, r.u);
  double worst = 0.0;
  for (double x : res.values()) worst = std::max(worst, std::abs(x));
  CHECK(worst <= spec.tol_linear);
  CHECK(r.report.final_residual <= spec.tol_linear);
  for (std::size_t k = 1; k < r.report.energies.size(); ++k)
    CHECK(r.report.energies[k] <= r.report.energies[k - 1] + 1e-12 * std::abs(r.report.energies[k - 1]));
  CHECK(r.report.final_energy == doctest::Approx(discrete_energy(spec, r.u)));
  CHECK(r.report.pattern_changes.size() == static_cast<std::size_t>(r.report.iterations));
}

TEST_CASE("the solution minimizes the discrete energy") {
  // J_h is convex, so a minimizer cannot be improved by any interior perturbation.
  const ProblemSpec spec = wavy_problem(33);
  const SolveResult r = solve(spec);
  const double j0 = discrete_energy(spec, r.u);
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> unit(-1, 1);
  const Grid2D& g = spec.grid;
  for (int trial = 0; trial < 20; ++trial) {
    for (double eps : {1e-3, 1e-5}) {
      ScalarField w = r.u;
      for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = 1; i < g.nx() - 1; ++i) w(i, j) += eps * unit(rng);
      CHECK(discrete_energy(spec, w) >= j0 - 1e-12);
    }
  }
}

TEST_CASE("sign symmetry: negated data with swapped λ± negates the solution") {
  const ProblemSpec a = wavy_problem(33);
  ProblemSpec b = a;
  b.lambda_plus = a.lambda_minus;
  b.lambda_minus = a.lambda_plus;
  b.boundary = BoundaryValues(a.grid);
  a.boundary.for_each([&](int i, int j, double v) { b.boundary.set(i, j, -v); });
  const ScalarField ua = solve(a).u, ub = solve(b).u;
  double worst = 0.0;
  for (std::size_t k = 0; k < ua.values().size(); ++k) worst = std::max(worst, std::abs(ua.values()[k] + ub.values()[k]));
  CHECK(worst <= 1e-9);
}

TEST_CASE("comparison principle: ordered data give ordered solutions") {
  const ProblemSpec low = wavy_problem(33);
  ProblemSpec high = low;
  high.boundary = low.boundary.plus([](Point p) { return 0.5 + 0.5 * std::cos(3 * p.x); }, 0.1);
  const ScalarField ul = solve(low).u, uh = solve(high).u;
  for (std::size_t k = 0; k < ul.values().size(); ++k) CHECK(uh.values()[k] >= ul.values()[k] - 1e-9);
  const ComparisonResult c = comparison_check(uh, ul, high.boundary, low.boundary);
  CHECK(c.holds);
  CHECK(c.sup_boundary_diff == doctest::Approx(0.1));
  CHECK(c.sup_interior_diff <= c.sup_boundary_diff + 1e-9);
}

TEST_CASE("comparison_check reports a violated bound") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 9, 9);
  const BoundaryValues d(g);
  ScalarField u1(g), u2(g);
  u1(4, 4) = 0.5;
  const ComparisonResult c = comparison_check(u1, u2, d, d);
  CHECK_FALSE(c.holds);
  CHECK(c.sup_interior_diff == 0.5);
}

TEST_CASE("results do not depend on the thread count") {
  const ProblemSpec spec = wavy_problem(65);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const SolveResult one = solve(spec);
  omp_set_num_threads(3);
  const SolveResult three = solve(spec);
  omp_set_num_threads(saved);
  CHECK(one.u.values() == three.u.values());
  CHECK(one.report.iterations == three.report.iterations);
}

TEST_CASE("invalid specs are rejected") {
  ProblemSpec spec = wavy_problem(17);
  spec.lambda_plus = 0.0;
  CHECK_THROWS_AS(solve(spec), std::invalid_argument);
  spec = wavy_problem(17);
  spec.tol_pattern = 0;
  CHECK_THROWS_AS(solve(spec), std::invalid_argument);
  spec = wavy_problem(17);
  spec.tol_linear = -1.0;
  CHECK_THROWS_AS(solve(spec), std::invalid_argument);
  spec = wavy_problem(17);
  spec.boundary = BoundaryValues(build_grid(-1, 1, -1, 1, 9, 9));
  CHECK_THROWS_AS(solve(spec), std::invalid_argument);
}

TEST_CASE("an exhausted sweep budget raises ConvergenceError with the partial report") {
  ProblemSpec spec = wavy_problem(65);
  spec.tol_pattern = 1;
  try {
    solve(spec);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.report().iterations == 1);
    CHECK_FALSE(e.report().converged);
  }
}

TEST_CASE("discrete energy on a 3x3 grid") {
  // One interior node at value 1, zero boundary, h = 1: four edges of ½·1²
  // and h²(λ₊/2)·1 = 1.5 for λ₊ = 3.
  const Grid2D g = build_grid(0, 2, 0, 2, 3, 3);
  ProblemSpec spec = ProblemSpec::make(BoundaryValues(g), 3.0, 1.0);
  ScalarField u(g);
  u(1, 1) = 1.0;
  CHECK(discrete_energy(spec, u) == doctest::Approx(2.0 + 1.5));
  u(1, 1) = -2.0;
  CHECK(discrete_energy(spec, u) == doctest::Approx(4 * 2.0 + 1.0));
}

TEST_CASE("solve report serializes to JSON") {
  const SolveResult r = solve(wavy_problem(17));
  const auto j = nlohmann::json::parse(r.report.to_json());
  CHECK(j.at("iterations").get<int>() == r.report.iterations);
  CHECK(j.at("pattern_changes").size() == r.report.pattern_changes.size());
  CHECK(j.at("converged").get<bool>());
}
