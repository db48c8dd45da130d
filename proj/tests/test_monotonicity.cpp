#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "membrane/monotonicity.hpp"
#include "membrane/profiles.hpp"

using namespace membrane;

namespace {

constexpr double kPi = std::numbers::pi;

const Grid2D& fine_grid() {
  static const Grid2D g = build_grid(-1, 1, -1, 1, 257, 257);
  return g;
}

ScalarField sampled_profile(const GlobalProfile& v, const Grid2D& g = fine_grid()) {
  return ScalarField::sample(g, [&](Point p) { return eval_profile(v, p); });
}

}  // namespace

TEST_CASE("Weiss functional of the two-phase profile") {
  // u = x₁⁺²/2 − x₁⁻²/2 with λ± = 2: the bulk integrand is 2x₁², so
  // r⁻⁴∫_{B_r} = π/2, and ∫_{∂B_r} u² = (r⁵/4)(3π/4), giving Φ = π/2 − 3π/8 = π/8.
  const ScalarField u = sampled_profile(GlobalProfile{});
  for (double r : {0.25, 0.5, 0.75}) CHECK(weiss_phi(u, {0, 0}, r, 2, 2) == doctest::Approx(kPi / 8).epsilon(5e-3));
}

TEST_CASE("Weiss functional: precomputed gradients give the same value") {
  const ScalarField u = sampled_profile(GlobalProfile::make(1.0, 0.3, 0.0, 0.4, 2, 2));
  const GradientFields grad = gradient_fields(u);
  CHECK(weiss_phi(u, {0.1, 0.0}, 0.5, 2, 2) == weiss_phi(u, grad, {0.1, 0.0}, 0.5, 2, 2));
}

TEST_CASE("Weiss functional rejects radii at grid scale and disks leaving the grid") {
  const ScalarField u = sampled_profile(GlobalProfile{});
  CHECK_THROWS_AS(weiss_phi(u, {0, 0}, 1.5 * fine_grid().h(), 2, 2), MonotonicityError);
  CHECK_THROWS_AS(weiss_phi(u, {0.5, 0}, 0.6, 2, 2), std::exception);
}

TEST_CASE("ACF functional of (x₁⁺, x₁⁻) is π²/4 at every radius") {
  // |∇h_i| = 1 on a half disk: Ψ = r⁻⁴ (π r²/2)².
  const ScalarField h1 = ScalarField::sample(fine_grid(), [](Point p) { return std::max(p.x, 0.0); });
  const ScalarField h2 = ScalarField::sample(fine_grid(), [](Point p) { return std::max(-p.x, 0.0); });
  for (double r : {0.5, 0.75})
    CHECK(acf_psi(h1, h2, {0, 0}, r) == doctest::Approx(kPi * kPi / 4).epsilon(2e-2));
}

TEST_CASE("ACF functional scales with the fourth power of the amplitude") {
  const Grid2D& g = fine_grid();
  const ScalarField h1 = ScalarField::sample(g, [](Point p) { return std::max(p.x + 0.2 * p.y, 0.0); });
  const ScalarField h2 = ScalarField::sample(g, [](Point p) { return std::max(-p.x - 0.2 * p.y, 0.0); });
  ScalarField s1 = h1, s2 = h2;
  for (double& v : s1.values()) v *= 3.0;
  for (double& v : s2.values()) v *= 3.0;
  CHECK(acf_psi(s1, s2, {0, 0}, 0.5) == doctest::Approx(81.0 * acf_psi(h1, h2, {0, 0}, 0.5)).epsilon(1e-12));
}

TEST_CASE("ACF functional rejects negative inputs") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const ScalarField neg = ScalarField::sample(g, [](Point p) { return p.x; });
  CHECK_THROWS_AS(acf_psi(neg, neg, {0, 0}, 0.5), MonotonicityError);
}

TEST_CASE("directional parts split the derivative into disjoint halves") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const ScalarField u = ScalarField::sample(g, [](Point p) { return std::sin(2 * p.x) * p.y; });
  const double d = 1.0 / std::sqrt(2.0);
  const auto [h1, h2] = directional_parts(u, {d, d});
  const GradientFields grad = gradient_fields(u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(h1.values()[k] >= 0.0);
    CHECK(h2.values()[k] >= 0.0);
    CHECK(h1.values()[k] * h2.values()[k] == 0.0);
    CHECK(h1.values()[k] - h2.values()[k] ==
          doctest::Approx(d * grad.dx.values()[k] + d * grad.dy.values()[k]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(directional_parts(u, {1.0, 1.0}), MonotonicityError);
}

TEST_CASE("circle norm S_r") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 65, 65);
  const ScalarField one(g, 1.0);
  const ScalarField lin = ScalarField::sample(g, [](Point p) { return p.x; });
  CHECK(s_norm(one, {0.1, 0.2}, 0.5) == doctest::Approx(std::sqrt(2 * kPi)));
  // ∫_{∂B_r} x² = π r³
  CHECK(s_norm(lin, {0, 0}, 0.5) == doctest::Approx(0.5 * std::sqrt(kPi)).epsilon(1e-6));
}

TEST_CASE("blow-ups of a 2-homogeneous field do not depend on the radius") {
  const GlobalProfile v = GlobalProfile::make(1.0, 0.0, 0.0, 0.3, 2, 2);
  const ScalarField u = sampled_profile(v);
  const Grid2D target = build_grid(-1, 1, -1, 1, 33, 33);
  const ScalarField a = blowup_rescale(u, {0, 0}, 0.25, target);
  const ScalarField b = blowup_rescale(u, {0, 0}, 0.5, target);
  double worst = 0.0;
  for (int j = 0; j < 33; ++j)
    for (int i = 0; i < 33; ++i)
      if (norm(target.node(i, j)) <= 1.0) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  CHECK(worst <= 1e-4);

  const ScalarField q = quadratic_rescale(u, {0, 0}, 0.5, target);
  for (int j = 0; j < 33; ++j)
    for (int i = 0; i < 33; ++i)
      if (norm(target.node(i, j)) <= 1.0) CHECK(q(i, j) == doctest::Approx(eval_profile(v, target.node(i, j))).epsilon(1e-3).scale(1.0));
}

TEST_CASE("blow-up of a field vanishing on the circle raises ZeroNormError") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const Grid2D target = build_grid(-1, 1, -1, 1, 9, 9);
  CHECK_THROWS_AS(blowup_rescale(ScalarField(g), {0, 0}, 0.5, target), ZeroNormError);
}

TEST_CASE("radius ladders validate their shape") {
  const Grid2D g = build_grid(-1, 1, -1, 1, 65, 65);
  CHECK_NOTHROW(RadiusLadder::make({0, 0}, {0.5, 0.25}, g));
  CHECK_THROWS_AS(RadiusLadder::make({0, 0}, {0.25, 0.5}, g), MonotonicityError);
  CHECK_THROWS_AS(RadiusLadder::make({0, 0}, {0.5, 0.5}, g), MonotonicityError);
  CHECK_THROWS_AS(RadiusLadder::make({0, 0}, {0.5, -0.1}, g), MonotonicityError);
  CHECK_THROWS_AS(RadiusLadder::make({0.8, 0}, {0.5}, g), MonotonicityError);
  const RadiusLadder l = RadiusLadder::from_multiples({0, 0}, {8, 32, 16}, g);
  REQUIRE(l.radii.size() == 3);
  CHECK(l.radii[0] == doctest::Approx(1.0));
  CHECK(l.radii[2] == doctest::Approx(0.25));
}

TEST_CASE("ladders on an exact solution show no violations") {
  const ScalarField u = sampled_profile(GlobalProfile{});
  const RadiusLadder ladder = RadiusLadder::from_multiples({0, 0.2}, {8, 16, 32, 64}, fine_grid());
  const MonotonicityProfile phi = phi_ladder(u, ladder, 2, 2);
  CHECK(phi.violations.empty());
  CHECK(phi.tol_mono == doctest::Approx(default_tol_mono(phi.values)));
  // ∂₁u = |x₁| has no negative part, so Ψ vanishes identically along e₁.
  const auto [h1, h2] = directional_parts(u, {1, 0});
  const MonotonicityProfile psi = psi_ladder(h1, h2, ladder);
  CHECK(psi.violations.empty());
  for (double v : psi.values) CHECK(v == 0.0);
}

TEST_CASE("a functional growing as r shrinks is flagged") {
  // h = |x|^{1/2}: ∫_{B_r} |∇h|² = π r / 2, so Ψ(r) = π²/(4 r²) increases as r decreases.
  const Grid2D& g = fine_grid();
  const ScalarField h = ScalarField::sample(g, [](Point p) { return std::sqrt(norm(p)); });
  const RadiusLadder ladder = RadiusLadder::from_multiples({0, 0}, {16, 32, 64}, g);
  const MonotonicityProfile psi = psi_ladder(h, h, ladder);
  CHECK(psi.values[2] > psi.values[0]);
  CHECK_FALSE(psi.violations.empty());

  const auto path = std::filesystem::temp_directory_path() / "membrane_psi_ladder.csv";
  psi.write_csv(path.string());
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "r,value,violation_flag");
  int flagged = 0;
  while (std::getline(in, row)) flagged += row.back() == '1';
  CHECK(flagged >= 1);
  std::filesystem::remove(path);
}

TEST_CASE("default monotonicity tolerance") {
  CHECK(default_tol_mono({1.0, -3.0, 2.0}) == doctest::Approx(0.03 + 1e-8));
  CHECK(default_tol_mono({0.0}) == doctest::Approx(1e-8));
}
