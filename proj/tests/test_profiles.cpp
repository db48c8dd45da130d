#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "membrane/profiles.hpp"

using namespace membrane;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force oracle for the M* distance: sup over unit-disk nodes, inf over
// a parameter lattice. Written against the formula, not the library.
struct Lattice {
  double lo0, hi0, lo1, hi1;
  int n;
};

struct BruteResult {
  double value;
  double p0, p1;
};

template <typename Profile>
BruteResult brute(const std::vector<Point>& pts, const std::vector<double>& vals, const Lattice& box,
                  Profile&& profile, const std::function<bool(double, double)>& feasible) {
  BruteResult best{std::numeric_limits<double>::infinity(), 0, 0};
  for (int a = 0; a <= box.n; ++a)
    for (int b = 0; b <= box.n; ++b) {
      const double p0 = box.lo0 + (box.hi0 - box.lo0) * a / box.n;
      const double p1 = box.lo1 + (box.hi1 - box.lo1) * b / box.n;
      if (!feasible(p0, p1)) continue;
      double sup = 0.0;
      for (std::size_t k = 0; k < pts.size() && sup < best.value; ++k)
        sup = std::max(sup, std::abs(vals[k] - profile(p0, p1, pts[k])));
      if (sup < best.value) best = {sup, p0, p1};
    }
  return best;
}

// λ± = 2 throughout.
double slab(double beta1, double tau, Point p) {
  const double pos = std::max(p.x, 0.0), neg = std::min(p.x - tau, 0.0);
  return beta1 * 0.5 * (pos * pos - neg * neg);
}
double linear(double beta1, double beta2, Point p) { return slab(beta1, 0.0, p) + beta2 * p.x; }

struct Sampled {
  ScalarField f;
  std::vector<Point> pts;
  std::vector<double> vals;
};

Sampled sample_unit(const std::function<double(Point)>& fn, int n = 33) {
  const Grid2D g = build_grid(-1, 1, -1, 1, n, n);
  Sampled s{ScalarField::sample(g, fn), {}, {}};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (norm(g.node(i, j)) <= 1.0 + 1e-12) {
        s.pts.push_back(g.node(i, j));
        s.vals.push_back(s.f(i, j));
      }
  return s;
}

// Oracle minimum over both families: a 200² lattice per family, then a 200²
// lattice on a window of ±2 coarse cells around each family's best node.
// Also returns a certified lower bound from the coarse lattice and the
// Lipschitz constants of the misfit on the unit disk.
struct Oracle {
  double fine;
  double lower;
};

Oracle brute_Mstar(const Sampled& s) {
  const double c = 0.05;
  const auto slab_ok = [c](double b1, double) { return b1 >= c; };
  const auto lin_ok = [c](double b1, double b2) { return b1 + b2 >= c; };
  const Lattice slab_box{0.0, 4.0, -1.0, 0.0, 200};
  const Lattice lin_box{0.0, 4.0, 0.0, 4.0, 200};
  const BruteResult bs = brute(s.pts, s.vals, slab_box, slab, slab_ok);
  const BruteResult bl = brute(s.pts, s.vals, lin_box, linear, lin_ok);
  // |∂/∂β₁| ≤ 2 and |∂/∂τ| ≤ β₁ |x − τ| ≤ 8 for the slab family;
  // |∂/∂β₁| ≤ 1/2 and |∂/∂β₂| ≤ 1 for the linear family. Half a cell away.
  const double slab_slack = 2 * 0.01 + 8 * 0.0025;
  const double lin_slack = 0.5 * 0.01 + 1 * 0.01;
  const auto refine = [&](const BruteResult& r, const Lattice& box, auto&& profile, auto&& ok) {
    const double d0 = 2 * (box.hi0 - box.lo0) / box.n, d1 = 2 * (box.hi1 - box.lo1) / box.n;
    const Lattice fine{std::max(box.lo0, r.p0 - d0), std::min(box.hi0, r.p0 + d0), std::max(box.lo1, r.p1 - d1),
                       std::min(box.hi1, r.p1 + d1), 200};
    return brute(s.pts, s.vals, fine, profile, ok).value;
  };
  const double fine = std::min(refine(bs, slab_box, slab, slab_ok), refine(bl, lin_box, linear, lin_ok));
  return {fine, std::min(bs.value - slab_slack, bl.value - lin_slack)};
}

}  // namespace

TEST_CASE("profile evaluation matches the closed form") {
  const GlobalProfile v;  // β₁ = 1, τ = 0, λ± = 2
  CHECK(eval_profile(v, {0.5, 0.3}) == doctest::Approx(0.125));
  CHECK(eval_profile(v, {-0.5, 0.3}) == doctest::Approx(-0.125));
  CHECK(eval_profile(v, {0.0, 0.7}) == 0.0);

  const GlobalProfile lin = GlobalProfile::make(1.0, 0.5, 0.0, 0.0, 2.0, 2.0);
  CHECK(eval_profile(lin, {1.0, 0.0}) == doctest::Approx(1.0));

  const GlobalProfile gap = GlobalProfile::make(1.0, 0.0, -0.4, 0.0, 2.0, 2.0);
  CHECK(eval_profile(gap, {-0.2, 0.0}) == 0.0);
  CHECK(eval_profile(gap, {-1.0, 0.0}) == doctest::Approx(-0.18));

  const GlobalProfile asym = GlobalProfile::make(1.0, 0.0, 0.0, 0.0, 4.0, 1.0);
  CHECK(eval_profile(asym, {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(eval_profile(asym, {-1.0, 0.0}) == doctest::Approx(-0.25));
}

TEST_CASE("rotation acts on the first coordinate counter-clockwise") {
  const GlobalProfile v = GlobalProfile::make(1.3, 0.0, -0.2, 0.7, 2.0, 3.0);
  for (Point p : {Point{0.3, -0.4}, Point{-0.8, 0.1}, Point{0.05, 0.9}}) {
    const double s = std::cos(0.7) * p.x - std::sin(0.7) * p.y;
    CHECK(eval_profile(v, p) == doctest::Approx(v.along_normal(s)));
  }
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(GlobalProfile::make(-0.1, 0.0, 0.0, 0.0, 2, 2), ProfileError);
  CHECK_THROWS_AS(GlobalProfile::make(0.01, 0.01, 0.0, 0.0, 2, 2), ProfileError);  // β₁ + β₂ < c
  CHECK_THROWS_AS(GlobalProfile::make(1.0, 0.0, 0.5, 0.0, 2, 2), ProfileError);
  CHECK_THROWS_AS(GlobalProfile::make(1.0, 0.0, -1.5, 0.0, 2, 2), ProfileError);
  CHECK_THROWS_AS(GlobalProfile::make(1.0, 0.2, -0.1, 0.0, 2, 2), ProfileError);
  CHECK_THROWS_AS(GlobalProfile::make(5.0, 0.0, 0.0, 0.0, 2, 2), ProfileError);
  CHECK_THROWS_AS(GlobalProfile::make(1.0, 0.0, 0.0, 0.0, 0.0, 2), ProfileError);
  CHECK_NOTHROW(GlobalProfile::make(0.0, 0.05, 0.0, 0.0, 2, 2));
}

TEST_CASE("profile JSON round trip") {
  const GlobalProfile v = GlobalProfile::make(1.25, 0.0, -0.3, 0.1, 2.0, 3.0);
  const GlobalProfile w = profile_from_json(profile_to_json(v));
  CHECK(w.beta1 == v.beta1);
  CHECK(w.tau == v.tau);
  CHECK(w.theta == v.theta);
  CHECK(w.lambda_minus == v.lambda_minus);
  CHECK_THROWS_AS(profile_from_json(R"({"beta1": -1, "beta2": 0, "tau": 0, "theta": 0, "lambda_plus": 2, "lambda_minus": 2})"),
                  ProfileError);
}

TEST_CASE("sampled profiles solve the discrete equation away from the kinks") {
  // Kinks at x = 0 and x = τ = -0.25 lie on node columns of this grid.
  const GlobalProfile v = GlobalProfile::make(1.0, 0.0, -0.25, 0.0, 2.0, 3.0);
  const Grid2D g = build_grid(-1, 1, -1, 1, 33, 33);
  const ScalarField f = ScalarField::sample(g, [&](Point p) { return eval_profile(v, p); });
  for (int j = 1; j < 32; ++j)
    for (int i = 1; i < 32; ++i) {
      const double x = g.x(i);
      if (std::abs(x) < 1.5 * g.h() || std::abs(x + 0.25) < 1.5 * g.h()) continue;
      const double expected = x > 0 ? 1.0 : (x < -0.25 ? -1.5 : 0.0);
      CHECK(discrete_laplacian(f, i, j) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("one-phase polynomials") {
  const OnePhasePolynomial q = OnePhasePolynomial::isotropic(2.0);
  CHECK(eval_polynomial(q, {1.0, 1.0}) == doctest::Approx(0.5));
  CHECK_NOTHROW(OnePhasePolynomial::make(0.5, 0.0, 0.0, Phase::positive, 2.0, 2.0));
  CHECK_NOTHROW(OnePhasePolynomial::make(-0.25, 0.1, -0.25, Phase::negative, 2.0, 2.0));
  CHECK_THROWS_AS(OnePhasePolynomial::make(0.5, 0.0, -0.0, Phase::negative, 2.0, 2.0), ProfileError);
  CHECK_THROWS_AS(OnePhasePolynomial::make(0.25, 1.0, 0.25, Phase::positive, 2.0, 2.0), ProfileError);  // indefinite
  CHECK_THROWS_AS(OnePhasePolynomial::make(0.5, 0.0, 0.5, Phase::positive, 2.0, 2.0), ProfileError);  // Δp ≠ λ₊/2
}

TEST_CASE("exact profiles are at distance zero from M*") {
  for (const GlobalProfile& v : {GlobalProfile::make(1.5, 0.0, -0.25, 0.0, 2, 2),
                                 GlobalProfile::make(0.8, 0.6, 0.0, 0.0, 2, 2)}) {
    const Sampled s = sample_unit([&](Point p) { return eval_profile(v, p); });
    const DistanceResult d = dist_to_Mstar(s.f);
    CHECK(d.distance <= 1e-5);
    CHECK(sup_distance(s.f, d.best) == doctest::Approx(d.distance));
    CHECK(d.best.beta1 == doctest::Approx(v.beta1).epsilon(1e-4));
  }
}

TEST_CASE("dist_to_Mstar agrees with a brute-force lattice search") {
  const std::vector<std::function<double(Point)>> fields = {
      [](Point p) { return slab(1.2, -0.3, p) + 0.03 * std::sin(3 * p.x) * std::cos(2 * p.y); },
      [](Point p) { return linear(1.0, 0.5, p) + 0.05 * p.y * p.y; },
      [](Point p) { return 0.2 * std::cos(p.x + 2 * p.y); },
  };
  for (const auto& fn : fields) {
    const Sampled s = sample_unit(fn);
    const Oracle o = brute_Mstar(s);
    const DistanceResult d = dist_to_Mstar(s.f);
    CHECK(d.distance <= o.fine + 1e-6);
    CHECK(d.distance >= o.lower);
    CHECK(d.distance == doctest::Approx(o.fine).epsilon(1e-3));
    CHECK(sup_distance(s.f, d.best) == doctest::Approx(d.distance));
    CHECK_NOTHROW(d.best.validate());
  }
}

TEST_CASE("dist_to_M recovers the rotation of an exact profile") {
  const GlobalProfile v = GlobalProfile::make(1.0, 0.0, -0.2, 0.3, 2, 2);
  const Sampled s = sample_unit([&](Point p) { return eval_profile(v, p); });
  const DistanceResult d = dist_to_M(s.f);
  CHECK(d.distance <= 1e-5);
  CHECK(d.best.theta == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(d.best.tau == doctest::Approx(-0.2).epsilon(1e-4));
}

TEST_CASE("dist_to_M is invariant under quarter turns of the field") {
  const auto fn = [](Point p) { return slab(1.0, -0.1, {0.8 * p.x + 0.6 * p.y, 0.0}) + 0.02 * p.x * p.y * p.y; };
  const Sampled a = sample_unit(fn);
  const Sampled b = sample_unit([&](Point p) { return fn({p.y, -p.x}); });
  const double da = dist_to_M(a.f).distance, db = dist_to_M(b.f).distance;
  CHECK(da == doctest::Approx(db).epsilon(1e-4));
  CHECK(da <= dist_to_Mstar(a.f).distance + 1e-12);
}

TEST_CASE("dist_to_M refuses fields that do not cover the unit disk") {
  const Grid2D g = build_grid(-0.5, 0.5, -0.5, 0.5, 9, 9);
  CHECK_THROWS_AS(dist_to_M(ScalarField(g)), ProfileError);
}

TEST_CASE("distance to the one-phase quadratics") {
  const Sampled poly = sample_unit([](Point p) { return 3.0 * (p.x * p.x + 0.5 * p.x * p.y + p.y * p.y); });
  const QuadraticFit q = dist_to_one_phase(poly.f);
  CHECK(q.distance <= 1e-6);
  CHECK(q.sign == Phase::positive);
  CHECK(q.beta == doctest::Approx(1.5).epsilon(1e-4));

  const Sampled neg = sample_unit([](Point p) { return -0.5 * p.y * p.y; });
  CHECK(dist_to_one_phase(neg.f).sign == Phase::negative);

  // An odd profile is far from every sign-definite form: the best fit cannot
  // beat half its amplitude (sup |f| = 1/2 on the unit disk).
  const Sampled prof = sample_unit([](Point p) { return slab(1.0, 0.0, p); });
  const double dist = dist_to_one_phase(prof.f).distance;
  CHECK(dist >= 0.25 - 1e-9);
  CHECK(dist <= 0.5 + 1e-9);
}
