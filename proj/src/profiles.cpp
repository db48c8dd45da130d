#include "membrane/profiles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace membrane {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_angle(double theta) {
  double t = std::fmod(theta + kPi, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  return t - kPi;
}

}  // namespace

void GlobalProfile::validate(const ProfileBounds& bounds) const {
  auto fail = [](const std::string& what) { throw ProfileError("invalid profile: " + what); };
  for (double v : {beta1, beta2, tau, theta, lambda_plus, lambda_minus})
    if (!std::isfinite(v)) fail("non-finite parameter");
  if (!(lambda_plus > 0.0) || !(lambda_minus > 0.0)) fail("lambda_plus and lambda_minus must be positive");
  if (tau < -1.0 || tau > 0.0) fail("tau must lie in [-1, 0]");
  if (beta1 < 0.0 || beta1 > bounds.a) fail("beta1 outside [0, a]");
  if (beta2 < 0.0 || beta2 > bounds.b) fail("beta2 outside [0, b]");
  if (beta1 + beta2 < bounds.c) fail("beta1 + beta2 below c");
  if (beta2 != 0.0 && tau != 0.0) fail("beta2 != 0 requires tau = 0");
}

GlobalProfile GlobalProfile::make(double beta1, double beta2, double tau, double theta, double lambda_plus,
                                  double lambda_minus, const ProfileBounds& bounds) {
  GlobalProfile v{beta1, beta2, tau, theta, lambda_plus, lambda_minus};
  v.validate(bounds);
  return v;
}

double GlobalProfile::along_normal(double s) const {
  const double pos = std::max(s, 0.0);
  const double neg = std::min(s - tau, 0.0);
  return beta1 * (0.25 * lambda_plus * pos * pos - 0.25 * lambda_minus * neg * neg) + beta2 * s;
}

double eval_profile(const GlobalProfile& v, Point p) {
  const double s = std::cos(v.theta) * p.x - std::sin(v.theta) * p.y;
  return v.along_normal(s);
}

std::string profile_to_json(const GlobalProfile& v) {
  nlohmann::ordered_json j;
  j["beta1"] = v.beta1;
  j["beta2"] = v.beta2;
  j["tau"] = v.tau;
  j["theta"] = v.theta;
  j["lambda_plus"] = v.lambda_plus;
  j["lambda_minus"] = v.lambda_minus;
  return j.dump();
}

GlobalProfile profile_from_json(const std::string& text, const ProfileBounds& bounds) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    return GlobalProfile::make(j.at("beta1").get<double>(), j.at("beta2").get<double>(), j.at("tau").get<double>(),
                               j.at("theta").get<double>(), j.at("lambda_plus").get<double>(),
                               j.at("lambda_minus").get<double>(), bounds);
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(std::string("malformed profile JSON: ") + e.what());
  }
}

OnePhasePolynomial OnePhasePolynomial::make(double alpha, double beta, double gamma, Phase sign, double lambda_plus,
                                            double lambda_minus) {
  if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma)))
    throw ProfileError("polynomial coefficients must be finite");
  if (!(lambda_plus > 0.0) || !(lambda_minus > 0.0)) throw ProfileError("lambda values must be positive");
  const double s = sign == Phase::positive ? 1.0 : -1.0;
  if (alpha == 0.0 && gamma == 0.0) throw ProfileError("alpha and gamma both zero");
  if (s * alpha < 0.0 || s * gamma < 0.0 || beta * beta > 4.0 * alpha * gamma)
    throw ProfileError("polynomial is not sign-definite with the declared sign");
  const double target = sign == Phase::positive ? 0.5 * lambda_plus : -0.5 * lambda_minus;
  const double lap = 2.0 * alpha + 2.0 * gamma;
  if (std::abs(lap - target) > 1e-12 * std::max(1.0, std::abs(target)))
    throw ProfileError("polynomial Laplacian does not match the phase source strength");
  return {alpha, beta, gamma, sign};
}

OnePhasePolynomial OnePhasePolynomial::isotropic(double lambda_plus) {
  return make(lambda_plus / 8.0, 0.0, lambda_plus / 8.0, Phase::positive, lambda_plus, 1.0);
}

double eval_polynomial(const OnePhasePolynomial& q, Point p) {
  return q.alpha * p.x * p.x + q.beta * p.x * p.y + q.gamma * p.y * p.y;
}

BoundaryValues profile_boundary_trace(const GlobalProfile& v, const Grid2D& g) {
  return BoundaryValues::from_function(g, [&](Point p) { return eval_profile(v, p); });
}

BoundaryValues profile_boundary_trace(const OnePhasePolynomial& q, const Grid2D& g) {
  return BoundaryValues::from_function(g, [&](Point p) { return eval_polynomial(q, p); });
}

namespace {

// Samples of f at grid nodes in the closed unit disk, outermost first so the
// early-exit sup loop meets large misfits quickly.
struct DiskSamples {
  std::vector<double> x, y, f;
  std::size_t size() const { return f.size(); }
};

DiskSamples disk_samples(const ScalarField& f) {
  const Grid2D& g = f.grid();
  const double slack = 1e-12;
  if (g.x_min() > -1.0 + slack || g.x_max() < 1.0 - slack || g.y_min() > -1.0 + slack || g.y_max() < 1.0 - slack)
    throw ProfileError("field domain does not cover the unit disk");
  struct Node {
    double r, x, y, f;
  };
  std::vector<Node> nodes;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const Point p = g.node(i, j);
      const double r = norm(p);
      if (r <= 1.0 + slack) nodes.push_back({r, p.x, p.y, f(i, j)});
    }
  }
  if (nodes.empty()) throw ProfileError("no grid node inside the unit disk");
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.r > b.r; });
  DiskSamples out;
  for (const auto& n : nodes) {
    out.x.push_back(n.x);
    out.y.push_back(n.y);
    out.f.push_back(n.f);
  }
  return out;
}

enum class Family { slab, linear };  // slab: β₂ = 0, τ free; linear: τ = 0, β₂ free

struct Candidate {
  double error = kInf;
  Family family = Family::slab;
  double p1 = 0.0;  // β₁
  double p2 = 0.0;  // τ (slab) or β₂ (linear)
  double theta = 0.0;
};

GlobalProfile to_profile(const Candidate& c, const DistanceOptions& o) {
  GlobalProfile v;
  v.beta1 = c.p1;
  v.beta2 = c.family == Family::linear ? c.p2 : 0.0;
  v.tau = c.family == Family::slab ? c.p2 : 0.0;
  v.theta = wrap_angle(c.theta);
  v.lambda_plus = o.lambda_plus;
  v.lambda_minus = o.lambda_minus;
  return v;
}

// sup_k |w(s_k) − f_k| with early exit once `cap` is exceeded.
double sup_misfit(const GlobalProfile& v, const DiskSamples& d, double ct, double st, double cap) {
  double m = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double s = ct * d.x[k] - st * d.y[k];
    const double e = std::abs(v.along_normal(s) - d.f[k]);
    if (e > m) {
      m = e;
      if (m > cap) return m;
    }
  }
  return m;
}

bool feasible(const Candidate& c, const ProfileBounds& b) {
  if (c.p1 < 0.0 || c.p1 > b.a) return false;
  if (c.family == Family::slab) return c.p2 >= -1.0 && c.p2 <= 0.0 && c.p1 >= b.c;
  return c.p2 >= 0.0 && c.p2 <= b.b && c.p1 + c.p2 >= b.c;
}

// The 32³ coarse lattice restricted to admissible points: β₂ = 0 or τ = 0.
void coarse_search(const DiskSamples& d, const DistanceOptions& o, double theta, Candidate& best_slab,
                   Candidate& best_linear) {
  const int n = o.coarse;
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int i = 0; i < n; ++i) {
    const double b1 = o.bounds.a * i / (n - 1);
    for (int k = 0; k < n; ++k) {
      Candidate c{kInf, Family::slab, b1, -static_cast<double>(k) / (n - 1), theta};
      if (!feasible(c, o.bounds)) continue;
      const double e = sup_misfit(to_profile(c, o), d, ct, st, best_slab.error);
      if (e < best_slab.error) {
        c.error = e;
        best_slab = c;
      }
    }
    for (int j = 0; j < n; ++j) {
      Candidate c{kInf, Family::linear, b1, o.bounds.b * j / (n - 1), theta};
      if (!feasible(c, o.bounds)) continue;
      const double e = sup_misfit(to_profile(c, o), d, ct, st, best_linear.error);
      if (e < best_linear.error) {
        c.error = e;
        best_linear = c;
      }
    }
  }
}

// Golden-section minimization of f on [lo, hi] down to bracket width tol.
// Exact for the convex one-dimensional problems below, a local search otherwise.
template <typename F>
double golden_min(F&& f, double lo, double hi, double tol, double& arg) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  double best = f1;
  arg = x1;
  if (f2 < best) best = f2, arg = x2;
  // The ends matter when the minimizer sits on the boundary of the box.
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe < best) best = fe, arg = e;
  }
  return best;
}

// Normal coordinates of the disk samples for one rotation.
std::vector<double> normal_coordinates(const DiskSamples& d, double theta) {
  const double ct = std::cos(theta), st = std::sin(theta);
  std::vector<double> s(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) s[k] = ct * d.x[k] - st * d.y[k];
  return s;
}

// sup_k |β₁ a_k + β₂ b_k − f_k|: the profile is linear in (β₁, β₂) once θ and
// τ are fixed, so this is convex in them.
double chebyshev(const std::vector<double>& a, const std::vector<double>* b, double beta1, double beta2,
                 const DiskSamples& d) {
  double m = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double v = beta1 * a[k] + (b ? beta2 * (*b)[k] : 0.0);
    m = std::max(m, std::abs(v - d.f[k]));
  }
  return m;
}

std::vector<double> quadratic_part(const std::vector<double>& s, double tau, const DistanceOptions& o) {
  std::vector<double> a(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double pos = std::max(s[k], 0.0), neg = std::min(s[k] - tau, 0.0);
    a[k] = 0.25 * o.lambda_plus * pos * pos - 0.25 * o.lambda_minus * neg * neg;
  }
  return a;
}

// Linear family (τ = 0) at fixed θ: convex in (β₁, β₂) over a convex polygon,
// solved by nested golden sections.
Candidate solve_linear(const DiskSamples& d, const DistanceOptions& o, double theta) {
  const std::vector<double> s = normal_coordinates(d, theta);
  const std::vector<double> a = quadratic_part(s, 0.0, o);
  const double tol = 0.1 * o.refine_tol;
  Candidate c{kInf, Family::linear, 0.0, 0.0, theta};
  const auto inner = [&](double b1, double& b2) {
    const double lo = std::max(0.0, o.bounds.c - b1);
    return golden_min([&](double x) { return chebyshev(a, &s, b1, x, d); }, lo, o.bounds.b, tol, b2);
  };
  double b1 = 0.0;
  golden_min(
      [&](double x) {
        double b2;
        return inner(x, b2);
      },
      0.0, o.bounds.a, tol, b1);
  double b2 = 0.0;
  c.error = inner(b1, b2);
  c.p1 = b1;
  c.p2 = b2;
  return c;
}

// Slab family (β₂ = 0) at fixed θ with τ searched in [tau_lo, tau_hi]; exact
// in β₁ for every τ.
Candidate solve_slab(const DiskSamples& d, const DistanceOptions& o, double theta, double tau_lo, double tau_hi) {
  const std::vector<double> s = normal_coordinates(d, theta);
  const double tol = 0.1 * o.refine_tol;
  const auto inner = [&](double tau, double& b1) {
    const std::vector<double> a = quadratic_part(s, tau, o);
    return golden_min([&](double x) { return chebyshev(a, nullptr, x, 0.0, d); }, o.bounds.c, o.bounds.a, tol, b1);
  };
  double tau = tau_lo;
  golden_min(
      [&](double t) {
        double b1;
        return inner(t, b1);
      },
      tau_lo, tau_hi, tol, tau);
  Candidate c{kInf, Family::slab, 0.0, tau, theta};
  c.error = inner(tau, c.p1);
  return c;
}

// τ bracket of ±2 lattice cells around a coarse start, clipped to [−1, 0].
std::pair<double, double> tau_bracket(double tau, const DistanceOptions& o) {
  const double cell = 1.0 / (o.coarse - 1);
  return {std::max(-1.0, tau - 2 * cell), std::min(0.0, tau + 2 * cell)};
}

Candidate solve_family(const Candidate& start, const DiskSamples& d, const DistanceOptions& o, double theta) {
  if (start.family == Family::linear) return solve_linear(d, o, theta);
  const auto [lo, hi] = tau_bracket(start.p2, o);
  return solve_slab(d, o, theta, lo, hi);
}

// Local refinement of a coarse start: golden section in θ (when rotating)
// around the start, with the family parameters solved at every θ.
Candidate refine(const Candidate& start, const DiskSamples& d, const DistanceOptions& o, bool with_theta) {
  if (!with_theta) {
    const Candidate c = solve_family(start, d, o, start.theta);
    return c.error <= start.error ? c : start;
  }
  const double cell = 2.0 * kPi / std::max(o.theta_samples, 1);
  double theta = start.theta;
  golden_min([&](double t) { return solve_family(start, d, o, t).error; }, start.theta - cell, start.theta + cell,
             o.refine_tol, theta);
  Candidate best = solve_family(start, d, o, theta);
  return best.error <= start.error ? best : start;
}

}  // namespace

double sup_distance(const ScalarField& f, const GlobalProfile& v) {
  const DiskSamples d = disk_samples(f);
  return sup_misfit(v, d, std::cos(v.theta), std::sin(v.theta), kInf);
}

DistanceResult dist_to_Mstar(const ScalarField& f, const DistanceOptions& options) {
  if (options.coarse < 2) throw ProfileError("coarse search needs at least 2 samples per axis");
  const DiskSamples d = disk_samples(f);
  Candidate slab, linear;
  coarse_search(d, options, 0.0, slab, linear);
  Candidate best;
  for (const Candidate& start : {slab, linear}) {
    if (!std::isfinite(start.error)) continue;
    const Candidate c = refine(start, d, options, false);
    if (c.error < best.error) best = c;
  }
  return {best.error, to_profile(best, options)};
}

DistanceResult dist_to_M(const ScalarField& f, const DistanceOptions& options) {
  if (options.coarse < 2) throw ProfileError("coarse search needs at least 2 samples per axis");
  if (options.theta_samples < 1) throw ProfileError("theta grid needs at least one sample");
  const DiskSamples d = disk_samples(f);
  const int m = options.theta_samples;
  std::vector<Candidate> per_theta(2 * static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < m; ++t) {
    const double theta = -kPi + 2.0 * kPi * t / m;
    Candidate slab, linear;
    coarse_search(d, options, theta, slab, linear);
    per_theta[2 * t] = slab;
    per_theta[2 * t + 1] = linear;
  }
  std::vector<std::size_t> order(per_theta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return per_theta[a].error < per_theta[b].error; });
  const std::size_t starts = std::min<std::size_t>(std::max(options.refine_starts, 1), order.size());
  std::vector<Candidate> refined(starts);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(starts); ++s) {
    const Candidate& start = per_theta[order[s]];
    refined[s] = std::isfinite(start.error) ? refine(start, d, options, true) : start;
  }
  Candidate best;
  for (const Candidate& c : refined)
    if (c.error < best.error) best = c;
  return {best.error, to_profile(best, options)};
}

namespace {

struct Form {
  double l1, l2, phi;  // eigenvalue magnitudes along (cos φ, sin φ) and its normal
};

std::array<double, 3> form_coefficients(const Form& q, double s) {
  const double c = std::cos(q.phi), n = std::sin(q.phi);
  return {s * (q.l1 * c * c + q.l2 * n * n), s * 2.0 * (q.l1 - q.l2) * c * n, s * (q.l1 * n * n + q.l2 * c * c)};
}

double form_misfit(const Form& q, double s, const DiskSamples& d, double cap) {
  const auto [a, b, g] = form_coefficients(q, s);
  double m = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double e = std::abs(a * d.x[k] * d.x[k] + b * d.x[k] * d.y[k] + g * d.y[k] * d.y[k] - d.f[k]);
    if (e > m) {
      m = e;
      if (m > cap) return m;
    }
  }
  return m;
}

// Least-squares quadratic form, as symmetric matrix entries (a, b/2, g).
std::array<double, 3> least_squares_form(const DiskSamples& d) {
  double m[3][3] = {};
  double r[3] = {};
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double phi[3] = {d.x[k] * d.x[k], d.x[k] * d.y[k], d.y[k] * d.y[k]};
    for (int a = 0; a < 3; ++a) {
      r[a] += phi[a] * d.f[k];
      for (int b = 0; b < 3; ++b) m[a][b] += phi[a] * phi[b];
    }
  }
  // Gaussian elimination with partial pivoting on the 3x3 normal equations
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
    if (std::abs(m[piv][col]) < 1e-300) return {0.0, 0.0, 0.0};
    std::swap(m[piv], m[col]);
    std::swap(r[piv], r[col]);
    for (int row = col + 1; row < 3; ++row) {
      const double factor = m[row][col] / m[col][col];
      for (int k = col; k < 3; ++k) m[row][k] -= factor * m[col][k];
      r[row] -= factor * r[col];
    }
  }
  double c[3];
  for (int row = 2; row >= 0; --row) {
    double s = r[row];
    for (int k = row + 1; k < 3; ++k) s -= m[row][k] * c[k];
    c[row] = s / m[row][row];
  }
  return {c[0], c[1], c[2]};
}

}  // namespace

QuadraticFit dist_to_one_phase(const ScalarField& f, double refine_tol) {
  const DiskSamples d = disk_samples(f);
  const auto [a, b, g] = least_squares_form(d);
  // eigen-decomposition of [[a, b/2], [b/2, g]]
  const double mean = 0.5 * (a + g);
  const double rad = std::hypot(0.5 * (a - g), 0.5 * b);
  const double phi0 = 0.5 * std::atan2(b, a - g);
  const double e1 = mean + rad, e2 = mean - rad;

  QuadraticFit best;
  best.distance = kInf;
  for (double s : {1.0, -1.0}) {
    Form q{std::max(s * e1, 0.0), std::max(s * e2, 0.0), phi0};
    double err = form_misfit(q, s, d, kInf);
    std::array<double, 3> step{0.25 * std::max({q.l1, q.l2, 0.1}), 0.25 * std::max({q.l1, q.l2, 0.1}), 0.2};
    for (int iter = 0; iter < 100000 && std::max({step[0], step[1], step[2]}) >= refine_tol; ++iter) {
      Form move = q;
      double move_err = err;
      for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
          for (int k = -1; k <= 1; ++k) {
            if (i == 0 && j == 0 && k == 0) continue;
            const Form c{std::max(q.l1 + i * step[0], 0.0), std::max(q.l2 + j * step[1], 0.0), q.phi + k * step[2]};
            const double e = form_misfit(c, s, d, move_err);
            if (e < move_err) {
              move_err = e;
              move = c;
            }
          }
      if (move_err < err) {
        q = move;
        err = move_err;
      } else {
        for (double& st : step) st *= 0.5;
      }
    }
    if (err < best.distance) {
      const auto coeff = form_coefficients(q, s);
      best = {err, coeff[0], coeff[1], coeff[2], s > 0 ? Phase::positive : Phase::negative};
    }
  }
  return best;
}

}  // namespace membrane
