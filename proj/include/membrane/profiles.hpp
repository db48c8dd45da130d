#pragma once

// Exact global solutions of the two-phase membrane equation
//   Δu = (λ₊/2) χ{u>0} − (λ₋/2) χ{u<0}
// and sup-norm distances of sampled fields to the families they form.

#include <stdexcept>
#include <string>

#include "membrane/boundary.hpp"
#include "membrane/grid.hpp"

namespace membrane {

class ProfileError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Admissible parameter box: 0 ≤ β₁ ≤ a, 0 ≤ β₂ ≤ b, β₁ + β₂ ≥ c.
struct ProfileBounds {
  double a = 4.0;
  double b = 4.0;
  double c = 0.05;
};

/// One-dimensional global profile composed with a rotation:
///   v(x) = w((U_θ x)₁),  w(s) = β₁((λ₊/4) max(s,0)² − (λ₋/4) min(s−τ,0)²) + β₂ s
/// where U_θ is the counter-clockwise rotation by θ. θ = 0 gives the
/// unrotated family; the zero set is the slab τ ≤ s ≤ 0 when β₂ = 0.
struct GlobalProfile {
  double beta1 = 1.0;
  double beta2 = 0.0;
  double tau = 0.0;
  double theta = 0.0;
  double lambda_plus = 2.0;
  double lambda_minus = 2.0;

  /// Validates every invariant against `bounds`; throws ProfileError.
  static GlobalProfile make(double beta1, double beta2, double tau, double theta, double lambda_plus,
                            double lambda_minus, const ProfileBounds& bounds = {});
  void validate(const ProfileBounds& bounds = {}) const;

  /// The profile along its own first coordinate.
  double along_normal(double s) const;
};

double eval_profile(const GlobalProfile& v, Point p);

std::string profile_to_json(const GlobalProfile& v);
GlobalProfile profile_from_json(const std::string& text, const ProfileBounds& bounds = {});

enum class Phase { positive, negative };

/// p(x) = α x₁² + β x₁x₂ + γ x₂², sign-definite, solving the equation in its
/// single phase: Δp = 2α + 2γ = λ₊/2 (positive) or −λ₋/2 (negative).
struct OnePhasePolynomial {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  Phase sign = Phase::positive;

  static OnePhasePolynomial make(double alpha, double beta, double gamma, Phase sign, double lambda_plus,
                                 double lambda_minus);
  /// (λ₊/8)|x|²
  static OnePhasePolynomial isotropic(double lambda_plus);
};

double eval_polynomial(const OnePhasePolynomial& q, Point p);

/// Dirichlet data equal to the exact profile on every boundary node.
BoundaryValues profile_boundary_trace(const GlobalProfile& v, const Grid2D& g);
BoundaryValues profile_boundary_trace(const OnePhasePolynomial& q, const Grid2D& g);

struct DistanceOptions {
  ProfileBounds bounds;
  double lambda_plus = 2.0;
  double lambda_minus = 2.0;
  /// Coarse samples per parameter axis.
  int coarse = 32;
  /// Pattern-search steps are halved until they fall below this.
  double refine_tol = 1e-6;
  /// Uniform rotation samples on [−π, π) for dist_to_M.
  int theta_samples = 360;
  /// Number of coarse minima refined locally.
  int refine_starts = 4;
};

struct DistanceResult {
  double distance = 0.0;
  GlobalProfile best;
};

/// inf over unrotated profiles of sup over grid nodes in the closed unit disk.
/// The field's grid must cover [−1, 1]².
DistanceResult dist_to_Mstar(const ScalarField& f, const DistanceOptions& options = {});
/// Same, additionally minimizing over the rotation angle.
DistanceResult dist_to_M(const ScalarField& f, const DistanceOptions& options = {});

/// Sup-norm misfit of a fixed profile over the unit-disk nodes of f.
double sup_distance(const ScalarField& f, const GlobalProfile& v);

/// Sign-definite quadratic form q(x) = α x₁² + β x₁x₂ + γ x₂² with free scale.
struct QuadraticFit {
  double distance = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  Phase sign = Phase::positive;
};

/// Distance of a normalized field to the cone of sign-definite homogeneous
/// quadratics (the one-phase singular blow-ups), sup over unit-disk nodes.
QuadraticFit dist_to_one_phase(const ScalarField& f, double refine_tol = 1e-6);

}  // namespace membrane
