#pragma once

// Radius-indexed functionals evaluated on sampled fields (two space dimensions):
//
//   Weiss:   Φ(r) = r⁻⁴ ∫_{B_r} (|∇u|² + λ₊ u⁺ + λ₋ u⁻) − 2 r⁻⁵ ∫_{∂B_r} u²
//   ACF:     Ψ(r) = r⁻⁴ ∫_{B_r} |∇h₁|² · ∫_{B_r} |∇h₂|²
//   circle:  S_r  = sqrt(r⁻¹ ∫_{∂B_r} u²)
//
// Disks use polar midpoint quadrature with nq × nq nodes, circles the nq-node
// trapezoid rule. Gradients come from precomputed central-difference fields,
// interpolated bilinearly.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "membrane/grid.hpp"

namespace membrane {

class MonotonicityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Blow-up normalization failed because u vanishes on the circle.
class ZeroNormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultQuadrature = 256;

struct RadiusLadder {
  Point center;
  std::vector<double> radii;  // strictly decreasing

  /// Validates positivity, strict decrease and that the largest disk fits in `grid`.
  static RadiusLadder make(Point center, std::vector<double> radii, const Grid2D& grid);
  /// Radii {m₀ h, m₁ h, ...} sorted decreasingly.
  static RadiusLadder from_multiples(Point center, std::vector<double> multiples_of_h, const Grid2D& grid);
};

struct MonotonicityProfile {
  RadiusLadder ladder;
  std::vector<double> values;
  /// Index pairs (larger radius, smaller radius) where the smaller radius
  /// carries the larger value by more than tol_mono.
  std::vector<std::pair<std::size_t, std::size_t>> violations;
  double tol_mono = 0.0;

  /// `r,value,violation_flag`; the flag marks the smaller radius of a violating pair.
  void write_csv(const std::string& path) const;
};

double weiss_phi(const ScalarField& u, Point x0, double r, double lambda_plus, double lambda_minus,
                 int nq = kDefaultQuadrature);
double weiss_phi(const ScalarField& u, const GradientFields& grad, Point x0, double r, double lambda_plus,
                 double lambda_minus, int nq = kDefaultQuadrature);

double acf_psi(const ScalarField& h1, const ScalarField& h2, Point z, double r, int nq = kDefaultQuadrature);
double acf_psi(const GradientFields& grad_h1, const GradientFields& grad_h2, Point z, double r,
               int nq = kDefaultQuadrature);

/// h₁ = max(∂ₑu, 0), h₂ = −min(∂ₑu, 0) from central differences (one-sided on the ring).
std::pair<ScalarField, ScalarField> directional_parts(const ScalarField& u, Vec2 e);

double s_norm(const ScalarField& u, Point y, double r, int nq = kDefaultQuadrature);

/// u(y + r x) / S_r(y, u) sampled on `target`. Target nodes inside the unit
/// disk must map into the source grid; nodes outside it are clamped to the
/// source rectangle. Throws ZeroNormError when S_r vanishes.
ScalarField blowup_rescale(const ScalarField& u, Point y, double r, const Grid2D& target,
                           int nq = kDefaultQuadrature);
/// u(y + r x) / r², the unnormalized rescaling.
ScalarField quadratic_rescale(const ScalarField& u, Point y, double r, const Grid2D& target);

/// 1e-2 · max|value| + 1e-8
double default_tol_mono(const std::vector<double>& values);

MonotonicityProfile phi_ladder(const ScalarField& u, const RadiusLadder& ladder, double lambda_plus,
                               double lambda_minus, int nq = kDefaultQuadrature, double tol_mono = -1.0);
MonotonicityProfile psi_ladder(const ScalarField& h1, const ScalarField& h2, const RadiusLadder& ladder,
                               int nq = kDefaultQuadrature, double tol_mono = -1.0);

}  // namespace membrane
