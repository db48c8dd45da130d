#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "membrane/grid.hpp"
#include "membrane/monotonicity.hpp"
#include "membrane/profiles.hpp"

namespace membrane {

struct Polyline {
  std::vector<Point> points;
  bool closed = false;
};

/// ∂{u>0} and ∂{u<0} as polylines: the +tol_zero and −tol_zero level sets.
struct FreeBoundarySet {
  std::vector<Polyline> plus_boundary;
  std::vector<Polyline> minus_boundary;
  /// Spacing of the grid the set was extracted from.
  double h = 0.0;

  bool empty() const { return plus_boundary.empty() && minus_boundary.empty(); }
  /// All vertices of both phases.
  std::vector<Point> vertices() const;
  /// `phase,component_id,x,y`
  void write_csv(const std::string& path) const;
};

/// Marching squares on the region {f > level}; linear interpolation on edges,
/// saddle cells resolved by the cell-centre average.
std::vector<Polyline> contour_above(const ScalarField& f, double level);

FreeBoundarySet extract_free_boundary(const ScalarField& u, double tol_zero);

struct Rect {
  double x_min, x_max, y_min, y_max;
  static Rect of(const Grid2D& g) { return {g.x_min(), g.x_max(), g.y_min(), g.y_max()}; }
  bool contains(Point p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
};

enum class PointClass { regular, branch, one_phase_singular, indeterminate };
std::string to_string(PointClass c);

struct ClassifyThresholds {
  double tol_grad = 0.0;
  double tol_psi = 0.0;
  double tol_dist = 0.1;

  /// tol_grad = 10 h (λ₊ + λ₋), tol_psi = 1e-2 π²/4, tol_dist = 0.1.
  static ClassifyThresholds defaults(double h, double lambda_plus, double lambda_minus);
  /// Thresholds for the field s·u (gradients scale by s, Ψ by s⁴).
  ClassifyThresholds scaled(double s) const;
};

struct ClassifyOptions {
  ClassifyThresholds thresholds;
  std::vector<Vec2> directions;  // empty: both axes and both diagonals
  int blowup_nodes = 65;         // blow-up target grid on [−1, 1]²
  int nq = kDefaultQuadrature;
  DistanceOptions distance;      // λ± here must match the field

  static ClassifyOptions defaults(const Grid2D& g, double lambda_plus, double lambda_minus);
};

struct ClassEvidence {
  double gradient_magnitude = 0.0;
  std::vector<Vec2> directions;
  std::vector<std::vector<double>> psi;  // [direction][ladder radius]
  double blowup_radius = 0.0;
  std::optional<double> dist_to_M;
  std::optional<GlobalProfile> best_profile;
  std::optional<double> dist_to_polynomial;
  std::string decisive;
};

struct Classification {
  Point point;
  PointClass cls = PointClass::indeterminate;
  ClassEvidence evidence;
};

/// Decision chain: large gradient → regular; Ψ below tol_psi at the smallest
/// radius for every direction and blow-up within tol_dist of M → branch;
/// blow-up within tol_dist of the sign-definite quadratics → one_phase_singular;
/// otherwise indeterminate. The ladder must be centred at p.
Classification classify_point(const ScalarField& u, Point p, const RadiusLadder& ladder,
                              const ClassifyOptions& options);

std::string classifications_to_json(const std::vector<Classification>& items);

class GraphFitError : public std::runtime_error {
 public:
  enum class Reason { empty_zero_set, not_a_graph };
  GraphFitError(Reason reason, const std::string& what) : std::runtime_error(what), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

struct GraphFit {
  double theta = 0.0;      // rotation of the fitted frame
  Vec2 direction{1, 0};    // graph axis (first rotated coordinate) in original coordinates
  std::vector<double> transverse;
  std::vector<double> gplus;
  std::vector<double> gminus;
  double lipschitz_estimate = 0.0;
  double max_normal_oscillation = 0.0;
};

struct GraphFitOptions {
  /// Frame rotation; when unset it is taken from dist_to_M of the blow-up at p
  /// with radius `window`.
  std::optional<double> theta;
  int blowup_nodes = 65;
  int nq = kDefaultQuadrature;
  DistanceOptions distance;
};

/// g⁺(t) = sup and g⁻(t) = inf of the first rotated coordinate over the zero
/// set in B_window(p), sampled at transverse coordinates t ∈ [−window/2, window/2].
GraphFit fit_two_graphs(const ScalarField& u, Point p, double window, double tol_zero,
                        const GraphFitOptions& options = {});

/// Samples of a function on [−π, π) or [0, π].
struct AngularSamples {
  std::vector<double> theta;
  std::vector<double> values;
};

/// φ(θ) = u(y + r U(cos θ, sin θ)) / S_r(y, u), θ_k = −π + 2πk/m, U the rotation by theta_rotation.
AngularSamples circle_trace(const ScalarField& u, Point y, double theta_rotation, double r, int m,
                            int nq = kDefaultQuadrature);
/// Same for an analytic function; S_r by the nq-node trapezoid rule.
AngularSamples circle_trace(const std::function<double(Point)>& u, Point y, double theta_rotation, double r, int m,
                            int nq = kDefaultQuadrature);

/// ξ(θ) = φ(θ) − φ(−θ) for θ = 2πj/m, j = 0..m/2. Requires even m.
AngularSamples reflection_xi(const AngularSamples& phi);

struct PerimeterEstimate {
  double plus = 0.0;
  double minus = 0.0;
};

/// Length of the extracted boundaries clipped to `window`, per phase.
PerimeterEstimate perimeter_estimate(const ScalarField& u, const Rect& window, double tol_zero);
double clipped_length(const std::vector<Polyline>& lines, const Rect& window);

/// Greedy ε-cover of the boundary curves (sampled at spacing ≤ ε/4) inside
/// `window` by balls centred on the curves. Requires ε ≥ 2h.
int covering_count(const FreeBoundarySet& fb, double eps, const Rect& window);

}  // namespace membrane
