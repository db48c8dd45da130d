#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "membrane/boundary.hpp"
#include "membrane/grid.hpp"

namespace membrane {

/// Dirichlet problem for Δu = (λ₊/2)χ{u>0} − (λ₋/2)χ{u<0} on a grid.
struct ProblemSpec {
  double lambda_plus = 2.0;
  double lambda_minus = 2.0;
  Grid2D grid;
  BoundaryValues boundary;
  /// Target for the discrete equation residual outside the zero band.
  double tol_linear = 1e-10;
  /// Maximum number of sign-pattern sweeps.
  int tol_pattern = 200;
  /// Nodes with |u| <= tol_zero count as the zero phase.
  double tol_zero = 4e-10;

  /// Fills tolerances with their defaults (tol_zero = 1e-10 (λ₊ + λ₋)).
  static ProblemSpec make(BoundaryValues boundary, double lambda_plus, double lambda_minus);
  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double final_energy = 0.0;
  double final_residual = 0.0;
  std::vector<int> pattern_changes;
  /// Energy after every accepted sweep; non-increasing.
  std::vector<double> energies;
  int linear_iterations = 0;
  /// Sweeps where the plain pattern update raised the energy and a damped or
  /// coordinate-descent step was taken instead.
  int safeguarded_sweeps = 0;
  bool converged = false;

  std::string to_json() const;
};

/// Node phase used by the active-set iteration.
enum class NodePhase : std::int8_t { negative = -1, zero = 0, positive = 1 };

struct SolveResult {
  ScalarField u;
  SolveReport report;
  /// Pattern frozen in the final linear solve (boundary entries are zero).
  std::vector<NodePhase> pattern;
};

/// Raised when the sweep budget is exhausted or the linear solver breaks down;
/// carries the report accumulated so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

SolveResult solve(const ProblemSpec& spec);

/// Δ_h u − (λ₊/2)χ{u>tol_zero} + (λ₋/2)χ{u<−tol_zero}; zero inside the band
/// |u| <= tol_zero and on the boundary ring.
ScalarField residual_field(const ProblemSpec& spec, const ScalarField& u);

/// Discrete energy Σ ½(u_i − u_j)² over edges touching the interior plus
/// Σ h²((λ₊/2)u⁺ + (λ₋/2)u⁻) over interior nodes.
double discrete_energy(const ProblemSpec& spec, const ScalarField& u);

struct ComparisonResult {
  double sup_interior_diff = 0.0;
  double sup_boundary_diff = 0.0;
  bool holds = false;
};

/// Checks sup_interior |u1 − u2| <= sup_boundary |d1 − d2| + 10 tol_linear.
ComparisonResult comparison_check(const ScalarField& u1, const ScalarField& u2, const BoundaryValues& d1,
                                  const BoundaryValues& d2, double tol_linear = 1e-10);

}  // namespace membrane
