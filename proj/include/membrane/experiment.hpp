#pragma once

// Config-driven experiments: one config file, one output directory.

#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "membrane/config.hpp"
#include "membrane/freeboundary.hpp"
#include "membrane/profiles.hpp"
#include "membrane/solver.hpp"

namespace membrane {

enum class ExitStatus : int {
  ok = 0,
  usage = 1,
  config_error = 2,
  solver_failure = 3,
  fatal_violation = 4,
  hypothesis_violation = 5,
  diagnostic_error = 6,
};

enum class PerturbationFamily { constant, linear, sinusoidal };

/// Boundary perturbation shapes: 1, x₂, sin(kπ x₂).
struct Perturbation {
  PerturbationFamily family = PerturbationFamily::constant;
  double amplitude = 0.0;
  int k = 1;

  /// Shape without the amplitude.
  double shape(Point p) const;
};

enum class BoundaryFamily { zero, profile, polynomial, profile_perturbed };

struct ProblemConfig {
  double x_min = -1, x_max = 1, y_min = -1, y_max = 1;
  int nx = 129, ny = 129;
  double lambda_plus = 2.0, lambda_minus = 2.0;
  double tol_linear = 1e-10;
  int tol_pattern = 200;
  std::optional<double> tol_zero;
  BoundaryFamily family = BoundaryFamily::profile;
  GlobalProfile profile;
  std::optional<OnePhasePolynomial> polynomial;
  Perturbation perturbation;

  Grid2D grid() const;
  BoundaryValues boundary() const;
  ProblemSpec build() const;
};

struct LadderRequest {
  std::vector<Point> centers;
  std::vector<double> radii_h{8, 16, 32};
  Vec2 direction{1.0, 0.0};
};

struct DiagnosticsConfig {
  std::set<std::string> requested;  // phi_ladder psi_ladder classify graphs xi perimeter covering
  LadderRequest phi;
  LadderRequest psi;
  std::optional<std::vector<Point>> classify_points;  // unset: sampled from the free boundary
  std::vector<double> classify_radii_h{8, 16, 32};
  double classify_spacing_h = 16;
  std::vector<Point> graph_points;
  double graph_window = 0.25;  // raised to 8h on coarse grids
  Point xi_center{0, 0};
  double xi_radius = 0.5;
  double xi_rotation = 0.0;
  int xi_samples = 360;
  std::optional<Rect> perimeter_window;
  std::vector<double> covering_eps_h{8, 16, 32};
  std::optional<Rect> covering_window;
  int nq = kDefaultQuadrature;
};

struct SweepConfig {
  PerturbationFamily family = PerturbationFamily::constant;
  std::vector<double> amplitudes;  // positive, strictly decreasing
  int k = 1;
  double graph_window = 0.25;  // raised to 8h on coarse grids
  int graph_points = 3;
};

struct ExperimentConfig {
  ProblemConfig problem;
  DiagnosticsConfig diagnostics;
  std::optional<SweepConfig> sweep;
  std::string output_dir = "out";
  bool fatal = true;
};

/// Validates and converts; throws ConfigError with line/field diagnostics.
ExperimentConfig parse_experiment(const KeyValueConfig& kv);
ExperimentConfig parse_experiment_text(const std::string& text);
ExperimentConfig load_experiment(const std::string& path);

/// Symmetric Hausdorff distance between two vertex sets.
double hausdorff_distance(const std::vector<Point>& a, const std::vector<Point>& b);

/// Free-boundary points spaced about `spacing` apart along the curves, at
/// least 2h from each other, whose disk of radius min_radius fits inside the grid.
std::vector<Point> sample_free_boundary(const FreeBoundarySet& fb, const Grid2D& g, double spacing, double min_radius);

struct GraphSummary {
  Point point;
  bool ok = false;
  double lipschitz_estimate = 0.0;
  double max_normal_oscillation = 0.0;
  double gplus_mean = 0.0;
  double gminus_mean = 0.0;
  std::string error;
};

struct StabilityRow {
  double delta = 0.0;
  double sup_boundary_diff = 0.0;
  double sup_interior_diff = 0.0;
  bool comparison_holds = false;
  double hausdorff = 0.0;
  std::vector<GraphSummary> graphs;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;  // decreasing delta
  std::vector<Point> reference_branch_points;
  /// Hausdorff distances non-increasing in δ within 2h.
  bool hausdorff_monotone = true;
  double h = 0.0;

  std::string to_json() const;
};

/// The reference free boundary carries a one-phase singular point.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(const std::string& what, std::vector<Classification> offending)
      : std::runtime_error(what), offending_(std::move(offending)) {}
  const std::vector<Classification>& offending() const { return offending_; }

 private:
  std::vector<Classification> offending_;
};

/// Re-solves with u_D + δ g for every amplitude. Throws HypothesisViolation
/// before any row is computed when the reference free boundary has a
/// one_phase_singular point, ConvergenceError when a solve fails.
StabilityReport stability_sweep(const ExperimentConfig& config, std::vector<Classification>* reference = nullptr,
                                std::vector<FreeBoundarySet>* row_boundaries = nullptr);

ExitStatus run_solve(const ExperimentConfig& config, std::ostream& log);
ExitStatus run_diagnose(const ExperimentConfig& config, std::ostream& log);
ExitStatus run_sweep(const ExperimentConfig& config, std::ostream& log);

}  // namespace membrane
