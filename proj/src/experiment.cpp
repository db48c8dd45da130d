#include "membrane/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace membrane {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

double Perturbation::shape(Point p) const {
  switch (family) {
    case PerturbationFamily::constant:
      return 1.0;
    case PerturbationFamily::linear:
      return p.y;
    case PerturbationFamily::sinusoidal:
      return std::sin(k * std::numbers::pi * p.y);
  }
  return 0.0;
}

Grid2D ProblemConfig::grid() const { return Grid2D(x_min, x_max, y_min, y_max, nx, ny); }

BoundaryValues ProblemConfig::boundary() const {
  const Grid2D g = grid();
  switch (family) {
    case BoundaryFamily::zero:
      return BoundaryValues(g);
    case BoundaryFamily::polynomial:
      return profile_boundary_trace(*polynomial, g);
    case BoundaryFamily::profile:
      return profile_boundary_trace(profile, g);
    case BoundaryFamily::profile_perturbed: {
      const Perturbation pert = perturbation;
      return profile_boundary_trace(profile, g).plus([pert](Point p) { return pert.shape(p); }, pert.amplitude);
    }
  }
  return BoundaryValues(g);
}

ProblemSpec ProblemConfig::build() const {
  ProblemSpec spec = ProblemSpec::make(boundary(), lambda_plus, lambda_minus);
  spec.tol_linear = tol_linear;
  spec.tol_pattern = tol_pattern;
  if (tol_zero) spec.tol_zero = *tol_zero;
  spec.validate();
  return spec;
}

namespace {

const std::set<std::string> kDiagnostics = {"phi_ladder", "psi_ladder", "classify", "graphs",
                                            "xi",         "perimeter",  "covering"};

PerturbationFamily parse_family(const KeyValueConfig& kv, const std::string& key) {
  const std::string s = kv.get_string(key);
  if (s == "constant") return PerturbationFamily::constant;
  if (s == "linear") return PerturbationFamily::linear;
  if (s == "sinusoidal") return PerturbationFamily::sinusoidal;
  kv.fail(key, "expected constant, linear or sinusoidal, got `" + s + "`");
}

std::optional<Rect> parse_rect(const KeyValueConfig& kv, const std::string& key) {
  if (!kv.has(key)) return std::nullopt;
  const auto v = kv.get_doubles(key);
  if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3])) kv.fail(key, "expected `x_min x_max y_min y_max`");
  return Rect{v[0], v[1], v[2], v[3]};
}

std::vector<double> parse_multiples(const KeyValueConfig& kv, const std::string& key, std::vector<double> fallback) {
  auto v = kv.get_doubles(key, std::move(fallback));
  if (v.empty()) kv.fail(key, "needs at least one radius");
  for (double m : v)
    if (!(m > 2.0)) kv.fail(key, "radii must exceed 2h");
  return v;
}

void check_ladders(const KeyValueConfig& kv, const std::string& key, const std::vector<Point>& centers,
                   const std::vector<double>& radii_h, const Grid2D& g) {
  for (const Point& c : centers) {
    try {
      RadiusLadder::from_multiples(c, radii_h, g);
    } catch (const std::exception& e) {
      kv.fail(key, e.what());
    }
  }
}

void parse_problem(const KeyValueConfig& kv, ProblemConfig& p) {
  if (kv.has("domain")) {
    const auto d = kv.get_doubles("domain");
    if (d.size() != 4) kv.fail("domain", "expected `x_min x_max y_min y_max`");
    p.x_min = d[0], p.x_max = d[1], p.y_min = d[2], p.y_max = d[3];
  }
  p.nx = kv.get_int("nx", p.nx);
  p.ny = kv.get_int("ny", p.ny);
  try {
    p.grid();
  } catch (const std::exception& e) {
    kv.fail(kv.has("nx") ? "nx" : "domain", e.what());
  }
  p.lambda_plus = kv.get_double("lambda_plus", p.lambda_plus);
  if (!(p.lambda_plus > 0)) kv.fail("lambda_plus", "must be positive");
  p.lambda_minus = kv.get_double("lambda_minus", p.lambda_minus);
  if (!(p.lambda_minus > 0)) kv.fail("lambda_minus", "must be positive");
  p.tol_linear = kv.get_double("tol_linear", p.tol_linear);
  if (!(p.tol_linear > 0)) kv.fail("tol_linear", "must be positive");
  p.tol_pattern = kv.get_int("tol_pattern", p.tol_pattern);
  if (p.tol_pattern < 1) kv.fail("tol_pattern", "must be at least 1");
  if (kv.has("tol_zero")) {
    p.tol_zero = kv.get_double("tol_zero");
    if (!(*p.tol_zero >= 0)) kv.fail("tol_zero", "must be non-negative");
  }

  const std::string family = kv.get_string("boundary", "profile");
  if (family == "zero") {
    p.family = BoundaryFamily::zero;
  } else if (family == "profile") {
    p.family = BoundaryFamily::profile;
  } else if (family == "profile+perturbation") {
    p.family = BoundaryFamily::profile_perturbed;
  } else if (family == "polynomial") {
    p.family = BoundaryFamily::polynomial;
  } else {
    kv.fail("boundary", "expected zero, profile, profile+perturbation or polynomial, got `" + family + "`");
  }

  GlobalProfile& v = p.profile;
  v.beta1 = kv.get_double("profile.beta1", v.beta1);
  v.beta2 = kv.get_double("profile.beta2", v.beta2);
  v.tau = kv.get_double("profile.tau", v.tau);
  v.theta = kv.get_double("profile.theta", v.theta);
  v.lambda_plus = p.lambda_plus;
  v.lambda_minus = p.lambda_minus;
  try {
    v.validate();
  } catch (const ProfileError& e) {
    kv.fail("profile.beta1", e.what());
  }

  const std::string poly = kv.get_string("polynomial", "isotropic");
  if (poly == "isotropic") {
    p.polynomial = OnePhasePolynomial::isotropic(p.lambda_plus);
  } else if (poly == "explicit") {
    const std::string sign = kv.get_string("polynomial.sign", "positive");
    if (sign != "positive" && sign != "negative") kv.fail("polynomial.sign", "expected positive or negative");
    try {
      p.polynomial = OnePhasePolynomial::make(kv.get_double("polynomial.alpha"), kv.get_double("polynomial.beta"),
                                              kv.get_double("polynomial.gamma"),
                                              sign == "positive" ? Phase::positive : Phase::negative,
                                              p.lambda_plus, p.lambda_minus);
    } catch (const ProfileError& e) {
      kv.fail("polynomial", e.what());
    }
  } else {
    kv.fail("polynomial", "expected isotropic or explicit");
  }

  if (kv.has("perturbation")) p.perturbation.family = parse_family(kv, "perturbation");
  p.perturbation.amplitude = kv.get_double("perturbation.amplitude", 0.0);
  p.perturbation.k = kv.get_int("perturbation.k", 1);
  if (p.perturbation.k < 1) kv.fail("perturbation.k", "must be at least 1");
}

void parse_diagnostics(const KeyValueConfig& kv, const Grid2D& g, DiagnosticsConfig& d) {
  if (kv.has("diagnostics")) {
    for (const std::string& w : kv.get_words("diagnostics")) {
      if (w == "none") continue;
      if (!kDiagnostics.count(w)) kv.fail("diagnostics", "unknown analysis `" + w + "`");
      d.requested.insert(w);
    }
  }
  const auto wants = [&](const char* name) { return d.requested.count(name) > 0; };

  d.nq = kv.get_int("nq", d.nq);
  if (d.nq < 8) kv.fail("nq", "must be at least 8");

  for (auto [name, req] : {std::pair{std::string("phi_ladder"), &d.phi}, std::pair{std::string("psi_ladder"), &d.psi}}) {
    if (kv.has(name + ".centers")) req->centers = kv.get_points(name + ".centers");
    req->radii_h = parse_multiples(kv, name + ".radii_h", req->radii_h);
    if (wants(name.c_str())) {
      if (req->centers.empty()) kv.fail(name + ".centers", "needs at least one centre");
      check_ladders(kv, name + ".centers", req->centers, req->radii_h, g);
    }
  }
  if (kv.has("psi_ladder.direction")) {
    const auto e = kv.get_doubles("psi_ladder.direction");
    if (e.size() != 2 || std::hypot(e[0], e[1]) == 0.0) kv.fail("psi_ladder.direction", "expected a nonzero vector");
    const double n = std::hypot(e[0], e[1]);
    d.psi.direction = {e[0] / n, e[1] / n};
  }

  d.classify_radii_h = parse_multiples(kv, "classify.radii_h", d.classify_radii_h);
  d.classify_spacing_h = kv.get_double("classify.spacing_h", d.classify_spacing_h);
  if (!(d.classify_spacing_h >= 1)) kv.fail("classify.spacing_h", "must be at least 1");
  if (kv.has("classify.points")) {
    const std::string s = kv.get_string("classify.points");
    if (s != "auto") {
      d.classify_points = kv.get_points("classify.points");
      if (wants("classify")) check_ladders(kv, "classify.points", *d.classify_points, d.classify_radii_h, g);
    }
  }

  if (kv.has("graphs.points")) d.graph_points = kv.get_points("graphs.points");
  d.graph_window = kv.get_double("graphs.window", std::max(d.graph_window, 8 * g.h()));
  if (wants("graphs")) {
    if (d.graph_points.empty()) kv.fail("graphs.points", "needs at least one point");
    if (!(d.graph_window >= 8 * g.h())) kv.fail("graphs.window", "must be at least 8h");
    for (const Point& p : d.graph_points)
      if (!g.contains(p)) kv.fail("graphs.points", "point outside the domain");
  }

  if (kv.has("xi.center")) {
    const auto c = kv.get_doubles("xi.center");
    if (c.size() != 2) kv.fail("xi.center", "expected `x y`");
    d.xi_center = {c[0], c[1]};
  }
  d.xi_radius = kv.get_double("xi.radius", d.xi_radius);
  d.xi_rotation = kv.get_double("xi.rotation", d.xi_rotation);
  d.xi_samples = kv.get_int("xi.samples", d.xi_samples);
  if (wants("xi")) {
    if (d.xi_samples < 4 || d.xi_samples % 2 != 0) kv.fail("xi.samples", "must be even and at least 4");
    if (!(d.xi_radius > 0) || !g.contains_disk(d.xi_center, d.xi_radius))
      kv.fail("xi.radius", "circle must be positive and inside the domain");
  }

  d.perimeter_window = parse_rect(kv, "perimeter.window");
  d.covering_eps_h = kv.get_doubles("covering.eps_h", d.covering_eps_h);
  if (wants("covering")) {
    if (d.covering_eps_h.empty()) kv.fail("covering.eps_h", "needs at least one value");
    for (double e : d.covering_eps_h)
      if (!(e >= 2)) kv.fail("covering.eps_h", "ε must be at least 2h");
  }
  d.covering_window = parse_rect(kv, "covering.window");
}

std::optional<SweepConfig> parse_sweep(const KeyValueConfig& kv, const Grid2D& g) {
  if (!kv.has("sweep.amplitudes") && !kv.has("sweep.family")) return std::nullopt;
  SweepConfig s;
  s.family = kv.has("sweep.family") ? parse_family(kv, "sweep.family") : PerturbationFamily::constant;
  s.amplitudes = kv.get_doubles("sweep.amplitudes");
  if (s.amplitudes.empty()) kv.fail("sweep.amplitudes", "needs at least one amplitude");
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    if (!(s.amplitudes[i] > 0)) kv.fail("sweep.amplitudes", "amplitudes must be positive");
    if (i > 0 && !(s.amplitudes[i] < s.amplitudes[i - 1]))
      kv.fail("sweep.amplitudes", "amplitudes must be strictly decreasing");
  }
  s.k = kv.get_int("sweep.k", s.k);
  if (s.k < 1) kv.fail("sweep.k", "must be at least 1");
  s.graph_window = kv.get_double("sweep.graph_window", std::max(s.graph_window, 8 * g.h()));
  if (!(s.graph_window >= 8 * g.h())) kv.fail("sweep.graph_window", "must be at least 8h");
  s.graph_points = kv.get_int("sweep.graph_points", s.graph_points);
  if (s.graph_points < 0) kv.fail("sweep.graph_points", "must be non-negative");
  return s;
}

ojson point_json(Point p) { return ojson::array({p.x, p.y}); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text << '\n';
}

GraphSummary summarize_fit(const ScalarField& u, Point p, double window, double tol_zero, const GraphFitOptions& o) {
  GraphSummary s;
  s.point = p;
  try {
    const GraphFit fit = fit_two_graphs(u, p, window, tol_zero, o);
    s.ok = true;
    s.lipschitz_estimate = fit.lipschitz_estimate;
    s.max_normal_oscillation = fit.max_normal_oscillation;
    const auto mean = [](const std::vector<double>& v) {
      double acc = 0.0;
      for (double x : v) acc += x;
      return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
    };
    s.gplus_mean = mean(fit.gplus);
    s.gminus_mean = mean(fit.gminus);
  } catch (const std::exception& e) {
    s.error = e.what();
  }
  return s;
}

// Radii (in units of h) whose disks around p stay inside the grid.
std::vector<double> fitting_radii(Point p, const std::vector<double>& radii_h, const Grid2D& g) {
  std::vector<double> out;
  for (double m : radii_h)
    if (g.contains_disk(p, m * g.h())) out.push_back(m);
  return out;
}

// Points near the domain edge get the part of the ladder that fits.
std::vector<Classification> classify_all(const ScalarField& u, const std::vector<Point>& points,
                                         const std::vector<double>& radii_h, const ClassifyOptions& options) {
  std::vector<Classification> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(points.size()); ++k) {
    try {
      const RadiusLadder ladder =
          RadiusLadder::from_multiples(points[k], fitting_radii(points[k], radii_h, u.grid()), u.grid());
      out[k] = classify_point(u, points[k], ladder, options);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

ExperimentConfig parse_experiment(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  parse_problem(kv, cfg.problem);
  const Grid2D g = cfg.problem.grid();
  parse_diagnostics(kv, g, cfg.diagnostics);
  cfg.sweep = parse_sweep(kv, g);
  cfg.output_dir = kv.get_string("output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) kv.fail("output_dir", "must not be empty");
  cfg.fatal = kv.get_bool("fatal", cfg.fatal);
  kv.reject_unused();
  return cfg;
}

ExperimentConfig parse_experiment_text(const std::string& text) { return parse_experiment(KeyValueConfig::parse(text)); }

ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(KeyValueConfig::load(path)); }

double hausdorff_distance(const std::vector<Point>& a, const std::vector<Point>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("hausdorff_distance: empty point set");
  const auto directed = [](const std::vector<Point>& from, const std::vector<Point>& to) {
    double worst = 0.0;
#pragma omp parallel for reduction(max : worst)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(from.size()); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& q : to) best = std::min(best, std::hypot(from[i].x - q.x, from[i].y - q.y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

std::vector<Point> sample_free_boundary(const FreeBoundarySet& fb, const Grid2D& g, double spacing,
                                        double min_radius) {
  std::vector<Point> candidates;
  for (const auto* lines : {&fb.plus_boundary, &fb.minus_boundary}) {
    for (const Polyline& line : *lines) {
      double since = spacing;
      for (std::size_t k = 0; k < line.points.size(); ++k) {
        if (k > 0) since += norm(line.points[k] - line.points[k - 1]);
        if (since >= spacing) {
          candidates.push_back(line.points[k]);
          since = 0.0;
        }
      }
    }
  }
  std::vector<Point> out;
  for (const Point& p : candidates) {
    if (!g.contains_disk(p, min_radius)) continue;
    const bool near = std::any_of(out.begin(), out.end(), [&](Point q) { return norm(p - q) < 2 * g.h(); });
    if (!near) out.push_back(p);
  }
  return out;
}

std::string StabilityReport::to_json() const {
  ojson j;
  j["h"] = h;
  j["hausdorff_monotone"] = hausdorff_monotone;
  ojson pts = ojson::array();
  for (const Point& p : reference_branch_points) pts.push_back(point_json(p));
  j["reference_branch_points"] = pts;
  ojson rows_json = ojson::array();
  for (const StabilityRow& r : rows) {
    ojson row;
    row["delta"] = r.delta;
    row["sup_boundary_diff"] = r.sup_boundary_diff;
    row["sup_interior_diff"] = r.sup_interior_diff;
    row["comparison_holds"] = r.comparison_holds;
    row["hausdorff"] = r.hausdorff;
    ojson graphs = ojson::array();
    for (const GraphSummary& s : r.graphs) {
      ojson gj;
      gj["point"] = point_json(s.point);
      gj["ok"] = s.ok;
      if (s.ok) {
        gj["lipschitz_estimate"] = s.lipschitz_estimate;
        gj["max_normal_oscillation"] = s.max_normal_oscillation;
        gj["gplus_mean"] = s.gplus_mean;
        gj["gminus_mean"] = s.gminus_mean;
      } else {
        gj["error"] = s.error;
      }
      graphs.push_back(gj);
    }
    row["graphs"] = graphs;
    rows_json.push_back(row);
  }
  j["rows"] = rows_json;
  return j.dump(2);
}

StabilityReport stability_sweep(const ExperimentConfig& config, std::vector<Classification>* reference,
                                std::vector<FreeBoundarySet>* row_boundaries) {
  if (!config.sweep) throw std::invalid_argument("stability_sweep: config has no sweep");
  const SweepConfig& sweep = *config.sweep;
  const DiagnosticsConfig& diag = config.diagnostics;
  const ProblemSpec base = config.problem.build();
  const Grid2D& g = base.grid;
  const SolveResult ref = solve(base);
  const FreeBoundarySet ref_fb = extract_free_boundary(ref.u, base.tol_zero);

  ClassifyOptions copt = ClassifyOptions::defaults(g, base.lambda_plus, base.lambda_minus);
  copt.nq = diag.nq;
  const double min_radius = *std::min_element(diag.classify_radii_h.begin(), diag.classify_radii_h.end()) * g.h();
  const std::vector<Point> points = sample_free_boundary(ref_fb, g, diag.classify_spacing_h * g.h(), min_radius);
  std::vector<Classification> classes = classify_all(ref.u, points, diag.classify_radii_h, copt);
  if (reference) *reference = classes;

  std::vector<Classification> singular;
  std::vector<Point> branch;
  for (const Classification& c : classes) {
    if (c.cls == PointClass::one_phase_singular) singular.push_back(c);
    if (c.cls == PointClass::branch) branch.push_back(c.point);
  }
  if (!singular.empty()) {
    const Point p = singular.front().point;
    throw HypothesisViolation("reference free boundary has a one_phase_singular point near (" + fmt(p.x) + ", " +
                                  fmt(p.y) + ")",
                              singular);
  }

  // Evenly spaced subset of the branch points for graph fits.
  std::vector<Point> fit_points;
  const std::size_t want = std::min<std::size_t>(branch.size(), static_cast<std::size_t>(sweep.graph_points));
  for (std::size_t k = 0; k < want; ++k) fit_points.push_back(branch[k * branch.size() / want]);

  Perturbation shape{sweep.family, 1.0, sweep.k};
  const std::function<double(Point)> gfun = [shape](Point p) { return shape.shape(p); };
  const std::vector<Point> ref_vertices = ref_fb.vertices();

  StabilityReport report;
  report.h = g.h();
  report.reference_branch_points = branch;
  report.rows.resize(sweep.amplitudes.size());
  std::vector<FreeBoundarySet> boundaries(sweep.amplitudes.size());
  std::vector<std::exception_ptr> errors(sweep.amplitudes.size());
  GraphFitOptions gopt;
  gopt.nq = diag.nq;
  gopt.distance = copt.distance;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(sweep.amplitudes.size()); ++k) {
    try {
      const double delta = sweep.amplitudes[k];
      ProblemSpec spec = base;
      spec.boundary = base.boundary.plus(gfun, delta);
      const SolveResult res = solve(spec);
      StabilityRow& row = report.rows[k];
      row.delta = delta;
      const ComparisonResult cmp = comparison_check(res.u, ref.u, spec.boundary, base.boundary, base.tol_linear);
      row.sup_boundary_diff = cmp.sup_boundary_diff;
      row.sup_interior_diff = cmp.sup_interior_diff;
      row.comparison_holds = cmp.holds;
      boundaries[k] = extract_free_boundary(res.u, spec.tol_zero);
      const std::vector<Point> verts = boundaries[k].vertices();
      row.hausdorff = (verts.empty() || ref_vertices.empty()) ? std::numeric_limits<double>::infinity()
                                                               : hausdorff_distance(verts, ref_vertices);
      for (const Point& p : fit_points) row.graphs.push_back(summarize_fit(res.u, p, sweep.graph_window, spec.tol_zero, gopt));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t k = 1; k < report.rows.size(); ++k)
    if (report.rows[k].hausdorff > report.rows[k - 1].hausdorff + 2 * g.h()) report.hausdorff_monotone = false;
  if (row_boundaries) *row_boundaries = std::move(boundaries);
  return report;
}

namespace {

struct Solved {
  ProblemSpec spec;
  SolveResult result;
};

// Solves and writes field.csv and solve_report.json. Returns nullopt after
// logging when the solver fails.
std::optional<Solved> solve_and_dump(const ExperimentConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  ProblemSpec spec = config.problem.build();
  try {
    SolveResult res = solve(spec);
    write_field_csv(res.u, (dir / "field.csv").string());
    write_text(dir / "solve_report.json", res.report.to_json());
    log << "solve: converged in " << res.report.iterations << " sweeps, residual " << res.report.final_residual
        << "\n";
    return Solved{std::move(spec), std::move(res)};
  } catch (const ConvergenceError& e) {
    write_text(dir / "solve_report.json", e.report().to_json());
    log << "solve failed: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

ExitStatus run_solve(const ExperimentConfig& config, std::ostream& log) {
  return solve_and_dump(config, log) ? ExitStatus::ok : ExitStatus::solver_failure;
}

ExitStatus run_diagnose(const ExperimentConfig& config, std::ostream& log) {
  const auto solved = solve_and_dump(config, log);
  if (!solved) return ExitStatus::solver_failure;
  const fs::path dir(config.output_dir);
  const ProblemSpec& spec = solved->spec;
  const ScalarField& u = solved->result.u;
  const Grid2D& g = spec.grid;
  const DiagnosticsConfig& d = config.diagnostics;
  const FreeBoundarySet fb = extract_free_boundary(u, spec.tol_zero);
  fb.write_csv((dir / "free_boundary.csv").string());

  bool errors = false;
  bool violations = false;
  ojson summary;
  const auto wants = [&](const char* name) { return d.requested.count(name) > 0; };
  const auto guarded = [&](const char* name, const std::function<void(ojson&)>& body) {
    if (!wants(name)) return;
    ojson entry;
    try {
      body(entry);
      entry["completed"] = true;
    } catch (const std::exception& e) {
      errors = true;
      entry["completed"] = false;
      entry["error"] = e.what();
      log << name << ": " << e.what() << "\n";
    }
    summary[name] = entry;
  };

  guarded("phi_ladder", [&](ojson& entry) {
    const GradientFields grad = gradient_fields(u);
    ojson files = ojson::array();
    for (std::size_t c = 0; c < d.phi.centers.size(); ++c) {
      const RadiusLadder ladder = RadiusLadder::from_multiples(d.phi.centers[c], d.phi.radii_h, g);
      const MonotonicityProfile prof = phi_ladder(u, ladder, spec.lambda_plus, spec.lambda_minus, d.nq);
      const std::string name = "phi_ladder_" + std::to_string(c) + ".csv";
      prof.write_csv((dir / name).string());
      files.push_back({{"center", point_json(d.phi.centers[c])}, {"file", name}, {"violations", prof.violations.size()}});
      if (!prof.violations.empty()) violations = true;
    }
    entry["ladders"] = files;
  });

  guarded("psi_ladder", [&](ojson& entry) {
    const auto [h1, h2] = directional_parts(u, d.psi.direction);
    ojson files = ojson::array();
    for (std::size_t c = 0; c < d.psi.centers.size(); ++c) {
      const RadiusLadder ladder = RadiusLadder::from_multiples(d.psi.centers[c], d.psi.radii_h, g);
      const MonotonicityProfile prof = psi_ladder(h1, h2, ladder, d.nq);
      const std::string name = "psi_ladder_" + std::to_string(c) + ".csv";
      prof.write_csv((dir / name).string());
      files.push_back({{"center", point_json(d.psi.centers[c])}, {"file", name}, {"violations", prof.violations.size()}});
      if (!prof.violations.empty()) violations = true;
    }
    entry["direction"] = ojson::array({d.psi.direction[0], d.psi.direction[1]});
    entry["ladders"] = files;
  });

  guarded("classify", [&](ojson& entry) {
    ClassifyOptions opt = ClassifyOptions::defaults(g, spec.lambda_plus, spec.lambda_minus);
    opt.nq = d.nq;
    const double min_radius = *std::min_element(d.classify_radii_h.begin(), d.classify_radii_h.end()) * g.h();
    const std::vector<Point> points =
        d.classify_points ? *d.classify_points : sample_free_boundary(fb, g, d.classify_spacing_h * g.h(), min_radius);
    const auto classes = classify_all(u, points, d.classify_radii_h, opt);
    write_text(dir / "classification.json", classifications_to_json(classes));
    std::map<std::string, int> counts;
    for (const auto& c : classes) ++counts[to_string(c.cls)];
    entry["counts"] = counts;
  });

  guarded("graphs", [&](ojson& entry) {
    GraphFitOptions opt;
    opt.nq = d.nq;
    opt.distance.lambda_plus = spec.lambda_plus;
    opt.distance.lambda_minus = spec.lambda_minus;
    ojson arr = ojson::array();
    int failed = 0;
    for (const Point& p : d.graph_points) {
      ojson gj;
      gj["point"] = point_json(p);
      try {
        const GraphFit fit = fit_two_graphs(u, p, d.graph_window, spec.tol_zero, opt);
        gj["theta"] = fit.theta;
        gj["direction"] = ojson::array({fit.direction[0], fit.direction[1]});
        gj["lipschitz_estimate"] = fit.lipschitz_estimate;
        gj["max_normal_oscillation"] = fit.max_normal_oscillation;
        gj["transverse"] = fit.transverse;
        gj["gplus"] = fit.gplus;
        gj["gminus"] = fit.gminus;
      } catch (const GraphFitError& e) {
        ++failed;
        gj["error"] = e.what();
        gj["reason"] = e.reason() == GraphFitError::Reason::empty_zero_set ? "empty_zero_set" : "not_a_graph";
      }
      arr.push_back(gj);
    }
    write_text(dir / "graphs.json", arr.dump(2));
    entry["failed_fits"] = failed;
  });

  guarded("xi", [&](ojson& entry) {
    const AngularSamples phi = circle_trace(u, d.xi_center, d.xi_rotation, d.xi_radius, d.xi_samples, d.nq);
    const AngularSamples xi = reflection_xi(phi);
    std::ofstream out(dir / "xi.csv");
    out << "theta,xi\n" << std::setprecision(17);
    double lowest = 0.0;
    for (std::size_t k = 0; k < xi.theta.size(); ++k) {
      out << xi.theta[k] << ',' << xi.values[k] << '\n';
      lowest = std::min(lowest, xi.values[k]);
    }
    entry["min_xi"] = lowest;
  });

  guarded("perimeter", [&](ojson& entry) {
    const Rect w = d.perimeter_window.value_or(Rect::of(g));
    const PerimeterEstimate est = perimeter_estimate(u, w, spec.tol_zero);
    ojson j;
    j["window"] = ojson::array({w.x_min, w.x_max, w.y_min, w.y_max});
    j["plus"] = est.plus;
    j["minus"] = est.minus;
    write_text(dir / "perimeter.json", j.dump(2));
    entry["plus"] = est.plus;
    entry["minus"] = est.minus;
  });

  guarded("covering", [&](ojson& entry) {
    const Rect w = d.covering_window.value_or(Rect::of(g));
    std::ofstream out(dir / "covering.csv");
    out << "eps,count,count_times_eps\n" << std::setprecision(17);
    double worst = 0.0;
    for (double m : d.covering_eps_h) {
      const double eps = m * g.h();
      const int n = covering_count(fb, eps, w);
      out << eps << ',' << n << ',' << n * eps << '\n';
      worst = std::max(worst, n * eps);
    }
    entry["max_count_times_eps"] = worst;
  });

  write_text(dir / "diagnostics.json", summary.is_null() ? "{}" : summary.dump(2));
  if (errors) return ExitStatus::diagnostic_error;
  if (violations && config.fatal) {
    log << "monotonicity violations found\n";
    return ExitStatus::fatal_violation;
  }
  return ExitStatus::ok;
}

ExitStatus run_sweep(const ExperimentConfig& config, std::ostream& log) {
  if (!config.sweep) {
    log << "config error: sweep needs sweep.amplitudes\n";
    return ExitStatus::config_error;
  }
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  std::vector<Classification> reference;
  std::vector<FreeBoundarySet> boundaries;
  try {
    const StabilityReport report = stability_sweep(config, &reference, &boundaries);
    write_text(dir / "reference_classification.json", classifications_to_json(reference));
    for (std::size_t k = 0; k < boundaries.size(); ++k)
      boundaries[k].write_csv((dir / ("free_boundary_row_" + std::to_string(k) + ".csv")).string());
    write_text(dir / "stability.json", report.to_json());
    bool holds = report.hausdorff_monotone;
    for (const StabilityRow& r : report.rows) {
      log << "delta " << r.delta << ": sup interior " << r.sup_interior_diff << ", hausdorff " << r.hausdorff
          << (r.comparison_holds ? "" : " (comparison FAILED)") << "\n";
      holds = holds && r.comparison_holds;
    }
    if (!holds && config.fatal) return ExitStatus::fatal_violation;
    return ExitStatus::ok;
  } catch (const HypothesisViolation& e) {
    write_text(dir / "hypothesis_violation.json", classifications_to_json(e.offending()));
    log << "sweep aborted: " << e.what() << "\n";
    return ExitStatus::hypothesis_violation;
  } catch (const ConvergenceError& e) {
    write_text(dir / "solve_report.json", e.report().to_json());
    log << "solve failed: " << e.what() << "\n";
    return ExitStatus::solver_failure;
  }
}

}  // namespace membrane
