#include "membrane/freeboundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace membrane {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::vector<Point> FreeBoundarySet::vertices() const {
  std::vector<Point> out;
  for (const auto* set : {&plus_boundary, &minus_boundary})
    for (const auto& line : *set) out.insert(out.end(), line.points.begin(), line.points.end());
  return out;
}

void FreeBoundarySet::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17) << "phase,component_id,x,y\n";
  auto dump = [&](const std::vector<Polyline>& lines, const char* phase) {
    for (std::size_t c = 0; c < lines.size(); ++c)
      for (const Point& p : lines[c].points) out << phase << ',' << c << ',' << p.x << ',' << p.y << '\n';
  };
  dump(plus_boundary, "plus");
  dump(minus_boundary, "minus");
}

// ---------------------------------------------------------------------------
// marching squares

std::vector<Polyline> contour_above(const ScalarField& f, double level) {
  const Grid2D& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const std::size_t n_horizontal = static_cast<std::size_t>(nx - 1) * ny;
  auto h_edge = [&](int i, int j) { return static_cast<std::size_t>(j) * (nx - 1) + i; };
  auto v_edge = [&](int i, int j) { return n_horizontal + static_cast<std::size_t>(j) * nx + i; };
  auto value = [&](int i, int j) { return f(i, j) - level; };

  std::map<std::size_t, Point> crossing;
  auto cross = [&](std::size_t id, int ia, int ja, int ib, int jb) {
    if (crossing.count(id)) return;
    const double fa = value(ia, ja), fb = value(ib, jb);
    const double t = fa / (fa - fb);
    const Point a = g.node(ia, ja), b = g.node(ib, jb);
    crossing[id] = a + t * (b - a);
  };

  std::vector<std::array<std::size_t, 2>> segments;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      // corners: 0 = (i,j), 1 = (i+1,j), 2 = (i+1,j+1), 3 = (i,j+1)
      const double c[4] = {value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)};
      const bool in[4] = {c[0] > 0, c[1] > 0, c[2] > 0, c[3] > 0};
      const int code = in[0] | (in[1] << 1) | (in[2] << 2) | (in[3] << 3);
      if (code == 0 || code == 15) continue;
      // edges: 0 bottom, 1 right, 2 top, 3 left
      const std::size_t edge[4] = {h_edge(i, j), v_edge(i + 1, j), h_edge(i, j + 1), v_edge(i, j)};
      const int ends[4][4] = {{i, j, i + 1, j}, {i + 1, j, i + 1, j + 1}, {i, j + 1, i + 1, j + 1}, {i, j, i, j + 1}};
      auto add = [&](int ea, int eb) {
        for (int e : {ea, eb}) cross(edge[e], ends[e][0], ends[e][1], ends[e][2], ends[e][3]);
        segments.push_back({edge[ea], edge[eb]});
      };
      if (code == 5 || code == 10) {
        const bool centre_in = 0.25 * (c[0] + c[1] + c[2] + c[3]) > 0;
        const bool cut_corners_0_2 = (code == 5) != centre_in;
        if (cut_corners_0_2) {
          add(3, 0);
          add(1, 2);
        } else {
          add(0, 1);
          add(2, 3);
        }
        continue;
      }
      int found[2], nfound = 0;
      const int corner_a[4] = {0, 1, 3, 0}, corner_b[4] = {1, 2, 2, 3};
      for (int e = 0; e < 4; ++e)
        if (in[corner_a[e]] != in[corner_b[e]]) found[nfound++] = e;
      add(found[0], found[1]);
    }
  }

  // chain segments through shared edge crossings
  std::map<std::size_t, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (std::size_t e : segments[s]) incident[e].push_back(s);
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> out;

  auto walk = [&](std::size_t start_edge) {
    Polyline line;
    std::size_t edge = start_edge;
    line.points.push_back(crossing[edge]);
    for (;;) {
      std::size_t next_seg = segments.size();
      for (std::size_t s : incident[edge])
        if (!used[s]) {
          next_seg = s;
          break;
        }
      if (next_seg == segments.size()) break;
      used[next_seg] = true;
      edge = segments[next_seg][0] == edge ? segments[next_seg][1] : segments[next_seg][0];
      if (edge == start_edge) {
        line.closed = true;
        break;
      }
      const Point p = crossing[edge];
      if (p.x != line.points.back().x || p.y != line.points.back().y) line.points.push_back(p);
    }
    out.push_back(std::move(line));
  };
  for (const auto& [edge, segs] : incident)
    if (segs.size() == 1 && !used[segs[0]]) walk(edge);
  for (std::size_t s = 0; s < segments.size(); ++s)
    if (!used[s]) walk(segments[s][0]);
  return out;
}

FreeBoundarySet extract_free_boundary(const ScalarField& u, double tol_zero) {
  FreeBoundarySet fb;
  fb.h = u.grid().h();
  fb.plus_boundary = contour_above(u, tol_zero);
  ScalarField neg(u.grid());
  for (std::size_t k = 0; k < neg.values().size(); ++k) neg.values()[k] = -u.values()[k];
  fb.minus_boundary = contour_above(neg, tol_zero);
  return fb;
}

// ---------------------------------------------------------------------------
// classification

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::regular:
      return "regular";
    case PointClass::branch:
      return "branch";
    case PointClass::one_phase_singular:
      return "one_phase_singular";
    default:
      return "indeterminate";
  }
}

ClassifyThresholds ClassifyThresholds::defaults(double h, double lambda_plus, double lambda_minus) {
  return {10.0 * h * (lambda_plus + lambda_minus), 1e-2 * kPi * kPi / 4.0, 0.1};
}

ClassifyThresholds ClassifyThresholds::scaled(double s) const {
  return {tol_grad * s, tol_psi * s * s * s * s, tol_dist};
}

ClassifyOptions ClassifyOptions::defaults(const Grid2D& g, double lambda_plus, double lambda_minus) {
  ClassifyOptions o;
  o.thresholds = ClassifyThresholds::defaults(g.h(), lambda_plus, lambda_minus);
  o.distance.lambda_plus = lambda_plus;
  o.distance.lambda_minus = lambda_minus;
  return o;
}

namespace {

std::vector<Vec2> default_directions() {
  const double d = 1.0 / std::sqrt(2.0);
  return {{1.0, 0.0}, {0.0, 1.0}, {d, d}, {d, -d}};
}

}  // namespace

Classification classify_point(const ScalarField& u, Point p, const RadiusLadder& ladder,
                              const ClassifyOptions& options) {
  if (norm(ladder.center - p) > 1e-12 * std::max(1.0, norm(p)))
    throw MonotonicityError("classify_point: ladder is not centred at the point");
  const RadiusLadder checked = RadiusLadder::make(p, ladder.radii, u.grid());
  const double r_min = checked.radii.back();
  const auto& th = options.thresholds;

  Classification out;
  out.point = p;
  ClassEvidence& ev = out.evidence;
  const GradientFields grad = gradient_fields(u);
  ev.gradient_magnitude = std::hypot(interpolate(grad.dx, p), interpolate(grad.dy, p));
  if (ev.gradient_magnitude > th.tol_grad) {
    out.cls = PointClass::regular;
    ev.decisive = "gradient";
    return out;
  }

  ev.directions = options.directions.empty() ? default_directions() : options.directions;
  bool all_decay = true;
  for (const Vec2& e : ev.directions) {
    const auto [h1, h2] = directional_parts(u, e);
    const GradientFields g1 = gradient_fields(h1), g2 = gradient_fields(h2);
    std::vector<double> values;
    for (double r : checked.radii) values.push_back(acf_psi(g1, g2, p, r, options.nq));
    if (!(values.back() <= th.tol_psi)) all_decay = false;
    ev.psi.push_back(std::move(values));
  }

  const Grid2D target = build_grid(-1, 1, -1, 1, options.blowup_nodes, options.blowup_nodes);
  ev.blowup_radius = r_min;
  const ScalarField blow = blowup_rescale(u, p, r_min, target, options.nq);
  const DistanceResult dm = dist_to_M(blow, options.distance);
  ev.dist_to_M = dm.distance;
  ev.best_profile = dm.best;
  if (all_decay && dm.distance < th.tol_dist) {
    out.cls = PointClass::branch;
    ev.decisive = "psi_decay_and_dist_to_M";
    return out;
  }
  const QuadraticFit q = dist_to_one_phase(blow);
  ev.dist_to_polynomial = q.distance;
  if (q.distance < th.tol_dist) {
    out.cls = PointClass::one_phase_singular;
    ev.decisive = "dist_to_polynomial";
    return out;
  }
  out.cls = PointClass::indeterminate;
  ev.decisive = "none";
  return out;
}

std::string classifications_to_json(const std::vector<Classification>& items) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : items) {
    nlohmann::ordered_json j;
    j["point"] = {c.point.x, c.point.y};
    j["class"] = to_string(c.cls);
    nlohmann::ordered_json ev;
    ev["decisive"] = c.evidence.decisive;
    ev["gradient_magnitude"] = c.evidence.gradient_magnitude;
    if (!c.evidence.directions.empty()) {
      nlohmann::ordered_json dirs = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < c.evidence.directions.size(); ++k) {
        nlohmann::ordered_json d;
        d["direction"] = {c.evidence.directions[k][0], c.evidence.directions[k][1]};
        d["psi"] = c.evidence.psi[k];
        dirs.push_back(d);
      }
      ev["psi"] = dirs;
      ev["blowup_radius"] = c.evidence.blowup_radius;
    }
    if (c.evidence.dist_to_M) ev["dist_to_M"] = *c.evidence.dist_to_M;
    if (c.evidence.best_profile) ev["best_profile"] = nlohmann::json::parse(profile_to_json(*c.evidence.best_profile));
    if (c.evidence.dist_to_polynomial) ev["dist_to_polynomial"] = *c.evidence.dist_to_polynomial;
    j["evidence"] = ev;
    arr.push_back(j);
  }
  return arr.dump(2);
}

// ---------------------------------------------------------------------------
// two graphs

GraphFit fit_two_graphs(const ScalarField& u, Point p, double window, double tol_zero,
                        const GraphFitOptions& options) {
  const Grid2D& g = u.grid();
  if (!(window >= 8.0 * g.h() - 1e-12)) throw MonotonicityError("fit_two_graphs: window must be at least 8h");
  GraphFit fit;
  if (options.theta) {
    fit.theta = *options.theta;
  } else {
    const Grid2D target = build_grid(-1, 1, -1, 1, options.blowup_nodes, options.blowup_nodes);
    const ScalarField blow = blowup_rescale(u, p, window, target, options.nq);
    fit.theta = dist_to_M(blow, options.distance).best.theta;
  }
  const double ct = std::cos(fit.theta), st = std::sin(fit.theta);
  fit.direction = {ct, -st};
  auto to_frame = [&](Point x) {
    const Point d = x - p;
    return Point{ct * d.x - st * d.y, st * d.x + ct * d.y};
  };

  const FreeBoundarySet fb = extract_free_boundary(u, tol_zero);
  const int samples = std::max(9, static_cast<int>(std::ceil(window / g.h())) + 1);
  const double dedupe = 1e-9 * g.h();

  bool any = false;
  for (int k = 0; k < samples; ++k) {
    const double t = -0.5 * window + window * k / (samples - 1);
    std::vector<double> hits[2];
    int phase = 0;
    for (const auto* set : {&fb.plus_boundary, &fb.minus_boundary}) {
      for (const Polyline& line : *set) {
        const std::size_t n = line.points.size();
        const std::size_t nseg = line.closed ? n : (n == 0 ? 0 : n - 1);
        for (std::size_t s = 0; s < nseg; ++s) {
          const Point a = to_frame(line.points[s]), b = to_frame(line.points[(s + 1) % n]);
          const bool crosses = (a.y <= t && t < b.y) || (b.y <= t && t < a.y);
          if (!crosses) continue;
          const double q1 = a.x + (t - a.y) / (b.y - a.y) * (b.x - a.x);
          if (std::hypot(q1, t) > window) continue;
          bool duplicate = false;
          for (double v : hits[phase]) duplicate = duplicate || std::abs(v - q1) <= dedupe;
          if (!duplicate) hits[phase].push_back(q1);
        }
      }
      ++phase;
    }
    if (hits[0].size() > 1 || hits[1].size() > 1) {
      std::ostringstream msg;
      msg << "fit_two_graphs: zero set is not a graph over the transverse line t = " << t;
      throw GraphFitError(GraphFitError::Reason::not_a_graph, msg.str());
    }
    std::vector<double> all(hits[0]);
    all.insert(all.end(), hits[1].begin(), hits[1].end());
    if (all.empty()) {
      fit.transverse.push_back(t);
      fit.gplus.push_back(std::numeric_limits<double>::quiet_NaN());
      fit.gminus.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    any = true;
    fit.transverse.push_back(t);
    fit.gplus.push_back(*std::max_element(all.begin(), all.end()));
    fit.gminus.push_back(*std::min_element(all.begin(), all.end()));
  }
  if (!any) throw GraphFitError(GraphFitError::Reason::empty_zero_set, "fit_two_graphs: zero set empty in window");
  for (std::size_t k = 0; k < fit.gplus.size(); ++k)
    if (std::isnan(fit.gplus[k]))
      throw GraphFitError(GraphFitError::Reason::not_a_graph,
                          "fit_two_graphs: zero set does not cover the transverse window");

  for (std::size_t k = 0; k + 1 < fit.transverse.size(); ++k) {
    const double dt = fit.transverse[k + 1] - fit.transverse[k];
    fit.lipschitz_estimate = std::max({fit.lipschitz_estimate, std::abs(fit.gplus[k + 1] - fit.gplus[k]) / dt,
                                       std::abs(fit.gminus[k + 1] - fit.gminus[k]) / dt});
  }

  // angle between consecutive segment directions, segments with midpoint in the window
  for (const auto* set : {&fb.plus_boundary, &fb.minus_boundary}) {
    for (const Polyline& line : *set) {
      const std::size_t n = line.points.size();
      const std::size_t nseg = line.closed ? n : (n == 0 ? 0 : n - 1);
      bool have_prev = false;
      Point prev{};
      for (std::size_t s = 0; s < nseg; ++s) {
        const Point a = line.points[s], b = line.points[(s + 1) % n];
        const Point d = b - a;
        const Point mid = a + 0.5 * d;
        if (norm(d) < 1e-12 * g.h() || norm(mid - p) > window) {
          have_prev = false;
          continue;
        }
        if (have_prev) {
          const double angle = std::atan2(std::abs(prev.x * d.y - prev.y * d.x), prev.x * d.x + prev.y * d.y);
          fit.max_normal_oscillation = std::max(fit.max_normal_oscillation, angle);
        }
        prev = d;
        have_prev = true;
      }
    }
  }
  return fit;
}

// ---------------------------------------------------------------------------
// circle traces and reflection

AngularSamples circle_trace(const std::function<double(Point)>& u, Point y, double theta_rotation, double r, int m,
                            int nq) {
  if (m < 2) throw MonotonicityError("circle_trace: need at least two samples");
  if (nq < 4) throw MonotonicityError("circle_trace: quadrature density must be at least 4");
  const double c = std::cos(theta_rotation), s = std::sin(theta_rotation);
  auto on_circle = [&](double t) {
    const double a = r * std::cos(t), b = r * std::sin(t);
    return Point{y.x + c * a - s * b, y.y + s * a + c * b};
  };
  double rim = 0.0;
  for (int k = 0; k < nq; ++k) {
    const double v = u(on_circle(2.0 * kPi * k / nq));
    rim += v * v;
  }
  const double norm_r = std::sqrt(rim * (2.0 * kPi / nq));  // sqrt(r⁻¹ ∫ u²) with ds = r dθ
  if (!(norm_r > 0.0)) throw ZeroNormError("circle_trace: S_r vanishes");
  AngularSamples out;
  for (int k = 0; k < m; ++k) {
    const double t = -kPi + 2.0 * kPi * k / m;
    out.theta.push_back(t);
    out.values.push_back(u(on_circle(t)) / norm_r);
  }
  return out;
}

AngularSamples circle_trace(const ScalarField& u, Point y, double theta_rotation, double r, int m, int nq) {
  if (!u.grid().contains_disk(y, r)) throw MonotonicityError("circle_trace: circle exits the domain");
  return circle_trace([&](Point p) { return interpolate(u, p); }, y, theta_rotation, r, m, nq);
}

AngularSamples reflection_xi(const AngularSamples& phi) {
  const std::size_t m = phi.values.size();
  if (m < 2 || m % 2 != 0) throw MonotonicityError("reflection_xi: need an even number of samples");
  const std::size_t half = m / 2;  // index of θ = 0
  AngularSamples out;
  for (std::size_t j = 0; j <= half; ++j) {
    out.theta.push_back(2.0 * kPi * static_cast<double>(j) / static_cast<double>(m));
    const std::size_t plus = (half + j) % m, minus = half - j;
    out.values.push_back(phi.values[plus] - phi.values[minus]);
  }
  out.values.front() = 0.0;
  out.values.back() = 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// measure estimates

namespace {

// Liang-Barsky clipping; returns the clipped length of segment ab.
double clip_length(Point a, Point b, const Rect& w) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - w.x_min, w.x_max - a.x, a.y - w.y_min, w.y_max - a.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return 0.0;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0)
      t0 = std::max(t0, t);
    else
      t1 = std::min(t1, t);
    if (t0 > t1) return 0.0;
  }
  return (t1 - t0) * std::hypot(dx, dy);
}

template <typename F>
void for_each_segment(const std::vector<Polyline>& lines, F&& f) {
  for (const Polyline& line : lines) {
    const std::size_t n = line.points.size();
    if (n < 2) continue;
    const std::size_t nseg = line.closed ? n : n - 1;
    for (std::size_t s = 0; s < nseg; ++s) f(line.points[s], line.points[(s + 1) % n]);
  }
}

}  // namespace

double clipped_length(const std::vector<Polyline>& lines, const Rect& window) {
  double total = 0.0;
  for_each_segment(lines, [&](Point a, Point b) { total += clip_length(a, b, window); });
  return total;
}

PerimeterEstimate perimeter_estimate(const ScalarField& u, const Rect& window, double tol_zero) {
  const FreeBoundarySet fb = extract_free_boundary(u, tol_zero);
  return {clipped_length(fb.plus_boundary, window), clipped_length(fb.minus_boundary, window)};
}

int covering_count(const FreeBoundarySet& fb, double eps, const Rect& window) {
  if (!(eps >= 2.0 * fb.h - 1e-15)) throw MonotonicityError("covering_count: eps below 2h is under-resolved");
  std::vector<Point> samples;
  auto add_segment = [&](Point a, Point b) {
    const int pieces = std::max(1, static_cast<int>(std::ceil(4.0 * norm(b - a) / eps)));
    for (int k = 0; k <= pieces; ++k) {
      const Point q = a + (static_cast<double>(k) / pieces) * (b - a);
      if (window.contains(q)) samples.push_back(q);
    }
  };
  for (const auto* set : {&fb.plus_boundary, &fb.minus_boundary}) {
    for (const Polyline& line : *set) {
      if (line.points.size() == 1 && window.contains(line.points[0])) samples.push_back(line.points[0]);
      for_each_segment({line}, add_segment);
    }
  }
  std::vector<Point> centres;
  for (const Point& q : samples) {
    bool covered = false;
    for (auto it = centres.rbegin(); it != centres.rend() && !covered; ++it) covered = norm(q - *it) <= eps;
    if (!covered) centres.push_back(q);
  }
  return static_cast<int>(centres.size());
}

}  // namespace membrane
