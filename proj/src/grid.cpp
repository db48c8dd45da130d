#include "membrane/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace membrane {

double norm(Point p) { return std::hypot(p.x, p.y); }

namespace {

constexpr double kSpacingTol = 1e-12;

double coordinate_slack(const Grid2D& g) {
  const double scale = std::max({std::abs(g.x_min()), std::abs(g.x_max()), std::abs(g.y_min()),
                                 std::abs(g.y_max()), g.h()});
  return 1e-12 * scale;
}

}  // namespace

Grid2D::Grid2D(double x_min, double x_max, double y_min, double y_max, int nx, int ny)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), nx_(nx), ny_(ny), h_(0.0) {
  if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) && std::isfinite(y_max)))
    throw GridError("grid bounds must be finite");
  if (!(x_min < x_max) || !(y_min < y_max)) throw GridError("grid bounds must be strictly ordered");
  if (nx < 3 || ny < 3) throw GridError("grid needs at least 3 nodes per axis");
  const double hx = (x_max - x_min) / (nx - 1);
  const double hy = (y_max - y_min) / (ny - 1);
  if (std::abs(hx - hy) > kSpacingTol * std::max(hx, hy)) {
    std::ostringstream msg;
    msg << "grid spacing mismatch: hx = " << hx << ", hy = " << hy;
    throw GridError(msg.str());
  }
  h_ = hx;
}

bool Grid2D::contains(Point p) const {
  const double s = coordinate_slack(*this);
  return p.x >= x_min_ - s && p.x <= x_max_ + s && p.y >= y_min_ - s && p.y <= y_max_ + s;
}

double Grid2D::distance_to_edge(Point p) const {
  return std::min({p.x - x_min_, x_max_ - p.x, p.y - y_min_, y_max_ - p.y});
}

bool Grid2D::contains_disk(Point center, double r) const {
  return distance_to_edge(center) + coordinate_slack(*this) >= r;
}

bool Grid2D::operator==(const Grid2D& other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && x_min_ == other.x_min_ && x_max_ == other.x_max_ &&
         y_min_ == other.y_min_ && y_max_ == other.y_max_;
}

Grid2D build_grid(double x_min, double x_max, double y_min, double y_max, int nx, int ny) {
  return Grid2D(x_min, x_max, y_min, y_max, nx, ny);
}

ScalarField::ScalarField(Grid2D grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(Grid2D grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw GridError("value count does not match grid size");
  check_finite();
}

ScalarField ScalarField::sample(const Grid2D& grid, const std::function<double(Point)>& f) {
  ScalarField out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out(i, j) = f(grid.node(i, j));
  out.check_finite();
  return out;
}

void ScalarField::check_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw GridError("field contains a non-finite value");
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what) {
  if (!(a == b)) throw GridError(std::string(what) + ": grid mismatch");
}

namespace {

void require_interior(const Grid2D& g, int i, int j) {
  if (!g.is_interior(i, j)) {
    std::ostringstream msg;
    msg << "node (" << i << ", " << j << ") is not strictly interior";
    throw GridError(msg.str());
  }
}

// Cell index and local coordinate along one axis. Coordinates within 1e-9
// cells of a grid line snap onto it so node values come back exactly.
std::pair<int, double> locate(double s, int n) {
  const double r = std::round(s);
  int cell;
  double t;
  if (std::abs(s - r) < 1e-9) {
    cell = static_cast<int>(r);
    t = 0.0;
  } else {
    cell = static_cast<int>(std::floor(s));
    t = s - cell;
  }
  if (cell >= n - 1) {
    cell = n - 2;
    t = 1.0;
  }
  if (cell < 0) {
    cell = 0;
    t = 0.0;
  }
  return {cell, t};
}

}  // namespace

double discrete_laplacian(const ScalarField& f, int i, int j) {
  require_interior(f.grid(), i, j);
  const double h = f.grid().h();
  return (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) / (h * h);
}

Vec2 gradient_central(const ScalarField& f, int i, int j) {
  require_interior(f.grid(), i, j);
  const double two_h = 2.0 * f.grid().h();
  return {(f(i + 1, j) - f(i - 1, j)) / two_h, (f(i, j + 1) - f(i, j - 1)) / two_h};
}

double interpolate(const ScalarField& f, Point p) {
  const Grid2D& g = f.grid();
  if (!g.contains(p)) {
    std::ostringstream msg;
    msg << "interpolation point (" << p.x << ", " << p.y << ") outside grid";
    throw GridError(msg.str());
  }
  const auto [i, tx] = locate((p.x - g.x_min()) / g.h(), g.nx());
  const auto [j, ty] = locate((p.y - g.y_min()) / g.h(), g.ny());
  const double f00 = f(i, j);
  const double f10 = f(i + 1, j);
  const double f01 = f(i, j + 1);
  const double f11 = f(i + 1, j + 1);
  return (1.0 - ty) * ((1.0 - tx) * f00 + tx * f10) + ty * ((1.0 - tx) * f01 + tx * f11);
}

GradientFields gradient_fields(const ScalarField& f) {
  const Grid2D& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double h = g.h();
  ScalarField dx(g), dy(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (i == 0)
        dx(i, j) = (f(1, j) - f(0, j)) / h;
      else if (i == nx - 1)
        dx(i, j) = (f(nx - 1, j) - f(nx - 2, j)) / h;
      else
        dx(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2.0 * h);
      if (j == 0)
        dy(i, j) = (f(i, 1) - f(i, 0)) / h;
      else if (j == ny - 1)
        dy(i, j) = (f(i, ny - 1) - f(i, ny - 2)) / h;
      else
        dy(i, j) = (f(i, j + 1) - f(i, j - 1)) / (2.0 * h);
    }
  }
  return {std::move(dx), std::move(dy)};
}

void write_field_csv(const ScalarField& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  out << "x,y,value\n";
  const Grid2D& g = f.grid();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out << g.x(i) << ',' << g.y(j) << ',' << f(i, j) << '\n';
}

}  // namespace membrane
