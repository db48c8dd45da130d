#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace membrane {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
double norm(Point p);

using Vec2 = std::array<double, 2>;

/// Thrown for malformed grids, index or domain violations and grid mismatches.
class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform node-centred grid on a rectangle with equal spacing on both axes.
/// Node (i, j) sits at (x_min + i h, y_min + j h); i runs along x.
class Grid2D {
 public:
  Grid2D(double x_min, double x_max, double y_min, double y_max, int nx, int ny);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

  double x(int i) const { return x_min_ + i * h_; }
  double y(int j) const { return y_min_ + j * h_; }
  Point node(int i, int j) const { return {x(i), y(j)}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1; }
  bool is_interior(int i, int j) const { return i > 0 && j > 0 && i < nx_ - 1 && j < ny_ - 1; }

  /// True when p lies in the closed rectangle, allowing a relative slack of 1e-12.
  bool contains(Point p) const;
  /// Distance from p to the nearest side of the rectangle (negative outside).
  double distance_to_edge(Point p) const;
  bool contains_disk(Point center, double r) const;

  bool operator==(const Grid2D& other) const;

 private:
  double x_min_, x_max_, y_min_, y_max_;
  int nx_, ny_;
  double h_;
};

Grid2D build_grid(double x_min, double x_max, double y_min, double y_max, int nx, int ny);

/// Nodal samples on a Grid2D, row-major by y then x.
class ScalarField {
 public:
  explicit ScalarField(Grid2D grid, double fill = 0.0);
  ScalarField(Grid2D grid, std::vector<double> values);

  static ScalarField sample(const Grid2D& grid, const std::function<double(Point)>& f);

  const Grid2D& grid() const { return grid_; }
  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Throws GridError if any value is NaN or infinite.
  void check_finite() const;

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* what);

/// 5-point stencil at a strictly interior node.
double discrete_laplacian(const ScalarField& f, int i, int j);
/// Central differences at a strictly interior node.
Vec2 gradient_central(const ScalarField& f, int i, int j);
/// Bilinear interpolation; returns stored values exactly at nodes.
double interpolate(const ScalarField& f, Point p);

/// Gradient components on every node: central differences inside, one-sided
/// differences on the boundary ring.
struct GradientFields {
  ScalarField dx;
  ScalarField dy;
};
GradientFields gradient_fields(const ScalarField& f);

/// Writes `x,y,value` rows in storage order with 17 significant digits.
void write_field_csv(const ScalarField& f, const std::string& path);

}  // namespace membrane
