#include "membrane/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace membrane {

BoundaryValues::BoundaryValues(Grid2D grid) : grid_(grid), values_(grid.size(), 0.0) {}

BoundaryValues BoundaryValues::from_function(const Grid2D& grid, const std::function<double(Point)>& f) {
  BoundaryValues out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i)
      if (grid.is_boundary(i, j)) out.set(i, j, f(grid.node(i, j)));
  return out;
}

BoundaryValues BoundaryValues::from_field(const ScalarField& u) {
  BoundaryValues out(u.grid());
  for (int j = 0; j < u.grid().ny(); ++j)
    for (int i = 0; i < u.grid().nx(); ++i)
      if (u.grid().is_boundary(i, j)) out.set(i, j, u(i, j));
  return out;
}

double BoundaryValues::at(int i, int j) const {
  if (i < 0 || j < 0 || i >= grid_.nx() || j >= grid_.ny() || !grid_.is_boundary(i, j)) {
    std::ostringstream msg;
    msg << "node (" << i << ", " << j << ") is not a boundary node";
    throw GridError(msg.str());
  }
  return values_[grid_.index(i, j)];
}

void BoundaryValues::set(int i, int j, double v) {
  if (i < 0 || j < 0 || i >= grid_.nx() || j >= grid_.ny() || !grid_.is_boundary(i, j))
    throw GridError("boundary value assigned to a non-boundary node");
  if (!std::isfinite(v)) throw GridError("boundary value is not finite");
  values_[grid_.index(i, j)] = v;
}

BoundaryValues BoundaryValues::plus(const std::function<double(Point)>& g, double scale) const {
  BoundaryValues out = *this;
  for_each([&](int i, int j, double v) { out.set(i, j, v + scale * g(grid_.node(i, j))); });
  return out;
}

double BoundaryValues::sup_difference(const BoundaryValues& other) const {
  require_same_grid(grid_, other.grid_, "boundary comparison");
  double m = 0.0;
  for_each([&](int i, int j, double v) { m = std::max(m, std::abs(v - other.at(i, j))); });
  return m;
}

}  // namespace membrane
