#pragma once

#include <functional>
#include <vector>

#include "membrane/grid.hpp"

namespace membrane {

/// Dirichlet data: one value per boundary node of a grid.
class BoundaryValues {
 public:
  explicit BoundaryValues(Grid2D grid);
  static BoundaryValues from_function(const Grid2D& grid, const std::function<double(Point)>& f);
  /// Boundary ring of an existing field.
  static BoundaryValues from_field(const ScalarField& u);

  const Grid2D& grid() const { return grid_; }
  double at(int i, int j) const;
  void set(int i, int j, double v);

  /// Returns a copy with scale * g(x) added on every boundary node.
  BoundaryValues plus(const std::function<double(Point)>& g, double scale) const;
  /// max |this - other| over boundary nodes.
  double sup_difference(const BoundaryValues& other) const;

  template <typename F>
  void for_each(F&& f) const {
    for (int j = 0; j < grid_.ny(); ++j) {
      for (int i = 0; i < grid_.nx(); ++i) {
        if (grid_.is_boundary(i, j)) f(i, j, values_[grid_.index(i, j)]);
      }
    }
  }

 private:
  Grid2D grid_;
  std::vector<double> values_;  // full node array; interior entries unused
};

}  // namespace membrane
