#pragma once

#include "fbmlt/grid.h"

#include <cstddef>
#include <span>

namespace fbmlt {

/// Non-owning view of a d-dimensional trajectory sampled on a TimeGrid.
/// Components are stored one after the other, each with n_points values.
struct PathView {
  TimeGrid grid;
  std::size_t dim = 1;
  std::span<const double> values;

  PathView(TimeGrid g, std::size_t d, std::span<const double> v) : grid(g), dim(d), values(v) {}

  template <class P>
    requires requires(const P& p) { p.grid; p.dim; p.values; }
  PathView(const P& p) : grid(p.grid), dim(p.dim), values(p.values) {}

  std::span<const double> component(std::size_t i) const {
    return values.subspan(i * grid.n_points(), grid.n_points());
  }
  double at(std::size_t i, std::size_t k) const { return values[i * grid.n_points() + k]; }
};

} // namespace fbmlt
