// Small instances shared by the unit tests.
#pragma once

#include <utility>
#include <vector>

#include "entsel/instances.hpp"

namespace fixtures {

using namespace entsel;

/// Uniform atoms at the given positions on a line.
inline DiscreteMeasure line_measure(const std::vector<double>& xs, double cell_width = 0.5) {
  Matrix pts(static_cast<Index>(xs.size()), 1);
  for (std::size_t k = 0; k < xs.size(); ++k) pts(static_cast<Index>(k), 0) = xs[k];
  return make_measure(pts, Vector::Constant(pts.rows(), 1.0 / static_cast<double>(xs.size())),
                      cell_width);
}

inline DiscreteMeasure point_measure(std::vector<double> x) {
  Matrix pts(1, static_cast<Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) pts(0, static_cast<Index>(k)) = x[k];
  return make_measure(pts, Vector::Ones(1), kAtomicCellWidth);
}

inline std::pair<DiscreteMeasure, DiscreteMeasure> builtin(const char* name, int n) {
  const auto s = builtin_scenario(name);
  return discretize(s, GridSpec::uniform(s.dim, n));
}

}  // namespace fixtures
