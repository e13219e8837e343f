#include "entsel/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace entsel {

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= width(a);
  return v;
}

bool Box::contains(std::span<const double> x, double slack) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (x[a] < low[a] - slack || x[a] > high[a] + slack) return false;
  }
  return true;
}

double box_distance(const Box& a, const Box& b) {
  double sq = 0.0;
  for (int k = 0; k < a.dim(); ++k) {
    const double gap = std::max({0.0, b.low[k] - a.high[k], a.low[k] - b.high[k]});
    sq += gap * gap;
  }
  return std::sqrt(sq);
}

namespace {

double multilinear(const DensitySpec& d, const Box& box, std::span<const double> x) {
  const int dim = box.dim();
  // Locate the cell and local coordinates on each axis.
  std::vector<int> base(dim);
  std::vector<double> frac(dim);
  for (int a = 0; a < dim; ++a) {
    const int nodes = d.table_shape[a];
    double s = (x[a] - box.low[a]) / box.width(a) * (nodes - 1);
    s = std::clamp(s, 0.0, static_cast<double>(nodes - 1));
    int k = std::min(static_cast<int>(std::floor(s)), nodes - 2);
    base[a] = k;
    frac[a] = s - k;
  }
  double value = 0.0;
  for (int corner = 0; corner < (1 << dim); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int a = 0; a < dim; ++a) {
      const int bit = (corner >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      flat += static_cast<std::size_t>(base[a] + bit) * stride;
      stride *= static_cast<std::size_t>(d.table_shape[a]);
    }
    if (w != 0.0) value += w * d.table_values[flat];
  }
  return value;
}

}  // namespace

double DensitySpec::evaluate(const Box& box, std::span<const double> x) const {
  switch (kind) {
    case Kind::uniform:
      return 1.0;
    case Kind::polynomial: {
      double v = 0.0;
      for (const auto& t : terms) {
        double m = t.coeff;
        for (std::size_t a = 0; a < t.powers.size(); ++a) {
          m *= std::pow(x[a], t.powers[a]);
        }
        v += m;
      }
      return v;
    }
    case Kind::tabulated:
      return multilinear(*this, box, x);
  }
  return 0.0;
}

void DensitySpec::validate(int dim) const {
  switch (kind) {
    case Kind::uniform:
      return;
    case Kind::polynomial:
      if (terms.empty()) throw ConfigError("polynomial density needs at least one term");
      for (const auto& t : terms) {
        if (static_cast<int>(t.powers.size()) != dim) {
          throw ConfigError("polynomial term has " + std::to_string(t.powers.size()) +
                            " powers, expected " + std::to_string(dim));
        }
        for (int p : t.powers) {
          if (p < 0) throw ConfigError("polynomial powers must be non-negative");
        }
      }
      return;
    case Kind::tabulated: {
      if (static_cast<int>(table_shape.size()) != dim) {
        throw ConfigError("tabulated density shape must have one entry per axis");
      }
      std::size_t count = 1;
      for (int s : table_shape) {
        if (s < 2) throw ConfigError("tabulated density needs >= 2 nodes per axis");
        count *= static_cast<std::size_t>(s);
      }
      if (count != table_values.size()) {
        throw ConfigError("tabulated density has " + std::to_string(table_values.size()) +
                          " values, shape requires " + std::to_string(count));
      }
      return;
    }
  }
}

Scenario make_scenario(std::string name, Box source, Box target, DensitySpec source_density,
                       DensitySpec target_density) {
  const int dim = source.dim();
  if (dim < 1) throw ConfigError("scenario dimension must be positive");
  if (target.dim() != dim || static_cast<int>(source.high.size()) != dim ||
      static_cast<int>(target.high.size()) != dim) {
    throw ConfigError("source and target boxes must share the dimension");
  }
  for (const Box* b : {&source, &target}) {
    for (int a = 0; a < dim; ++a) {
      if (!(b->high[a] > b->low[a])) throw ConfigError("box must have high > low on every axis");
    }
  }
  source_density.validate(dim);
  target_density.validate(dim);

  Scenario s;
  s.name = std::move(name);
  s.dim = dim;
  s.separation = box_distance(source, target);
  if (!(s.separation > 0.0)) {
    throw ScenarioError("source and target domains must be disjoint with positive separation");
  }
  s.source_domain = std::move(source);
  s.target_domain = std::move(target);
  s.source_density = std::move(source_density);
  s.target_density = std::move(target_density);
  return s;
}

std::vector<std::string> builtin_scenario_names() {
  return {"translated-squares-2d", "translated-cubes-3d", "segment-1d", "tied-discrete"};
}

Scenario builtin_scenario(std::string_view name) {
  if (name == "translated-squares-2d") {
    return make_scenario(std::string(name), Box{{0.0, 0.0}, {1.0, 1.0}},
                         Box{{2.0, 0.0}, {3.0, 1.0}});
  }
  if (name == "translated-cubes-3d") {
    return make_scenario(std::string(name), Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}},
                         Box{{3.0, 0.0, 0.0}, {4.0, 1.0, 1.0}});
  }
  if (name == "segment-1d") {
    return make_scenario(std::string(name), Box{{0.0}, {1.0}}, Box{{2.0}, {3.0}});
  }
  if (name == "tied-discrete") {
    // Boxes bound the hand-built atoms.
    Scenario s = make_scenario(std::string(name), Box{{0.0, 0.0}, {1.0, 1.0}},
                               Box{{3.0, 0.0}, {4.0, 1.0}});
    s.tied_discrete = true;
    return s;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

DiscreteMeasure make_measure(Matrix points, Vector weights, double cell_width) {
  if (points.rows() != weights.size()) throw Error("measure: point/weight count mismatch");
  if (points.rows() == 0) throw Error("measure: empty support");
  if (!(cell_width > 0.0)) throw Error("measure: cell width must be positive");
  for (Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw Error("measure: weights must be positive and finite");
    }
  }
  weights /= weights.sum();
  return DiscreteMeasure{std::move(points), std::move(weights), cell_width};
}

GridSpec GridSpec::uniform(int dim, int count) {
  GridSpec g;
  g.per_axis_counts.assign(static_cast<std::size_t>(dim), count);
  return g;
}

Index GridSpec::total() const {
  Index n = 1;
  for (int c : per_axis_counts) n *= c;
  return n;
}

DiscreteMeasure discretize_box(const Box& box, const DensitySpec& density, const GridSpec& grid) {
  const int dim = box.dim();
  if (static_cast<int>(grid.per_axis_counts.size()) != dim) {
    throw ConfigError("grid has " + std::to_string(grid.per_axis_counts.size()) +
                      " axes, scenario has " + std::to_string(dim));
  }
  for (int c : grid.per_axis_counts) {
    if (c < 2) throw ConfigError("grid counts must be >= 2 per axis");
  }
  const Index n = grid.total();
  if (n > kMaxGridPoints) {
    throw ConfigError("grid has " + std::to_string(n) + " points per marginal, limit is " +
                      std::to_string(kMaxGridPoints));
  }

  std::vector<double> h(dim);
  double cell_volume = 1.0;
  double max_h = 0.0;
  for (int a = 0; a < dim; ++a) {
    h[a] = box.width(a) / grid.per_axis_counts[a];
    cell_volume *= h[a];
    max_h = std::max(max_h, h[a]);
  }

  Matrix points(n, dim);
  Vector weights(n);
  std::vector<double> x(dim);
  for (Index idx = 0; idx < n; ++idx) {
    Index rest = idx;
    for (int a = 0; a < dim; ++a) {
      const Index k = rest % grid.per_axis_counts[a];
      rest /= grid.per_axis_counts[a];
      x[a] = box.low[a] + (static_cast<double>(k) + 0.5) * h[a];
      points(idx, a) = x[a];
    }
    const double p = density.evaluate(box, x);
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw ScenarioError("density is not positive at cell center of point " +
                          std::to_string(idx));
    }
    weights[idx] = p * cell_volume;
  }
  weights /= weights.sum();
  return DiscreteMeasure{std::move(points), std::move(weights), max_h};
}

std::pair<DiscreteMeasure, DiscreteMeasure> tied_discrete_instance() {
  Matrix xs(3, 2);
  xs << 0.0, 0.0,
        1.0, 0.0,
        0.0, 1.0;
  Matrix ys(3, 2);
  ys << 3.0, 0.0,
        4.0, 0.0,
        3.0, 1.0;
  Vector w = Vector::Constant(3, 1.0 / 3.0);
  return {make_measure(xs, w, kAtomicCellWidth), make_measure(ys, w, kAtomicCellWidth)};
}

std::pair<DiscreteMeasure, DiscreteMeasure> discretize(const Scenario& scenario,
                                                       const GridSpec& grid) {
  if (scenario.tied_discrete) return tied_discrete_instance();
  return {discretize_box(scenario.source_domain, scenario.source_density, grid),
          discretize_box(scenario.target_domain, scenario.target_density, grid)};
}

Matrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) {
    throw Error("cost_matrix: dimension mismatch (" + std::to_string(mu.dim()) + " vs " +
                std::to_string(nu.dim()) + ")");
  }
  const Index n = mu.size();
  const Index m = nu.size();
  Matrix c(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      c(i, j) = (mu.points.row(i) - nu.points.row(j)).norm();
    }
  }
  return c;
}

}  // namespace entsel
