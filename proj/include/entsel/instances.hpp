// Continuous scenarios, their cell-center discretizations and the Euclidean
// ground cost between two discrete measures.
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace entsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned box [low_0, high_0] x ... x [low_{d-1}, high_{d-1}].
struct Box {
  std::vector<double> low;
  std::vector<double> high;

  int dim() const { return static_cast<int>(low.size()); }
  double width(int axis) const { return high[axis] - low[axis]; }
  double volume() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;
};

/// Euclidean distance between two boxes (per-axis interval gaps).
double box_distance(const Box& a, const Box& b);

/// Density on a box. Polynomials are sums of monomials in absolute
/// coordinates; tables hold node values of a regular grid spanning the box
/// (axis 0 fastest) and are interpolated multilinearly.
struct DensitySpec {
  enum class Kind { uniform, polynomial, tabulated };

  struct Term {
    double coeff = 0.0;
    std::vector<int> powers;
  };

  Kind kind = Kind::uniform;
  std::vector<Term> terms;
  std::vector<int> table_shape;
  std::vector<double> table_values;

  double evaluate(const Box& box, std::span<const double> x) const;
  void validate(int dim) const;
};

struct Scenario {
  std::string name;
  int dim = 0;
  Box source_domain;
  Box target_domain;
  DensitySpec source_density;
  DensitySpec target_density;
  double separation = 0.0;
  // Routed to a hand-built atomic instance instead of a grid.
  bool tied_discrete = false;
};

/// Builds a scenario and checks the standing assumptions (matching dims,
/// non-degenerate boxes, positive separation).
Scenario make_scenario(std::string name, Box source, Box target,
                       DensitySpec source_density = {},
                       DensitySpec target_density = {});

/// translated-squares-2d | translated-cubes-3d | segment-1d | tied-discrete
Scenario builtin_scenario(std::string_view name);

std::vector<std::string> builtin_scenario_names();

struct DiscreteMeasure {
  Matrix points;  // one point per row
  Vector weights;
  double cell_width = 0.0;

  int dim() const { return static_cast<int>(points.cols()); }
  Index size() const { return points.rows(); }
  std::span<const double> weight_span() const {
    return {weights.data(), static_cast<std::size_t>(weights.size())};
  }
};

/// Validating constructor: positive weights summing to one within 1e-12
/// after renormalization, positive cell width.
DiscreteMeasure make_measure(Matrix points, Vector weights, double cell_width);

struct GridSpec {
  enum class Quadrature { cell_center };

  std::vector<int> per_axis_counts;
  Quadrature quadrature = Quadrature::cell_center;

  /// A single count is broadcast to every axis.
  static GridSpec uniform(int dim, int count);
  Index total() const;
};

inline constexpr Index kMaxGridPoints = 100000;

DiscreteMeasure discretize_box(const Box& box, const DensitySpec& density,
                               const GridSpec& grid);

/// Cell-center quadrature of both marginals. Tied-discrete scenarios return
/// the hand-built instance and ignore the grid.
std::pair<DiscreteMeasure, DiscreteMeasure> discretize(const Scenario& scenario,
                                                       const GridSpec& grid);

/// Three sources and three targets where a collinear 2x2 block has tied
/// costs and the third pair is strictly preferred.
std::pair<DiscreteMeasure, DiscreteMeasure> tied_discrete_instance();

/// Nominal resolution assigned to atomic (non-grid) instances.
inline constexpr double kAtomicCellWidth = 1e-4;

Matrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace entsel
