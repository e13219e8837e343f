// Exact discrete Monge-Kantorovich problem with Euclidean cost, its
// Kantorovich potentials and the 1-Lipschitz potential u.
//
// Sign convention used throughout the library: u = f_K on the source support
// and u = -g_K on the target support, so u(x) - u(y) <= |x - y| everywhere
// with equality on optimal pairs, u drops at unit rate from the upper end of
// a ray (in the source) to its lower end (in the target), and the rate
// function I(x, y) = |x - y| - u(x) + u(y) is non-negative.
#pragma once

#include <cstdint>
#include <span>

#include "entsel/instances.hpp"

namespace entsel {

struct Coupling {
  Matrix plan;  // rows = source points, cols = target points
  Vector row_marginal;
  Vector col_marginal;

  /// L-infinity violation of both marginal constraints.
  double marginal_violation() const;
  /// L1 distance of the column sums to col_marginal.
  double col_marginal_l1() const;
};

struct KantorovichSolution {
  Coupling coupling;
  double cost = 0.0;  // v0
  Vector f;           // f_K, per source point
  Vector g;           // g_K, per target point
  std::int64_t pivots = 0;

  double dual_value() const;
};

struct ExactOptions {
  std::int64_t max_pivots = 200'000'000;
  /// Replace the basic dual by the midpoint of the optimal dual face
  /// (see balance_duals); off returns the raw simplex basis duals.
  bool balance_duals = true;
};

/// Pre: sizes match, n*m <= 1e7, total masses agree within 1e-10.
KantorovichSolution solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const Matrix& cost, const ExactOptions& options = {});

/// Moves a dual optimal pair to a canonical point of the optimal dual face.
///
/// Support pairs split the points into components on which the potential is
/// fixed up to a per-component offset; the admissible offsets form a system
/// of difference constraints. The offset returned is the midpoint of its
/// largest and smallest solutions anchored at the component of source 0,
/// which reproduces u = -x_1 on translation instances instead of the staircase
/// a simplex basis produces.
void balance_duals(const Matrix& cost, const Matrix& plan, Vector& f, Vector& g);

/// McShane extension of u from both supports: u(z) = min_w u(w) + |z - w|.
class LipschitzPotential {
 public:
  LipschitzPotential() = default;
  LipschitzPotential(Matrix source_points, Vector u_source, Matrix target_points,
                     Vector u_target);

  const Vector& u_source() const { return u_source_; }
  const Vector& u_target() const { return u_target_; }
  const Matrix& source_points() const { return source_points_; }
  const Matrix& target_points() const { return target_points_; }

  double evaluate_at(const Vector& z) const;

 private:
  Matrix source_points_;
  Vector u_source_;
  Matrix target_points_;
  Vector u_target_;
};

LipschitzPotential extend_u(const KantorovichSolution& sol, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu);

/// I(x, y) = |x - y| - u(x) + u(y).
double rate_function(const LipschitzPotential& u, const Vector& x, const Vector& y);

/// Rate function on all support pairs, using stored support values.
Matrix rate_matrix(const LipschitzPotential& u, const Matrix& cost);

}  // namespace entsel
