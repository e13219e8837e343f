// Desk-scale oracles for degenerate discrete transport: all optimal vertices
// of the transport polytope, and the entropy maximizer over their face.
#pragma once

#include <vector>

#include "entsel/instances.hpp"

namespace entsel {

struct OptimalFace {
  std::vector<Matrix> vertices;  // distinct optimal basic plans
  double cost = 0.0;
  Matrix support;  // 1 where some optimal vertex is positive, else 0
};

/// Enumerates basic feasible plans (spanning trees of the bipartite graph)
/// and keeps those within cost_tol of the minimum. Sizes up to 4 x 4.
OptimalFace enumerate_optimal_vertices(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const Matrix& cost, double cost_tol = 1e-9);

/// argmin H(pi | mu (x) nu) over couplings supported on mask, by alternating
/// row/column scaling of mask .* (mu nu^T).
Matrix max_entropy_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& mask,
                        double tol = 1e-14, int max_iter = 1000000);

/// Half the L1 distance.
double total_variation(const Matrix& a, const Matrix& b);

}  // namespace entsel
