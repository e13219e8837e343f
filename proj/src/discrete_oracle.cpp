#include "entsel/discrete_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace entsel {

namespace {

struct Arc {
  Index i;
  Index j;
};

// Flows of the basic solution on a spanning tree, by peeling leaves.
bool tree_flows(const std::vector<Arc>& tree, const Vector& mu, const Vector& nu, Matrix& plan) {
  const Index n = mu.size();
  const Index m = nu.size();
  std::vector<double> rest(static_cast<std::size_t>(n + m));
  for (Index i = 0; i < n; ++i) rest[i] = mu[i];
  for (Index j = 0; j < m; ++j) rest[n + j] = nu[j];
  std::vector<int> degree(static_cast<std::size_t>(n + m), 0);
  for (const auto& a : tree) {
    ++degree[a.i];
    ++degree[n + a.j];
  }
  std::vector<char> used(tree.size(), 0);
  plan.setZero(n, m);
  for (std::size_t step = 0; step < tree.size(); ++step) {
    std::size_t pick = tree.size();
    Index leaf = -1;
    for (std::size_t k = 0; k < tree.size() && pick == tree.size(); ++k) {
      if (used[k]) continue;
      if (degree[tree[k].i] == 1) {
        pick = k;
        leaf = tree[k].i;
      } else if (degree[n + tree[k].j] == 1) {
        pick = k;
        leaf = n + tree[k].j;
      }
    }
    if (pick == tree.size()) return false;
    const auto& a = tree[pick];
    const Index other = leaf == a.i ? n + a.j : a.i;
    const double flow = rest[leaf];
    plan(a.i, a.j) = flow;
    rest[leaf] = 0.0;
    rest[other] -= flow;
    used[pick] = 1;
    --degree[a.i];
    --degree[n + a.j];
  }
  return true;
}

bool spanning(const std::vector<Arc>& tree, Index n, Index m) {
  std::vector<Index> parent(static_cast<std::size_t>(n + m));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& a : tree) {
    const Index r1 = find(a.i);
    const Index r2 = find(n + a.j);
    if (r1 == r2) return false;
    parent[r1] = r2;
  }
  return true;
}

}  // namespace

OptimalFace enumerate_optimal_vertices(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const Matrix& cost, double cost_tol) {
  const Index n = mu.size();
  const Index m = nu.size();
  if (n > 4 || m > 4) throw Error("enumerate_optimal_vertices: limited to 4 x 4 instances");
  if (cost.rows() != n || cost.cols() != m) throw Error("enumerate_optimal_vertices: size mismatch");

  std::vector<Arc> arcs;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) arcs.push_back({i, j});
  }
  const std::size_t k = static_cast<std::size_t>(n + m - 1);
  std::vector<char> choose(arcs.size(), 0);
  std::fill(choose.begin(), choose.begin() + static_cast<std::ptrdiff_t>(k), 1);

  std::vector<Matrix> feasible;
  std::vector<double> costs;
  Matrix plan;
  do {
    std::vector<Arc> tree;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (choose[a]) tree.push_back(arcs[a]);
    }
    if (!spanning(tree, n, m) || !tree_flows(tree, mu.weights, nu.weights, plan)) continue;
    if (plan.minCoeff() < -1e-12) continue;
    plan = plan.cwiseMax(0.0);
    bool seen = false;
    for (const auto& v : feasible) {
      if ((v - plan).cwiseAbs().maxCoeff() < 1e-12) {
        seen = true;
        break;
      }
    }
    if (seen) continue;
    feasible.push_back(plan);
    costs.push_back((plan.array() * cost.array()).sum());
  } while (std::prev_permutation(choose.begin(), choose.end()));

  if (feasible.empty()) throw SolverError("enumerate_optimal_vertices: no feasible vertex");
  OptimalFace face;
  face.cost = *std::min_element(costs.begin(), costs.end());
  face.support = Matrix::Zero(n, m);
  for (std::size_t v = 0; v < feasible.size(); ++v) {
    if (costs[v] > face.cost + cost_tol) continue;
    face.vertices.push_back(feasible[v]);
    face.support = face.support.cwiseMax((feasible[v].array() > 1e-15).cast<double>().matrix());
  }
  return face;
}

Matrix max_entropy_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& mask,
                        double tol, int max_iter) {
  Matrix plan = mask.cwiseProduct(mu.weights * nu.weights.transpose());
  for (int it = 0; it < max_iter; ++it) {
    const Vector rows = plan.rowwise().sum();
    if ((rows.array() <= 0.0).any()) throw SolverError("max_entropy_plan: empty row in mask");
    plan = mu.weights.cwiseQuotient(rows).asDiagonal() * plan;
    const Vector cols = plan.colwise().sum().transpose();
    if ((cols.array() <= 0.0).any()) throw SolverError("max_entropy_plan: empty column in mask");
    plan = plan * nu.weights.cwiseQuotient(cols).asDiagonal();
    const double err = (plan.rowwise().sum() - mu.weights).cwiseAbs().sum();
    if (err <= tol) return plan;
  }
  throw SolverError("max_entropy_plan: scaling did not converge");
}

double total_variation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error("total_variation: size mismatch");
  return 0.5 * (a - b).cwiseAbs().sum();
}

}  // namespace entsel
