#include "entsel/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "entsel/network_simplex.hpp"

namespace entsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Dense Dijkstra on a complete digraph with non-negative weights;
// weight(from, to).
template <class Weight>
std::vector<double> dense_shortest_paths(std::size_t n, std::size_t root, Weight weight) {
  std::vector<double> dist(n, kInf);
  std::vector<char> done(n, 0);
  dist[root] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (!done[k] && (best == n || dist[k] < dist[best])) best = k;
    }
    if (best == n || dist[best] == kInf) break;
    done[best] = 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (done[k]) continue;
      const double cand = dist[best] + weight(best, k);
      if (cand < dist[k]) dist[k] = cand;
    }
  }
  return dist;
}

}  // namespace

double Coupling::marginal_violation() const {
  const double rows = (plan.rowwise().sum() - row_marginal).cwiseAbs().maxCoeff();
  const double cols = (plan.colwise().sum().transpose() - col_marginal).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

double Coupling::col_marginal_l1() const {
  return (plan.colwise().sum().transpose() - col_marginal).cwiseAbs().sum();
}

double KantorovichSolution::dual_value() const {
  return f.dot(coupling.row_marginal) + g.dot(coupling.col_marginal);
}

void balance_duals(const Matrix& cost, const Matrix& plan, Vector& f, Vector& g) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  const std::size_t nodes = static_cast<std::size_t>(n + m);

  DisjointSets sets(nodes);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (plan(i, j) > 0.0) sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(n + j));
    }
  }
  std::vector<std::size_t> comp(nodes);
  std::vector<std::size_t> label(nodes, nodes);
  std::size_t count = 0;
  for (std::size_t v = 0; v < nodes; ++v) {
    const std::size_t r = sets.find(v);
    if (label[r] == nodes) label[r] = count++;
    comp[v] = label[r];
  }
  if (count <= 1) return;

  // slack[k][l]: smallest I(x, y) with x in component k and y in component l.
  std::vector<double> slack(count * count, kInf);
  for (Index j = 0; j < m; ++j) {
    const std::size_t l = comp[static_cast<std::size_t>(n + j)];
    for (Index i = 0; i < n; ++i) {
      const std::size_t k = comp[static_cast<std::size_t>(i)];
      const double s = std::max(0.0, cost(i, j) - f[i] - g[j]);
      double& w = slack[k * count + l];
      if (s < w) w = s;
    }
  }

  // Offsets obey offset[k] - offset[l] <= slack[k][l].
  const std::size_t anchor = comp[0];
  const auto upper = dense_shortest_paths(
      count, anchor, [&](std::size_t from, std::size_t to) { return slack[to * count + from]; });
  const auto lower = dense_shortest_paths(
      count, anchor, [&](std::size_t from, std::size_t to) { return slack[from * count + to]; });

  std::vector<double> offset(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const bool has_up = std::isfinite(upper[k]);
    const bool has_low = std::isfinite(lower[k]);
    if (has_up && has_low) {
      offset[k] = 0.5 * (upper[k] - lower[k]);
    } else if (has_up) {
      offset[k] = upper[k];
    } else if (has_low) {
      offset[k] = -lower[k];
    }
  }
  for (Index i = 0; i < n; ++i) f[i] += offset[comp[static_cast<std::size_t>(i)]];
  for (Index j = 0; j < m; ++j) g[j] -= offset[comp[static_cast<std::size_t>(n + j)]];
}

KantorovichSolution solve_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const Matrix& cost, const ExactOptions& options) {
  const Index n = mu.size();
  const Index m = nu.size();
  if (cost.rows() != n || cost.cols() != m) {
    throw Error("solve_exact: cost matrix is " + std::to_string(cost.rows()) + "x" +
                std::to_string(cost.cols()) + ", measures are " + std::to_string(n) + "x" +
                std::to_string(m));
  }
  if (static_cast<double>(n) * static_cast<double>(m) > 1e7) {
    throw Error("solve_exact: n*m exceeds 1e7");
  }
  const double mass_gap = std::abs(mu.weights.sum() - nu.weights.sum());
  if (mass_gap > 1e-10) {
    throw SolverError("solve_exact: infeasible marginals, total masses differ by " +
                      std::to_string(mass_gap));
  }

  TransportSimplex simplex(mu.weight_span(), nu.weight_span(), cost);
  const auto status = simplex.run(options.max_pivots);
  if (status == TransportSimplex::Status::pivot_limit) {
    throw SolverError("solve_exact: pivot limit " + std::to_string(options.max_pivots) +
                      " reached; artificial flow residual " +
                      std::to_string(simplex.artificial_flow()));
  }
  if (status == TransportSimplex::Status::infeasible || simplex.artificial_flow() > 1e-12) {
    throw SolverError("solve_exact: infeasible, artificial flow residual " +
                      std::to_string(simplex.artificial_flow()));
  }

  KantorovichSolution sol;
  sol.pivots = simplex.pivots();
  sol.coupling.plan = simplex.plan();
  sol.coupling.row_marginal = mu.weights;
  sol.coupling.col_marginal = nu.weights;
  sol.cost = (sol.coupling.plan.array() * cost.array()).sum();

  simplex.duals(sol.f, sol.g);
  if (options.balance_duals) balance_duals(cost, sol.coupling.plan, sol.f, sol.g);

  // c-transform of g: exact feasibility, unchanged on rows with mass.
  for (Index i = 0; i < n; ++i) sol.f[i] = (cost.row(i).transpose() - sol.g).minCoeff();

  const double shift = sol.f.dot(mu.weights);
  sol.f.array() -= shift;
  sol.g.array() += shift;
  return sol;
}

LipschitzPotential::LipschitzPotential(Matrix source_points, Vector u_source, Matrix target_points,
                                       Vector u_target)
    : source_points_(std::move(source_points)),
      u_source_(std::move(u_source)),
      target_points_(std::move(target_points)),
      u_target_(std::move(u_target)) {}

double LipschitzPotential::evaluate_at(const Vector& z) const {
  double best = kInf;
  auto scan = [&](const Matrix& pts, const Vector& vals) {
    for (Index k = 0; k < pts.rows(); ++k) {
      const double d = (pts.row(k).transpose() - z).norm();
      if (d == 0.0) return vals[k];
      best = std::min(best, vals[k] + d);
    }
    return kInf;
  };
  if (const double v = scan(source_points_, u_source_); v != kInf) return v;
  if (const double v = scan(target_points_, u_target_); v != kInf) return v;
  return best;
}

LipschitzPotential extend_u(const KantorovichSolution& sol, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu) {
  return LipschitzPotential(mu.points, sol.f, nu.points, -sol.g);
}

double rate_function(const LipschitzPotential& u, const Vector& x, const Vector& y) {
  return (x - y).norm() - u.evaluate_at(x) + u.evaluate_at(y);
}

Matrix rate_matrix(const LipschitzPotential& u, const Matrix& cost) {
  Matrix out(cost.rows(), cost.cols());
  for (Index j = 0; j < cost.cols(); ++j) {
    for (Index i = 0; i < cost.rows(); ++i) {
      out(i, j) = cost(i, j) - u.u_source()[i] + u.u_target()[j];
    }
  }
  return out;
}

}  // namespace entsel
