#include "entsel/entropic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entsel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// f_i = -eps log sum_j exp((g_j - c_ij) / eps) nu_j, streamed column by
// column because the cost is column-major.
void update_rows(const Matrix& cost, const Vector& g, const Vector& log_nu, double eps, Vector& f,
                 Vector& row_max, Vector& row_sum) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  const double inv = 1.0 / eps;
  row_max.setConstant(n, kNegInf);
  for (Index j = 0; j < m; ++j) {
    const double shift = g[j] * inv + log_nu[j];
    const double* col = cost.col(j).data();
    for (Index i = 0; i < n; ++i) {
      const double v = shift - col[i] * inv;
      if (v > row_max[i]) row_max[i] = v;
    }
  }
  row_sum.setZero(n);
  for (Index j = 0; j < m; ++j) {
    const double shift = g[j] * inv + log_nu[j];
    const double* col = cost.col(j).data();
    for (Index i = 0; i < n; ++i) row_sum[i] += std::exp(shift - col[i] * inv - row_max[i]);
  }
  for (Index i = 0; i < n; ++i) f[i] = -eps * (row_max[i] + std::log(row_sum[i]));
}

// g_j = -eps log sum_i exp((f_i - c_ij) / eps) mu_i. Also returns the L1
// column-marginal error of the state (f, g_old) before the update.
double update_cols(const Matrix& cost, const Vector& f, const Vector& log_mu, const Vector& nu,
                   double eps, const Vector& g_old, Vector& g_new, Vector& scratch) {
  const Index n = cost.rows();
  const Index m = cost.cols();
  const double inv = 1.0 / eps;
  for (Index i = 0; i < n; ++i) scratch[i] = f[i] * inv + log_mu[i];
  double err = 0.0;
  for (Index j = 0; j < m; ++j) {
    const double* col = cost.col(j).data();
    double mx = kNegInf;
    for (Index i = 0; i < n; ++i) mx = std::max(mx, scratch[i] - col[i] * inv);
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += std::exp(scratch[i] - col[i] * inv - mx);
    g_new[j] = -eps * (mx + std::log(s));
    err += nu[j] * std::abs(std::expm1((g_old[j] - g_new[j]) * inv));
  }
  return err;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

std::pair<EntropicPotentials, SinkhornReport> sinkhorn(
    const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& cost, double eps,
    const SinkhornOptions& options, const std::optional<EntropicPotentials>& warm_start) {
  const Index n = mu.size();
  const Index m = nu.size();
  if (!(eps > 0.0)) throw Error("sinkhorn: eps must be positive");
  if (!(options.tol > 0.0)) throw Error("sinkhorn: tol must be positive");
  if (cost.rows() != n || cost.cols() != m) throw Error("sinkhorn: cost/measure size mismatch");

  EntropicPotentials pot;
  pot.eps = eps;
  pot.f = Vector::Zero(n);
  pot.g = Vector::Zero(m);
  if (warm_start) {
    if (warm_start->f.size() != n || warm_start->g.size() != m) {
      throw Error("sinkhorn: warm start dimensions do not match");
    }
    pot.f = warm_start->f;
    pot.g = warm_start->g;
  }

  const Vector log_mu = mu.weights.array().log();
  const Vector log_nu = nu.weights.array().log();
  Vector row_max(n);
  Vector row_sum(n);
  Vector scratch(n);
  Vector g_next(m);

  SinkhornReport report;
  update_rows(cost, pot.g, log_nu, eps, pot.f, row_max, row_sum);
  if (options.trace_dual) report.dual_trace.push_back(dual_value(pot, mu, nu, cost));

  for (;;) {
    const double err = update_cols(cost, pot.f, log_mu, nu.weights, eps, pot.g, g_next, scratch);
    if (!std::isfinite(err) || !all_finite(g_next)) {
      throw SolverError("sinkhorn: non-finite potentials at eps=" + std::to_string(eps) +
                        " after " + std::to_string(report.iterations) + " sweeps");
    }
    report.marginal_error = err;
    if (err <= options.tol) {
      report.converged = true;
      break;
    }
    if (report.iterations >= options.max_iter) break;
    pot.g.swap(g_next);
    update_rows(cost, pot.g, log_nu, eps, pot.f, row_max, row_sum);
    if (!all_finite(pot.f)) {
      throw SolverError("sinkhorn: non-finite potentials at eps=" + std::to_string(eps));
    }
    ++report.iterations;
    if (options.trace_dual) report.dual_trace.push_back(dual_value(pot, mu, nu, cost));
  }

  const double shift = pot.f.dot(mu.weights);
  pot.f.array() -= shift;
  pot.g.array() += shift;
  report.dual_value = dual_value(pot, mu, nu, cost);
  return {std::move(pot), std::move(report)};
}

Coupling coupling_from_potentials(const EntropicPotentials& pot, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, const Matrix& cost, double tol) {
  const Index n = mu.size();
  const Index m = nu.size();
  Coupling c;
  c.row_marginal = mu.weights;
  c.col_marginal = nu.weights;
  c.plan.resize(n, m);
  const double inv = 1.0 / pot.eps;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      c.plan(i, j) =
          std::exp((pot.f[i] + pot.g[j] - cost(i, j)) * inv) * mu.weights[i] * nu.weights[j];
    }
  }
  const double row_err = (c.plan.rowwise().sum() - c.row_marginal).cwiseAbs().sum();
  const double col_err = c.col_marginal_l1();
  if (std::max(row_err, col_err) > 10.0 * tol) {
    std::ostringstream os;
    os << "coupling_from_potentials: marginal L1 errors " << row_err << " (rows) and " << col_err
       << " (cols) exceed " << 10.0 * tol;
    throw SolverError(os.str());
  }
  return c;
}

double dual_value(const EntropicPotentials& pot, const DiscreteMeasure& mu,
                  const DiscreteMeasure& nu, const Matrix& cost) {
  const Index n = mu.size();
  const Index m = nu.size();
  const double inv = 1.0 / pot.eps;
  const Vector a = pot.f * inv + Vector(mu.weights.array().log());
  const Vector b = pot.g * inv + Vector(nu.weights.array().log());
  double mx = kNegInf;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) mx = std::max(mx, a[i] + b[j] - cost(i, j) * inv);
  }
  double s = 0.0;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) s += std::exp(a[i] + b[j] - cost(i, j) * inv - mx);
  }
  return pot.f.dot(mu.weights) + pot.g.dot(nu.weights) - pot.eps * (mx + std::log(s));
}

double relative_entropy(const Coupling& pi, const Matrix& reference) {
  double h = 0.0;
  for (Index j = 0; j < pi.plan.cols(); ++j) {
    for (Index i = 0; i < pi.plan.rows(); ++i) {
      const double p = pi.plan(i, j);
      if (p <= 0.0) continue;
      const double r = reference(i, j);
      if (r <= 0.0) return std::numeric_limits<double>::infinity();
      h += p * std::log(p / r);
    }
  }
  return h;
}

Matrix product_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return mu.weights * nu.weights.transpose();
}

double min_admissible_eps(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double h = std::max(mu.cell_width, nu.cell_width);
  return 4.0 * h * h;
}

SweepResult eps_sweep(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& cost,
                      const std::vector<double>& schedule, const SinkhornOptions& options) {
  if (schedule.empty()) throw ConfigError("eps_sweep: empty schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] < schedule[k - 1])) {
      throw ConfigError("eps_sweep: schedule must be strictly decreasing");
    }
  }
  const double floor_eps = min_admissible_eps(mu, nu);
  if (schedule.back() < floor_eps) {
    std::ostringstream os;
    os << "eps_sweep: eps " << schedule.back() << " is below the resolution guard; minimum "
       << "admissible eps is " << floor_eps;
    throw ConfigError(os.str());
  }

  SweepResult result;
  std::optional<EntropicPotentials> warm;
  for (double eps : schedule) {
    auto [pot, report] = sinkhorn(mu, nu, cost, eps, options, warm);
    if (!report.converged) {
      std::ostringstream os;
      os << "sinkhorn did not converge at eps=" << eps << " after " << report.iterations
         << " sweeps (marginal error " << report.marginal_error << ")";
      result.failure = os.str();
      break;
    }
    SweepEntry entry;
    entry.eps = eps;
    entry.coupling = coupling_from_potentials(pot, mu, nu, cost, options.tol);
    entry.dual_value = report.dual_value;
    entry.potentials = pot;
    entry.report = std::move(report);
    warm = std::move(pot);
    result.entries.push_back(std::move(entry));
  }
  return result;
}

}  // namespace entsel
