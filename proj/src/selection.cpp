#include "entsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace entsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_kernel(double r, int dim, double c) {
  if (!(r > 0.0)) throw std::domain_error("kernel_F: r must be positive");
  if (dim < 1) throw std::domain_error("kernel_F: dimension must be at least 1");
  return 0.5 * (dim - 1) * std::log(2.0 * std::numbers::pi * r) + c * r;
}

void check_params(std::span<const double> params, const Vector& weights, const char* what) {
  if (params.empty()) throw Error(std::string(what) + ": empty parameter set");
  if (static_cast<Index>(params.size()) != weights.size()) {
    throw Error(std::string(what) + ": parameter/weight size mismatch");
  }
  if ((weights.array() <= 0.0).any()) throw Error(std::string(what) + ": weights must be positive");
  if (std::abs(weights.sum() - 1.0) > 1e-9) throw Error(std::string(what) + ": weights must sum to one");
}

}  // namespace

double kernel_F(double r, int dim, double c) { return std::exp(log_kernel(r, dim, c)); }

Matrix kernel_matrix(std::span<const double> source_params, std::span<const double> target_params,
                     int dim, double c) {
  Matrix k(static_cast<Index>(source_params.size()), static_cast<Index>(target_params.size()));
  for (Index j = 0; j < k.cols(); ++j) {
    for (Index i = 0; i < k.rows(); ++i) {
      k(i, j) = kernel_F(std::abs(source_params[i] - target_params[j]), dim, c);
    }
  }
  return k;
}

SchrodingerSolution solve_schrodinger_1d(std::span<const double> source_params,
                                         const Vector& source_weights,
                                         std::span<const double> target_params,
                                         const Vector& target_weights, int dim, double c,
                                         double tol, int max_iter) {
  check_params(source_params, source_weights, "solve_schrodinger_1d");
  check_params(target_params, target_weights, "solve_schrodinger_1d");
  const Index n = source_weights.size();
  const Index m = target_weights.size();

  Matrix logk(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      logk(i, j) = log_kernel(std::abs(source_params[i] - target_params[j]), dim, c);
    }
  }
  const double log_max = logk.maxCoeff();
  const Matrix k = (logk.array() - log_max).exp().matrix();

  // Matrix scaling: plan = diag(a mu) K diag(b nu).
  Vector a = Vector::Ones(n);
  Vector b = Vector::Ones(m);
  SchrodingerSolution sol;
  for (;;) {
    b = (k.transpose() * a.cwiseProduct(source_weights)).cwiseInverse();
    const Vector row = a.cwiseProduct(k * b.cwiseProduct(target_weights));
    const double err = (row - Vector::Ones(n)).cwiseProduct(source_weights).cwiseAbs().sum();
    if (!std::isfinite(err)) throw SolverError("solve_schrodinger_1d: scaling diverged");
    if (err <= tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;
    a = a.cwiseQuotient(row);
    ++sol.iterations;
  }

  sol.source_params.assign(source_params.begin(), source_params.end());
  sol.target_params.assign(target_params.begin(), target_params.end());
  sol.source_weights = source_weights;
  sol.target_weights = target_weights;
  sol.dim = dim;
  sol.c = c;
  sol.plan = a.cwiseProduct(source_weights).asDiagonal() * k *
             b.cwiseProduct(target_weights).asDiagonal();
  sol.ff = a.array().log() - log_max;
  sol.gg = b.array().log();
  const double shift = sol.ff.dot(source_weights);
  sol.ff.array() -= shift;
  sol.gg.array() += shift;
  sol.residual = std::max(
      (sol.plan.rowwise().sum() - source_weights).cwiseAbs().maxCoeff(),
      (sol.plan.colwise().sum().transpose() - target_weights).cwiseAbs().maxCoeff());
  return sol;
}

SchrodingerSolution solve_schrodinger_1d(const RestrictedMeasure& mu_r,
                                         const RestrictedMeasure& nu_r, int dim, double c,
                                         double tol, int max_iter) {
  return solve_schrodinger_1d(mu_r.params, mu_r.weights, nu_r.params, nu_r.weights, dim, c, tol,
                              max_iter);
}

double schrodinger_objective(const Matrix& plan, std::span<const double> source_params,
                             const Vector& source_weights, std::span<const double> target_params,
                             const Vector& target_weights, int dim, double c) {
  double h = 0.0;
  for (Index j = 0; j < plan.cols(); ++j) {
    for (Index i = 0; i < plan.rows(); ++i) {
      const double p = plan(i, j);
      if (p <= 0.0) continue;
      const double ref = kernel_F(std::abs(source_params[i] - target_params[j]), dim, c) *
                         source_weights[i] * target_weights[j];
      h += p * std::log(p / ref);
    }
  }
  return h;
}

LogDensityFit fit_log_density(std::span<const double> source_params, const Vector& source_weights,
                              std::span<const double> target_params, const Vector& target_weights,
                              const Matrix& plan, int dim) {
  const Index n = plan.rows();
  const Index m = plan.cols();
  std::vector<std::pair<Index, Index>> pairs;
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double r = std::abs(source_params[i] - target_params[j]);
      if (plan(i, j) > std::numeric_limits<double>::min() && r > 0.0) pairs.emplace_back(i, j);
    }
  }
  LogDensityFit fit;
  fit.pairs = static_cast<Index>(pairs.size());
  if (pairs.size() < 2) throw Error("fit_log_density: fewer than two support pairs");

  const Index p = fit.pairs;
  Matrix ind = Matrix::Zero(p, n + m);
  Vector y(p);
  Vector r(p);
  for (Index k = 0; k < p; ++k) {
    const auto [i, j] = pairs[static_cast<std::size_t>(k)];
    r[k] = std::abs(source_params[i] - target_params[j]);
    y[k] = std::log(plan(i, j) / (source_weights[i] * target_weights[j])) -
           0.5 * (dim - 1) * std::log(2.0 * std::numbers::pi * r[k]);
    ind(k, i) = 1.0;
    ind(k, n + j) = 1.0;
  }

  // Partial out the additive part, then regress on what is left of r.
  const Eigen::CompleteOrthogonalDecomposition<Matrix> qr(ind);
  const Vector r_perp = r - ind * qr.solve(r);
  Vector y_perp = y - ind * qr.solve(y);
  fit.identifiable = r_perp.norm() > 1e-8 * std::max(1.0, r.norm());
  if (fit.identifiable) {
    fit.c = r_perp.dot(y_perp) / r_perp.squaredNorm();
    y_perp -= fit.c * r_perp;
  } else {
    fit.c = kNaN;
  }
  const double ss_res = y_perp.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot <= 1e-24 * static_cast<double>(p) ? 1.0 : 1.0 - ss_res / ss_tot;
  fit.rms_residual = std::sqrt(ss_res / static_cast<double>(p));
  return fit;
}

namespace {

Vector c_transform_gradient(const Vector& dual, const Vector& weights, const Matrix& points,
                            double eps, const Vector& z) {
  const Index k = points.rows();
  Vector dist(k);
  Vector logw(k);
  for (Index j = 0; j < k; ++j) {
    dist[j] = (z - points.row(j).transpose()).norm();
    if (dist[j] == 0.0) throw Error("entropic gradient: evaluation point lies on the other support");
    logw[j] = (dual[j] - dist[j]) / eps + std::log(weights[j]);
  }
  const double mx = logw.maxCoeff();
  Vector grad = Vector::Zero(z.size());
  double total = 0.0;
  for (Index j = 0; j < k; ++j) {
    const double w = std::exp(logw[j] - mx);
    total += w;
    grad += w * (z - points.row(j).transpose()) / dist[j];
  }
  return grad / total;
}

}  // namespace

Vector entropic_gradient_source(const EntropicPotentials& pot, const DiscreteMeasure& nu,
                                const Vector& x) {
  return c_transform_gradient(pot.g, nu.weights, nu.points, pot.eps, x);
}

Vector entropic_gradient_target(const EntropicPotentials& pot, const DiscreteMeasure& mu,
                                const Vector& y) {
  return c_transform_gradient(pot.f, mu.weights, mu.points, pot.eps, y);
}

Matrix orthogonal_complement(const Vector& direction) {
  const Index d = direction.size();
  if (d == 2) {
    Matrix out(2, 1);
    out << -direction[1], direction[0];
    return out;
  }
  // Gram-Schmidt on the coordinate axes least aligned with the direction.
  std::vector<Index> axes(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) axes[static_cast<std::size_t>(k)] = k;
  std::stable_sort(axes.begin(), axes.end(), [&](Index a, Index b) {
    return std::abs(direction[a]) < std::abs(direction[b]);
  });
  Matrix out(d, d - 1);
  for (Index c = 0; c < d - 1; ++c) {
    Vector v = Vector::Unit(d, axes[static_cast<std::size_t>(c)]);
    v -= v.dot(direction) * direction;
    for (Index k = 0; k < c; ++k) v -= v.dot(out.col(k)) * out.col(k);
    out.col(c) = v.normalized();
  }
  return out;
}

DerivativeProbe probe_derivatives(const EntropicPotentials& pot, const TransportRay& ray,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double guard_cells) {
  const Matrix basis = orthogonal_complement(ray.direction);
  DerivativeProbe probe;
  probe.eps = pot.eps;

  auto interior = [&](const std::vector<Index>& idx, const DiscreteMeasure& m) {
    std::vector<double> t;
    for (Index k : idx) t.push_back(project_to_ray(ray, m.points.row(k).transpose()).t);
    std::vector<Index> keep;
    if (t.empty()) return keep;
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    const double guard = guard_cells * m.cell_width;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (t[k] >= *lo + guard - 1e-12 && t[k] <= *hi - guard + 1e-12) keep.push_back(idx[k]);
    }
    return keep;
  };
  const auto src = interior(ray.source_indices, mu);
  const auto tgt = interior(ray.target_indices, nu);
  if (src.size() < 3 || tgt.size() < 3) {
    throw Error("probe_derivatives: fewer than three interior points on a side of the ray");
  }
  probe.source_points = static_cast<Index>(src.size());
  probe.target_points = static_cast<Index>(tgt.size());
  if (basis.cols() == 0) return probe;

  double sf = 0.0;
  for (Index i : src) {
    const Vector grad = entropic_gradient_source(pot, nu, mu.points.row(i).transpose());
    sf += (basis.transpose() * grad).mean();
  }
  double sg = 0.0;
  for (Index j : tgt) {
    const Vector grad = entropic_gradient_target(pot, mu, nu.points.row(j).transpose());
    sg += (basis.transpose() * grad).mean();
  }
  probe.slope_f = sf / static_cast<double>(src.size());
  probe.slope_g = sg / static_cast<double>(tgt.size());
  return probe;
}

CEstimate estimate_c(const SweepResult& sweep, const TransportRay& ray, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu, const CEstimateOptions& options) {
  if (sweep.entries.size() < 2) throw Error("estimate_c: the sweep needs at least two eps values");
  const int dim = mu.dim();
  CEstimate est;

  const std::size_t last = sweep.entries.size() - 1;
  for (std::size_t k : {last - 1, last}) {
    est.probes.push_back(
        probe_derivatives(sweep.entries[k].potentials, ray, mu, nu, options.guard_cells));
  }
  if (dim >= 2) {
    est.e1 = 0.0;
    est.e1_scaled = 0.0;
    for (const auto& p : est.probes) {
      est.e1 += 0.25 * (p.slope_f - p.slope_g);
      est.e1_scaled += 0.25 * (p.slope_f - p.slope_g) / std::sqrt(p.eps);
    }
  } else {
    est.e1 = kNaN;
    est.e1_scaled = kNaN;
  }

  const double h = std::max(mu.cell_width, nu.cell_width);
  const double delta = options.delta > 0.0 ? options.delta : 4.0 * h;
  const auto rc = restrict_coupling(sweep.entries[last].coupling, ray, delta, mu, nu);
  const Vector rows = rc.plan.rowwise().sum();
  const Vector cols = rc.plan.colwise().sum().transpose();
  const auto fit =
      fit_log_density(rc.source_params, rows, rc.target_params, cols, rc.plan, dim);
  est.e2_identifiable = fit.identifiable;
  est.e2 = fit.c;
  est.r_squared = fit.r_squared;
  est.discrepancy =
      fit.identifiable && std::isfinite(est.e1) ? std::abs(est.e1 - est.e2) : kNaN;

  if (fit.identifiable) {
    est.c_hat = est.e2;
    est.method = "regression";
  } else if (std::isfinite(est.e1)) {
    est.c_hat = est.e1;
    est.method = "derivative";
  } else {
    est.c_hat = 0.0;
    est.method = "none";
  }
  return est;
}

double predicted_cylinder_mass(const SchrodingerSolution& sol, double source_lo, double source_hi,
                               double target_lo, double target_hi, double omega) {
  if (!(omega > 0.0)) throw Error("predicted_cylinder_mass: omega must be positive");
  if (source_lo > source_hi || target_lo > target_hi) return 0.0;
  double mass = 0.0;
  for (Index j = 0; j < sol.plan.cols(); ++j) {
    const double s = sol.target_params[j];
    if (s < target_lo || s > target_hi) continue;
    for (Index i = 0; i < sol.plan.rows(); ++i) {
      const double t = sol.source_params[i];
      if (t >= source_lo && t <= source_hi) mass += sol.plan(i, j);
    }
  }
  return std::pow(omega, sol.dim - 1) * mass;
}

std::pair<double, double> middle_half(const std::vector<double>& params) {
  if (params.empty()) throw Error("middle_half: empty parameter set");
  const double lo = params.front();
  const double hi = params.back();
  const double q = 0.25 * (hi - lo);
  return {lo + q, hi - q};
}

}  // namespace entsel
