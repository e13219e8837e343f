#include "entsel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "entsel/discrete_oracle.hpp"
#include "entsel/selection.hpp"

namespace entsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return format_number(v); }

std::string point_text(const Vector& v) {
  std::string s;
  for (Index k = 0; k < v.size(); ++k) s += (k ? ";" : "") + fmt(v[k]);
  return s;
}

Cell num(double v) { return v; }
Cell count(std::size_t v) { return static_cast<std::int64_t>(v); }

// Sweep entries belonging to the cost-gap schedule.
std::vector<const SweepEntry*> gap_entries(const Pipeline& p) {
  std::vector<const SweepEntry*> out;
  for (const auto& e : p.sweep.entries) {
    if (std::find(p.config.eps_schedule.begin(), p.config.eps_schedule.end(), e.eps) !=
        p.config.eps_schedule.end()) {
      out.push_back(&e);
    }
  }
  return out;
}

}  // namespace

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (!(sxx > 0.0)) throw Error("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

Pipeline build_pipeline(const ExperimentConfig& config, SweepScope scope) {
  validate(config);
  Pipeline p;
  p.config = config;
  p.instance = instance_hash(config);
  std::tie(p.mu, p.nu) = discretize(config.scenario, config.grid_spec());
  p.cost = cost_matrix(p.mu, p.nu);
  p.exact = solve_exact(p.mu, p.nu, p.cost);
  p.u = extend_u(p.exact, p.mu, p.nu);
  RayOptions ro;
  ro.ray_tol = config.rays.ray_tol;
  ro.transverse_tol = config.rays.transverse_tol_cells * std::max(p.mu.cell_width, p.nu.cell_width);
  p.rays = extract_rays(p.exact, p.u, p.mu, p.nu, ro);
  p.central = central_ray(p.rays, config.scenario.source_domain);
  if (scope == SweepScope::cost_gap) {
    p.sweep = eps_sweep(p.mu, p.nu, p.cost, config.eps_schedule, config.sinkhorn);
  } else if (scope == SweepScope::full) {
    p.sweep = eps_sweep(p.mu, p.nu, p.cost, config.selection_schedule(), config.sinkhorn);
  }
  return p;
}

ExperimentResult run_duality_suite(const ExperimentConfig& config) {
  const auto& sc = config.duality_suite;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> size_dist(2, sc.max_points);
  std::uniform_int_distribution<int> dim_dist(1, sc.max_dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Table t;
  t.name = "duality_suite";
  t.columns = {"instance", "n",          "m",           "dim",        "primal",
               "dual",     "duality_gap", "min_slack",  "max_marginal_error",
               "eps_monotone", "min_gap_to_v0"};
  bool ok = true;
  double worst_gap = 0.0;
  double worst_err = 0.0;
  for (int k = 0; k < sc.instances; ++k) {
    const int n = size_dist(rng);
    const int m = size_dist(rng);
    const int d = dim_dist(rng);
    Matrix xs(n, d);
    Matrix ys(m, d);
    for (Index i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) xs(i, a) = unit(rng);
    }
    for (Index j = 0; j < m; ++j) {
      for (int a = 0; a < d; ++a) ys(j, a) = unit(rng) + (a == 0 ? 0.5 : 0.0);
    }
    Vector wx(n);
    Vector wy(m);
    for (Index i = 0; i < n; ++i) wx[i] = 0.5 + unit(rng);
    for (Index j = 0; j < m; ++j) wy[j] = 0.5 + unit(rng);
    const auto mu = make_measure(xs, wx, kAtomicCellWidth);
    const auto nu = make_measure(ys, wy, kAtomicCellWidth);
    const Matrix c = cost_matrix(mu, nu);
    const auto sol = solve_exact(mu, nu, c);
    const double dual = sol.dual_value();
    double min_slack = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < n; ++i) min_slack = std::min(min_slack, c(i, j) - sol.f[i] - sol.g[j]);
    }
    const auto sweep = eps_sweep(mu, nu, c, sc.eps, config.sinkhorn);
    double max_err = 0.0;
    bool monotone = sweep.entries.size() == sc.eps.size();
    double min_to_v0 = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < sweep.entries.size(); ++e) {
      const auto& entry = sweep.entries[e];
      max_err = std::max(max_err, entry.report.marginal_error);
      min_to_v0 = std::min(min_to_v0, entry.dual_value - sol.cost);
      // v_eps is non-decreasing in eps; the schedule decreases.
      if (e > 0 && entry.dual_value > sweep.entries[e - 1].dual_value + 1e-12) monotone = false;
    }
    const double gap = std::abs(sol.cost - dual);
    worst_gap = std::max(worst_gap, gap);
    worst_err = std::max(worst_err, max_err);
    ok = ok && gap <= 1e-8 && min_slack >= -1e-12 && max_err <= 1e-9 && monotone &&
         min_to_v0 >= -1e-12;
    std::ostringstream id;
    id << "suite-" << config.seed << "-" << k;
    t.add_row({hex64(fnv1a(id.str())), count(n), count(m), count(d), num(sol.cost), num(dual),
               num(gap), num(min_slack), num(max_err), monotone, num(min_to_v0)});
  }
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  r.checks.push_back({1, "duality & feasibility suite", ok,
                      "max |primal - dual| = " + fmt(worst_gap) +
                          ", max entropic marginal error = " + fmt(worst_err)});
  return r;
}

ExperimentResult run_cost_gap(const Pipeline& p) {
  ExperimentResult r;
  const auto entries = gap_entries(p);
  const double v0 = p.exact.cost;
  const int d = p.mu.dim();
  const double target = 0.5 * (d - 1);

  Table t;
  t.name = "cost_gap";
  t.columns = {"instance", "eps", "v_eps", "v0", "gap", "eps_log_inv_eps", "normalized_gap"};
  bool nonneg = true;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto* e : entries) {
    const double x = e->eps * std::log(1.0 / e->eps);
    const double gap = e->dual_value - v0;
    nonneg = nonneg && gap >= 0.0;
    xs.push_back(x);
    ys.push_back(gap);
    t.add_row({p.instance, num(e->eps), num(e->dual_value), num(v0), num(gap), num(x),
               num(gap / x)});
  }
  r.tables.push_back(std::move(t));

  const bool complete = entries.size() == p.config.eps_schedule.size();
  if (!complete) {
    r.notes.push_back("cost gap: sweep incomplete: " + p.sweep.failure.value_or("unknown failure"));
  }
  if (xs.size() < 3) {
    r.checks.push_back({2, "cost-gap slope", false, "fewer than three converged eps values"});
    return r;
  }

  // Fit over the three smallest eps.
  const std::vector<double> fx(xs.end() - 3, xs.end());
  const std::vector<double> fy(ys.end() - 3, ys.end());
  const LineFit fit = fit_line(fx, fy);
  // Diagnostic: gap / eps against log(1/eps) over the same window.
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = entries.size() - 3; k < entries.size(); ++k) {
    lx.push_back(std::log(1.0 / entries[k]->eps));
    ly.push_back(ys[k] / entries[k]->eps);
  }
  const LineFit alt = fit_line(lx, ly);
  const double ratio_min = ys.back() / xs.back();

  Table f;
  f.name = "cost_gap_fit";
  f.columns = {"instance", "eps_min", "eps_max", "slope", "intercept", "target_slope",
               "gap_over_eps_log_inv_eps_at_eps_min", "slope_of_gap_over_eps_vs_log_inv_eps"};
  f.add_row({p.instance, num(entries.back()->eps), num(entries[entries.size() - 3]->eps),
             num(fit.slope), num(fit.intercept), num(target), num(ratio_min), num(alt.slope)});
  r.tables.push_back(std::move(f));

  bool pass = nonneg && complete;
  std::string detail;
  if (d >= 2) {
    const double lo = 0.7 * target;
    const double hi = 1.5 * target;
    pass = pass && fit.slope >= lo && fit.slope <= hi && ratio_min >= lo;
    detail = "slope " + fmt(fit.slope) + " (window [" + fmt(lo) + ", " + fmt(hi) +
             "]), gap / (eps log 1/eps) at eps_min " + fmt(ratio_min) + " (needs >= " + fmt(lo) +
             ")";
  } else {
    detail = "d = 1: lower bound degenerates; slope " + fmt(fit.slope) + ", gaps non-negative: " +
             (nonneg ? "yes" : "no");
  }
  r.checks.push_back({2, "cost-gap slope", pass, detail});
  return r;
}

ExperimentResult run_concentration(const Pipeline& p) {
  ExperimentResult r;
  const double theta = p.config.theta;
  const Matrix rate = rate_matrix(p.u, p.cost);
  auto off_ray = [&](const Matrix& plan) {
    double s = 0.0;
    for (Index j = 0; j < plan.cols(); ++j) {
      for (Index i = 0; i < plan.rows(); ++i) {
        if (rate(i, j) > theta) s += plan(i, j);
      }
    }
    return s;
  };
  const double exact_off = off_ray(p.exact.coupling.plan);

  Table t;
  t.name = "concentration";
  t.columns = {"instance", "eps", "inv_eps", "off_ray_mass", "log_off_ray_mass"};
  std::vector<double> xs;
  std::vector<double> ys;
  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto* e : gap_entries(p)) {
    const double m = off_ray(e->coupling.plan);
    if (m > previous + 1e-10) monotone = false;
    previous = m;
    t.add_row({p.instance, num(e->eps), num(1.0 / e->eps), num(m),
               num(m > 0.0 ? std::log(m) : -std::numeric_limits<double>::infinity())});
    if (m > 0.0) {
      xs.push_back(1.0 / e->eps);
      ys.push_back(std::log(m));
    }
  }
  r.tables.push_back(std::move(t));
  if (!monotone) r.notes.push_back("concentration: off-ray mass not monotone in eps (not asserted)");

  const bool vacuous = xs.size() < 2;
  const double rate_fit = vacuous ? kNaN : -fit_line(xs, ys).slope;
  Table f;
  f.name = "concentration_fit";
  f.columns = {"instance", "theta", "fitted_rate", "required_rate", "exact_off_ray_mass",
               "monotone", "vacuous"};
  f.add_row({p.instance, num(theta), num(rate_fit), num(0.5 * theta), num(exact_off), monotone,
             vacuous});
  r.tables.push_back(std::move(f));
  const bool pass = exact_off <= 1e-8 && (vacuous || rate_fit >= 0.5 * theta);
  r.checks.push_back({3, "support concentration", pass,
                      "fitted rate " + fmt(rate_fit) + " (needs >= " + fmt(0.5 * theta) +
                          "), exact off-ray mass " + fmt(exact_off) +
                          (vacuous ? " [vacuous: nothing to fit]" : "")});
  return r;
}

ExperimentResult run_selection(const Pipeline& p) {
  ExperimentResult r;
  const auto& cfg = p.config.selection;
  const double h = std::max(p.mu.cell_width, p.nu.cell_width);
  std::vector<double> deltas;
  for (double c : p.config.rays.delta_cells) deltas.push_back(c * h);
  const double coupling_delta = cfg.coupling_delta_cells * h;
  const int d = p.mu.dim();

  Table t;
  t.name = "selection";
  t.columns = {"instance", "ray", "eps", "tv", "c_used", "c_hat", "c_method", "marginal_l1"};
  Table cyl;
  cyl.name = "cylinder_mass";
  cyl.columns = {"instance", "ray", "eps", "omega", "predicted_ratio", "observed_ratio",
                 "relative_error"};

  std::vector<double> central_tv;
  double worst_cyl = 0.0;
  bool cyl_done = false;
  for (std::size_t ray_id = 0; ray_id < p.rays.rays.size(); ++ray_id) {
    const auto& ray = p.rays.rays[ray_id];
    try {
      const auto mu_r = restrict_measure(p.mu, ray, RaySide::source, deltas);
      const auto nu_r = restrict_measure(p.nu, ray, RaySide::target, deltas);
      double c_hat = kNaN;
      std::string method = "unavailable";
      try {
        const auto est = estimate_c(p.sweep, ray, p.mu, p.nu,
                                    CEstimateOptions{coupling_delta, cfg.guard_cells});
        c_hat = est.c_hat;
        method = est.method;
      } catch (const Error& e) {
        method = std::string("unavailable: ") + e.what();
      }
      const double c_used = cfg.estimate_c && std::isfinite(c_hat) ? c_hat : cfg.c_value;
      const auto limit = solve_schrodinger_1d(mu_r, nu_r, d, c_used);
      for (std::size_t k = 0; k < p.sweep.entries.size(); ++k) {
        const auto& e = p.sweep.entries[k];
        const auto rc = restrict_coupling(e.coupling, ray, coupling_delta, p.mu, p.nu);
        const double tv = total_variation(rc.plan, limit.plan);
        const double marg = (rc.plan.rowwise().sum() - mu_r.weights).cwiseAbs().sum() +
                            (rc.plan.colwise().sum().transpose() - nu_r.weights).cwiseAbs().sum();
        t.add_row({p.instance, count(ray_id), num(e.eps), num(tv), num(c_used), num(c_hat), method,
                   num(marg)});
        if (ray_id == p.central) central_tv.push_back(tv);
      }
      if (ray_id == p.central && !p.sweep.entries.empty()) {
        const auto& e = p.sweep.entries.back();
        const auto [slo, shi] = middle_half(mu_r.params);
        const auto [tlo, thi] = middle_half(nu_r.params);
        for (double oc : cfg.omega_cells) {
          const double omega = oc * h;
          const double predicted =
              predicted_cylinder_mass(limit, slo, shi, tlo, thi, omega) /
              predicted_cylinder_mass(limit, -HUGE_VAL, HUGE_VAL, -HUGE_VAL, HUGE_VAL, omega);
          const auto rc = restrict_coupling(e.coupling, ray, omega, p.mu, p.nu);
          double observed = 0.0;
          for (Index j = 0; j < rc.plan.cols(); ++j) {
            if (rc.target_params[j] < tlo || rc.target_params[j] > thi) continue;
            for (Index i = 0; i < rc.plan.rows(); ++i) {
              if (rc.source_params[i] >= slo && rc.source_params[i] <= shi) observed += rc.plan(i, j);
            }
          }
          const double rel = std::abs(observed / predicted - 1.0);
          worst_cyl = std::max(worst_cyl, rel);
          cyl_done = true;
          cyl.add_row({p.instance, count(ray_id), num(e.eps), num(omega), num(predicted),
                       num(observed), num(rel)});
        }
      }
    } catch (const Error& e) {
      r.notes.push_back("selection: ray " + std::to_string(ray_id) + " skipped: " + e.what());
    }
  }
  r.tables.push_back(std::move(t));
  r.tables.push_back(std::move(cyl));

  bool pass = central_tv.size() >= 3 && cyl_done && worst_cyl <= 0.05;
  std::string detail = "central ray " + std::to_string(p.central);
  if (central_tv.size() >= 3) {
    const std::size_t n = central_tv.size();
    const bool decreasing = central_tv[n - 1] < central_tv[n - 2] && central_tv[n - 2] < central_tv[n - 3];
    pass = pass && decreasing && central_tv.back() <= 0.05;
    detail += ": TV over last three eps " + fmt(central_tv[n - 3]) + ", " + fmt(central_tv[n - 2]) +
              ", " + fmt(central_tv[n - 1]) + (decreasing ? " (strictly decreasing)" : " (NOT decreasing)") +
              "; worst cylinder-mass ratio error " + fmt(worst_cyl);
  } else {
    detail += ": fewer than three converged eps values";
  }
  r.checks.push_back({4, "selection principle", pass, detail});
  return r;
}

ExperimentResult run_schrodinger_check(const ExperimentConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int dim = 2;
  const double c = 0.0;
  const std::vector<double> tp{0.0, 0.5, 1.0};
  const std::vector<double> sp{2.0, 2.5, 3.0};
  const Vector a = Vector::Constant(3, 1.0 / 3.0);
  const Vector b = a;
  const auto sol = solve_schrodinger_1d(tp, a, sp, b, dim, c);
  const double base = schrodinger_objective(sol.plan, tp, a, sp, b, dim, c);

  int increased = 0;
  double min_increase = std::numeric_limits<double>::infinity();
  const int trials = 20;
  for (int k = 0; k < trials; ++k) {
    Matrix dir(3, 3);
    for (Index i = 0; i < 3; ++i) {
      for (Index j = 0; j < 3; ++j) dir(i, j) = normal(rng);
    }
    // Zero row and column sums keep the marginals; unit Frobenius norm.
    const Vector rm = dir.rowwise().mean();
    const Vector cm = dir.colwise().mean().transpose();
    const double all = dir.mean();
    for (Index i = 0; i < 3; ++i) {
      for (Index j = 0; j < 3; ++j) dir(i, j) += all - rm[i] - cm[j];
    }
    dir /= dir.norm();
    const Matrix moved = sol.plan + 1e-3 * dir;
    const double delta = schrodinger_objective(moved, tp, a, sp, b, dim, c) - base;
    if (delta > 0.0 && moved.minCoeff() >= 0.0) ++increased;
    min_increase = std::min(min_increase, delta);
  }

  // Same problem as an entropic problem with cost -log F at eps = 1.
  Matrix pts_s(3, 1);
  Matrix pts_t(3, 1);
  for (int k = 0; k < 3; ++k) {
    pts_s(k, 0) = tp[k];
    pts_t(k, 0) = sp[k];
  }
  const auto mu = make_measure(pts_s, a, 1.0);
  const auto nu = make_measure(pts_t, b, 1.0);
  const Matrix cost = -kernel_matrix(tp, sp, dim, c).array().log().matrix();
  SinkhornOptions so;
  so.tol = 1e-13;
  const auto [pot, rep] = sinkhorn(mu, nu, cost, 1.0, so);
  const Matrix ent = coupling_from_potentials(pot, mu, nu, cost, so.tol).plan;
  const double diff = (ent - sol.plan).cwiseAbs().maxCoeff();

  Table t;
  t.name = "schrodinger_check";
  t.columns = {"dim", "c", "objective", "marginal_residual", "perturbations", "increased",
               "min_increase", "max_diff_vs_entropic"};
  t.add_row({count(dim), num(c), num(base), num(sol.residual), count(trials), count(increased),
             num(min_increase), num(diff)});
  ExperimentResult r;
  r.tables.push_back(std::move(t));
  const bool pass = sol.converged && sol.residual <= 1e-9 && increased == trials && diff <= 1e-9;
  r.checks.push_back({5, "Schrodinger system", pass,
                      std::to_string(increased) + "/" + std::to_string(trials) +
                          " perturbations increase the objective; max difference to entropic "
                          "solve " + fmt(diff)});
  return r;
}

ExperimentResult run_discrete_oracle(const ExperimentConfig& config) {
  ExperimentResult r;
  const auto [mu, nu] = tied_discrete_instance();
  const Matrix cost = cost_matrix(mu, nu);
  const auto face = enumerate_optimal_vertices(mu, nu, cost);
  const Matrix target = max_entropy_plan(mu, nu, face.support);
  const auto exact = solve_exact(mu, nu, cost);
  const auto sweep = eps_sweep(mu, nu, cost, config.discrete_oracle.eps, config.sinkhorn);

  Table t;
  t.name = "discrete_oracle";
  t.columns = {"instance", "eps", "tv_to_max_entropy", "v_eps"};
  const std::string inst = hex64(fnv1a("tied-discrete"));
  double last_tv = kNaN;
  for (const auto& e : sweep.entries) {
    last_tv = total_variation(e.coupling.plan, target);
    t.add_row({inst, num(e.eps), num(last_tv), num(e.dual_value)});
  }
  r.tables.push_back(std::move(t));

  Table f;
  f.name = "discrete_oracle_face";
  f.columns = {"instance", "optimal_vertices", "face_cost", "simplex_cost", "support_size",
               "final_eps", "final_tv"};
  const double final_eps = sweep.entries.empty() ? kNaN : sweep.entries.back().eps;
  f.add_row({inst, count(face.vertices.size()), num(face.cost), num(exact.cost),
             count(static_cast<std::size_t>(face.support.sum())), num(final_eps), num(last_tv)});
  r.tables.push_back(std::move(f));

  const bool unique = face.vertices.size() == 1;
  if (unique) r.notes.push_back("discrete oracle: unique optimal plan, check is vacuous");
  const bool complete = sweep.entries.size() == config.discrete_oracle.eps.size();
  const bool pass = unique || (complete && last_tv <= 1e-3 &&
                               std::abs(face.cost - exact.cost) <= 1e-9);
  r.checks.push_back({6, "discrete max-entropy selection", pass,
                      std::to_string(face.vertices.size()) + " optimal vertices; TV at eps " +
                          fmt(final_eps) + " = " + fmt(last_tv)});
  return r;
}

ExperimentResult run_c_round_trip(const Pipeline& p) {
  ExperimentResult r;
  Table t;
  t.name = "c_estimate";
  t.columns = {"instance", "case", "eps", "c_true", "c_hat", "method", "e1", "e1_scaled", "e2",
               "identifiable", "r_squared"};

  // Interleaved parameters make r non-separable, so c is identifiable.
  const double c_true = 0.7;
  const std::vector<double> tp{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> sp{0.5, 1.5, 2.5, 3.5};
  const Vector w = Vector::Constant(4, 0.25);
  const auto synth = solve_schrodinger_1d(tp, w, sp, w, 2, c_true);
  const auto fit = fit_log_density(tp, w, sp, w, synth.plan, 2);
  t.add_row({"synthetic", "synthetic", num(kNaN), num(c_true), num(fit.c), "regression",
             num(kNaN), num(kNaN), num(fit.c), fit.identifiable, num(fit.r_squared)});
  const bool synth_ok = fit.identifiable && std::abs(fit.c - c_true) <= 1e-6;

  bool ray_ok = false;
  std::string ray_detail;
  try {
    const double h = std::max(p.mu.cell_width, p.nu.cell_width);
    const auto est =
        estimate_c(p.sweep, p.rays.rays[p.central], p.mu, p.nu,
                   CEstimateOptions{p.config.selection.coupling_delta_cells * h,
                                    p.config.selection.guard_cells});
    t.add_row({p.instance, "central-ray", num(p.sweep.entries.back().eps), num(kNaN),
               num(est.c_hat), est.method, num(est.e1), num(est.e1_scaled), num(est.e2),
               est.e2_identifiable, num(est.r_squared)});
    ray_ok = std::abs(est.c_hat) <= 0.1;
    ray_detail = "central-ray c_hat " + fmt(est.c_hat) + " via " + est.method;
  } catch (const Error& e) {
    ray_detail = std::string("central-ray estimate failed: ") + e.what();
  }
  r.tables.push_back(std::move(t));
  r.checks.push_back({7, "c-estimator round trip", synth_ok && ray_ok,
                      "synthetic c_hat " + fmt(fit.c) + " (true 0.7); " + ray_detail});
  return r;
}

Table solve_table(const Pipeline& p, double eps) {
  Table t;
  t.name = "solve";
  t.columns = {"instance", "eps", "v0", "v_eps", "gap", "marginal_error", "sweeps", "converged"};
  SinkhornOptions so = p.config.sinkhorn;
  const auto [pot, rep] = sinkhorn(p.mu, p.nu, p.cost, eps, so);
  t.add_row({p.instance, num(eps), num(p.exact.cost), num(rep.dual_value),
             num(rep.dual_value - p.exact.cost), num(rep.marginal_error),
             count(static_cast<std::size_t>(rep.iterations)), rep.converged});
  return t;
}

ExperimentResult rays_tables(const Pipeline& p) {
  ExperimentResult r;
  Table t;
  t.name = "rays";
  t.columns = {"instance", "ray", "upper", "lower", "length", "source_points", "target_points",
               "central"};
  for (std::size_t k = 0; k < p.rays.rays.size(); ++k) {
    const auto& ray = p.rays.rays[k];
    t.add_row({p.instance, count(k), point_text(ray.upper), point_text(ray.lower),
               num(ray.length()), count(ray.source_indices.size()),
               count(ray.target_indices.size()), k == p.central});
  }
  r.tables.push_back(std::move(t));
  Table s;
  s.name = "rays_summary";
  s.columns = {"instance", "rays", "v0", "unassigned_source_mass", "unassigned_target_mass",
               "unassigned_mass", "covered"};
  s.add_row({p.instance, count(p.rays.rays.size()), num(p.exact.cost),
             num(p.rays.unassigned_source_mass), num(p.rays.unassigned_target_mass),
             num(p.rays.unassigned_mass), p.rays.covers(p.config.rays.decomposition_tol)});
  r.tables.push_back(std::move(s));
  return r;
}

Report run_verify(const ExperimentConfig& config) {
  Report report;
  report.experiment = "verify";
  report.hash = config_hash(config);
  auto absorb = [&](ExperimentResult&& r) {
    for (auto& t : r.tables) report.tables.push_back(std::move(t));
    for (auto& c : r.checks) report.criteria.push_back(std::move(c));
    for (auto& n : r.notes) report.notes.push_back(std::move(n));
  };

  std::cerr << "verify: duality suite\n";
  absorb(run_duality_suite(config));
  std::cerr << "verify: exact solve, rays and eps sweep\n";
  const Pipeline p = build_pipeline(config);
  if (p.sweep.failure) report.notes.push_back("sweep stopped early: " + *p.sweep.failure);
  absorb(rays_tables(p));
  std::cerr << "verify: cost gap and concentration\n";
  absorb(run_cost_gap(p));
  absorb(run_concentration(p));
  std::cerr << "verify: selection\n";
  absorb(run_selection(p));
  std::cerr << "verify: Schrodinger check and discrete oracle\n";
  absorb(run_schrodinger_check(config));
  absorb(run_discrete_oracle(config));
  absorb(run_c_round_trip(p));
  std::sort(report.criteria.begin(), report.criteria.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
  return report;
}

}  // namespace entsel
