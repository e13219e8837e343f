// Entropic optimal transport: log-domain Sinkhorn (block ascent on the
// Schrodinger dual), couplings from potentials, dual value, relative
// entropy and warm-started epsilon sweeps.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entsel/exact_ot.hpp"
#include "entsel/instances.hpp"

namespace entsel {

struct EntropicPotentials {
  Vector f;  // per source point
  Vector g;  // per target point
  double eps = 0.0;
};

struct SinkhornReport {
  int iterations = 0;
  double marginal_error = 0.0;  // L1 error of the column marginal at exit
  double dual_value = 0.0;
  bool converged = false;
  std::vector<double> dual_trace;  // dual value after each sweep, when requested
};

struct SinkhornOptions {
  double tol = 1e-9;
  int max_iter = 100000;
  bool trace_dual = false;
};

/// Alternating exact maximization of the entropic dual. Each sweep solves the
/// target potentials against the source ones and then the source potentials
/// against the target ones, so at exit the row marginal is exact and the
/// reported error is that of the column marginal. Potentials are returned in
/// the gauge sum_i mu_i f_i = 0.
std::pair<EntropicPotentials, SinkhornReport> sinkhorn(
    const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& cost, double eps,
    const SinkhornOptions& options = {},
    const std::optional<EntropicPotentials>& warm_start = std::nullopt);

/// plan_ij = exp((f_i + g_j - c_ij) / eps) mu_i nu_j; throws when either
/// marginal is off by more than 10 * tol in L1.
Coupling coupling_from_potentials(const EntropicPotentials& pot, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu, const Matrix& cost,
                                  double tol = 1e-9);

/// sum f mu + sum g nu - eps log sum exp((f_i + g_j - c_ij) / eps) mu_i nu_j.
double dual_value(const EntropicPotentials& pot, const DiscreteMeasure& mu,
                  const DiscreteMeasure& nu, const Matrix& cost);

/// sum plan log(plan / reference) with 0 log 0 = 0; +infinity when plan puts
/// mass where reference vanishes.
double relative_entropy(const Coupling& pi, const Matrix& reference);

/// mu (x) nu as a matrix.
Matrix product_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Smallest eps for which the transverse width sqrt(eps) still spans two
/// cells: (2 h)^2 with h the larger cell width.
double min_admissible_eps(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct SweepEntry {
  double eps = 0.0;
  EntropicPotentials potentials;
  Coupling coupling;
  double dual_value = 0.0;
  SinkhornReport report;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // converged entries, in schedule order
  std::optional<std::string> failure;
};

/// Pre: schedule strictly decreasing with its last value at or above
/// min_admissible_eps (ConfigError otherwise). Each solve is warm-started from
/// the previous one; the sweep stops at the first solve that fails to converge
/// and records why.
SweepResult eps_sweep(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& cost,
                      const std::vector<double>& schedule, const SinkhornOptions& options = {});

}  // namespace entsel
