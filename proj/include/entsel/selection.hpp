// The one-dimensional Schrodinger problem that selects the small-eps limit
// on a transport ray, and estimators of its free constant c.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "entsel/entropic.hpp"
#include "entsel/rays.hpp"

namespace entsel {

/// F(r) = (2 pi r)^((d - 1) / 2) exp(c r); std::domain_error for r <= 0.
double kernel_F(double r, int dim, double c);

/// Solution of min H(pi | F(|t - s|) mu_R (x) nu_R) over couplings of mu_R and
/// nu_R, written as pi = F exp(ff_i + gg_j) mu_R nu_R with sum mu_R ff = 0.
struct SchrodingerSolution {
  std::vector<double> source_params;
  std::vector<double> target_params;
  Vector source_weights;
  Vector target_weights;
  Vector ff;
  Vector gg;
  Matrix plan;
  int dim = 0;
  double c = 0.0;
  int iterations = 0;
  double residual = 0.0;  // L-infinity marginal violation
  bool converged = false;
};

SchrodingerSolution solve_schrodinger_1d(std::span<const double> source_params,
                                         const Vector& source_weights,
                                         std::span<const double> target_params,
                                         const Vector& target_weights, int dim, double c,
                                         double tol = 1e-12, int max_iter = 1000000);

SchrodingerSolution solve_schrodinger_1d(const RestrictedMeasure& mu_r,
                                         const RestrictedMeasure& nu_r, int dim, double c,
                                         double tol = 1e-12, int max_iter = 1000000);

/// F(|t_i - s_j|) as a matrix.
Matrix kernel_matrix(std::span<const double> source_params, std::span<const double> target_params,
                     int dim, double c);

/// H(plan | F mu_R (x) nu_R).
double schrodinger_objective(const Matrix& plan, std::span<const double> source_params,
                             const Vector& source_weights, std::span<const double> target_params,
                             const Vector& target_weights, int dim, double c);

/// Least-squares fit of log(plan_ij / (mu_i nu_j)) - (d - 1)/2 log(2 pi r_ij)
/// against a_i + b_j + c r_ij over the support of plan. When r is additively
/// separable on the support (as it is whenever the two parameter sets do not
/// interleave) c cannot be separated from a and b: identifiable is false, c is
/// NaN and the reported fit is that of the additive model alone.
struct LogDensityFit {
  double c = 0.0;
  bool identifiable = false;
  double r_squared = 0.0;
  double rms_residual = 0.0;
  Index pairs = 0;
};

LogDensityFit fit_log_density(std::span<const double> source_params, const Vector& source_weights,
                              std::span<const double> target_params, const Vector& target_weights,
                              const Matrix& plan, int dim);

/// Derivatives of the entropic potentials orthogonal to a ray, averaged over
/// the ray's assigned points away from its ends.
struct DerivativeProbe {
  double eps = 0.0;
  double slope_f = 0.0;  // mean of d f_eps along unit directions orthogonal to the ray
  double slope_g = 0.0;
  Index source_points = 0;
  Index target_points = 0;
};

/// Gradient of the entropic c-transform f_eps(x) = -eps log sum_j
/// exp((g_j - |x - y_j|) / eps) nu_j at an arbitrary x.
Vector entropic_gradient_source(const EntropicPotentials& pot, const DiscreteMeasure& nu,
                                const Vector& x);
Vector entropic_gradient_target(const EntropicPotentials& pot, const DiscreteMeasure& mu,
                                const Vector& y);

/// Orthonormal basis of the complement of a unit direction (d - 1 columns).
Matrix orthogonal_complement(const Vector& direction);

DerivativeProbe probe_derivatives(const EntropicPotentials& pot, const TransportRay& ray,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  double guard_cells = 2.0);

struct CEstimateOptions {
  double delta = 0.0;          // cylinder radius for the regression; 0 picks 4 cells
  double guard_cells = 2.0;    // interior guard for the derivative probes
};

/// Estimators of c on one ray from an eps sweep.
///  E1: half the gap between the orthogonal slopes of f_eps and g_eps,
///      averaged over the two smallest eps of the sweep.
///  E2: the coefficient of r in fit_log_density on the restricted plan at the
///      smallest eps.
/// c_hat is E2 when identifiable, E1 otherwise.
struct CEstimate {
  double c_hat = 0.0;
  std::string method;      // "regression" | "derivative" | "none"
  double e1 = 0.0;
  double e1_scaled = 0.0;  // E1 with each slope divided by sqrt(eps)
  double e2 = 0.0;         // NaN when not identifiable
  bool e2_identifiable = false;
  double discrepancy = 0.0;  // |E1 - E2| when both exist, else NaN
  double r_squared = 0.0;
  std::vector<DerivativeProbe> probes;
};

CEstimate estimate_c(const SweepResult& sweep, const TransportRay& ray, const DiscreteMeasure& mu,
                     const DiscreteMeasure& nu, const CEstimateOptions& options = {});

/// omega^(d-1) times the limit plan's mass on source_window x target_window
/// (arc-length intervals along the ray); 0 for an empty window.
double predicted_cylinder_mass(const SchrodingerSolution& sol, double source_lo, double source_hi,
                               double target_lo, double target_hi, double omega);

/// Middle half [lo + L/4, hi - L/4] of a sorted parameter set.
std::pair<double, double> middle_half(const std::vector<double>& params);

}  // namespace entsel
