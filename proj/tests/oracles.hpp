// Independent reference solvers for the tests. None of them shares code with
// the library's solvers.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Minimizer of a unimodal function on [lo, hi]. Near a smooth minimum the
/// function values only resolve the argument to about sqrt(machine eps), so
/// callers needing more pass |derivative| instead.
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-14) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// sum pi log(pi / ref), +inf outside the positive orthant.
inline double relative_entropy(const MatrixXd& pi, const MatrixXd& ref) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    if (pi(k) <= 0.0) return HUGE_VAL;
    h += pi(k) * std::log(pi(k) / ref(k));
  }
  return h;
}

/// argmin sum pi log(pi / ref) over 3x3 couplings of (a, b). The coupling
/// polytope is parametrized by its leading 2x2 block (4 free entries, the
/// rest fixed by the marginals); damped Newton from the product plan, with
/// backtracking to stay interior.
inline MatrixXd min_relative_entropy_3x3(const VectorXd& a, const VectorXd& b,
                                         const MatrixXd& ref) {
  // pi = base + L x, entries in column-major order.
  const auto plan = [&](const VectorXd& x) {
    MatrixXd p(3, 3);
    p(0, 0) = x[0];
    p(0, 1) = x[1];
    p(1, 0) = x[2];
    p(1, 1) = x[3];
    p(0, 2) = a[0] - x[0] - x[1];
    p(1, 2) = a[1] - x[2] - x[3];
    p(2, 0) = b[0] - x[0] - x[2];
    p(2, 1) = b[1] - x[1] - x[3];
    p(2, 2) = a[2] - p(2, 0) - p(2, 1);
    return p;
  };
  MatrixXd lin = MatrixXd::Zero(9, 4);
  for (int k = 0; k < 4; ++k) {
    VectorXd e = VectorXd::Zero(4);
    e[k] = 1.0;
    const MatrixXd d = plan(e) - plan(VectorXd::Zero(4));
    lin.col(k) = Eigen::Map<const VectorXd>(d.data(), 9);
  }
  const MatrixXd product = a * b.transpose();
  VectorXd x(4);
  x << product(0, 0), product(0, 1), product(1, 0), product(1, 1);
  for (int it = 0; it < 200; ++it) {
    const MatrixXd p = plan(x);
    VectorXd grad_pi(9), curv(9);
    for (int k = 0; k < 9; ++k) {
      grad_pi[k] = std::log(p(k) / ref(k)) + 1.0;
      curv[k] = 1.0 / p(k);
    }
    const VectorXd grad = lin.transpose() * grad_pi;
    const MatrixXd hess = lin.transpose() * curv.asDiagonal() * lin;
    const VectorXd step = hess.ldlt().solve(-grad);
    if (step.norm() < 1e-17) break;
    const double h0 = relative_entropy(p, ref);
    double t = 1.0;
    while (relative_entropy(plan(x + t * step), ref) > h0 + 1e-4 * t * grad.dot(step)) {
      t *= 0.5;
      if (t < 1e-20) break;
    }
    x += t * step;
  }
  return plan(x);
}

}  // namespace oracle
