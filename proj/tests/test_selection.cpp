#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "entsel/entropic.hpp"
#include "entsel/selection.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace entsel;

namespace {

const std::vector<double> kSource{0.0, 0.5, 1.0};
const std::vector<double> kTarget{2.0, 2.5, 3.0};

Vector uniform(Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

double tv(const Matrix& a, const Matrix& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

}  // namespace

TEST_CASE("kernel F") {
  CHECK(kernel_F(1.0, 1, 0.0) == doctest::Approx(1.0));
  CHECK(kernel_F(2.0, 3, 0.0) == doctest::Approx(12.566371).epsilon(1e-7));
  CHECK(kernel_F(1.0, 2, 1.0) ==
        doctest::Approx(std::sqrt(2.0 * std::numbers::pi) * std::numbers::e).epsilon(1e-14));
  CHECK(kernel_F(1.0, 2, 1.0) == doctest::Approx(6.813722).epsilon(1e-7));
  CHECK_THROWS_AS(kernel_F(0.0, 2, 0.0), std::domain_error);
  CHECK_THROWS_AS(kernel_F(-1.0, 2, 0.0), std::domain_error);
  for (double r : {0.3, 1.0, 2.7}) {
    const double lhs = kernel_F(r, 3, 0.4 + 0.9);
    const double rhs = kernel_F(r, 3, 0.4) * std::exp(0.9 * r);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  }
}

TEST_CASE("single atom") {
  const std::vector<double> t{0.0}, s{2.0};
  const auto sol = solve_schrodinger_1d(t, Vector::Ones(1), s, Vector::Ones(1), 2, 0.3);
  CHECK(sol.plan(0, 0) == doctest::Approx(1.0));
  CHECK(sol.ff[0] == doctest::Approx(0.0));
  CHECK(sol.ff[0] + sol.gg[0] == doctest::Approx(-std::log(kernel_F(2.0, 2, 0.3))));
}

TEST_CASE("marginals, gauge and density form") {
  const Vector a = (Vector(3) << 0.2, 0.5, 0.3).finished();
  const Vector b = (Vector(3) << 0.6, 0.1, 0.3).finished();
  const auto sol = solve_schrodinger_1d(kSource, a, kTarget, b, 3, 0.4);
  CHECK(sol.converged);
  CHECK(sol.residual <= 1e-9);
  CHECK((Vector(sol.plan.rowwise().sum()) - a).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((Vector(sol.plan.colwise().sum().transpose()) - b).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(a.dot(sol.ff)) <= 1e-12);
  const Matrix k = kernel_matrix(kSource, kTarget, 3, 0.4);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) {
      const double form = k(i, j) * std::exp(sol.ff[i] + sol.gg[j]) * a[i] * b[j];
      CHECK(std::abs(sol.plan(i, j) - form) <= 1e-12);
      // A shifted gauge gives the same density.
      const double shifted = k(i, j) * std::exp((sol.ff[i] + 0.7) + (sol.gg[j] - 0.7)) * a[i] * b[j];
      CHECK(std::abs(shifted - form) <= 1e-12);
    }
  }
}

TEST_CASE("mirror-symmetric instance has mirror-symmetric potentials") {
  // Reflecting the line about 1.5 swaps the source {0, .5, 1} with the
  // target {2, 2.5, 3} and reverses the order of the points.
  const Vector a = (Vector(3) << 0.2, 0.3, 0.5).finished();
  const Vector b = a.reverse();
  const auto sol = solve_schrodinger_1d(kSource, a, kTarget, b, 2, 0.0);
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(sol.plan(i, j) - sol.plan(2 - j, 2 - i)) <= 1e-12);
  }
  // Potentials match up to the gauge constant.
  const Vector diff = sol.ff - sol.gg.reverse();
  CHECK(diff.maxCoeff() - diff.minCoeff() <= 1e-10);
}

TEST_CASE("3x3 plan matches a Newton minimization of the relative entropy") {
  const Vector a = uniform(3), b = uniform(3);
  const Matrix ref = kernel_matrix(kSource, kTarget, 2, 0.0).cwiseProduct(a * b.transpose());
  const Matrix expected = oracle::min_relative_entropy_3x3(a, b, ref);
  const auto sol = solve_schrodinger_1d(kSource, a, kTarget, b, 2, 0.0);
  CHECK((sol.plan - expected).cwiseAbs().maxCoeff() <= 1e-6);

  const Vector a2 = (Vector(3) << 0.2, 0.5, 0.3).finished();
  const Vector b2 = (Vector(3) << 0.6, 0.1, 0.3).finished();
  const Matrix ref2 = kernel_matrix(kSource, kTarget, 3, 0.8).cwiseProduct(a2 * b2.transpose());
  const auto sol2 = solve_schrodinger_1d(kSource, a2, kTarget, b2, 3, 0.8);
  CHECK((sol2.plan - oracle::min_relative_entropy_3x3(a2, b2, ref2)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("feasible perturbations increase the objective") {
  const Vector a = uniform(3), b = uniform(3);
  const auto sol = solve_schrodinger_1d(kSource, a, kTarget, b, 2, 0.0);
  const double h0 = schrodinger_objective(sol.plan, kSource, a, kTarget, b, 2, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 20; ++k) {
    Matrix d(3, 3);
    for (Index e = 0; e < 9; ++e) d(e) = normal(rng);
    // Double centering removes both marginals.
    d.rowwise() -= d.colwise().mean();
    d.colwise() -= d.rowwise().mean();
    d *= 1e-3 / d.norm();
    CHECK(schrodinger_objective(sol.plan + d, kSource, a, kTarget, b, 2, 0.0) > h0);
  }
}

TEST_CASE("equivalent to an entropic solve with cost -log F and eps 1") {
  const Vector a = (Vector(3) << 0.2, 0.5, 0.3).finished();
  const Vector b = (Vector(3) << 0.6, 0.1, 0.3).finished();
  const auto sol = solve_schrodinger_1d(kSource, a, kTarget, b, 3, 0.5);
  Matrix pts_s(3, 1), pts_t(3, 1);
  for (Index k = 0; k < 3; ++k) {
    pts_s(k, 0) = kSource[static_cast<std::size_t>(k)];
    pts_t(k, 0) = kTarget[static_cast<std::size_t>(k)];
  }
  const auto mu = make_measure(pts_s, a, 0.5);
  const auto nu = make_measure(pts_t, b, 0.5);
  const Matrix cost = -kernel_matrix(kSource, kTarget, 3, 0.5).array().log().matrix();
  SinkhornOptions opt;
  opt.tol = 1e-13;
  const auto [pot, rep] = sinkhorn(mu, nu, cost, 1.0, opt);
  const auto pi = coupling_from_potentials(pot, mu, nu, cost, opt.tol);
  CHECK((pi.plan - sol.plan).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("log-density regression") {
  SUBCASE("interleaved parameters recover c") {
    // plan = F(r; c = 0.7) e^(a_i + b_j) mu_i nu_j built by hand.
    const std::vector<double> t{0, 1, 2, 3}, s{0.5, 1.5, 2.5, 3.5};
    const Vector mu = (Vector(4) << 0.1, 0.2, 0.3, 0.4).finished();
    const Vector nu = (Vector(4) << 0.4, 0.1, 0.25, 0.25).finished();
    const double av[4] = {0.3, -0.2, 0.1, 0.0}, bv[4] = {-0.5, 0.2, 0.0, 0.4};
    Matrix plan(4, 4);
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) {
        const double r = std::abs(t[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(j)]);
        plan(i, j) = 2.0 * std::numbers::pi * r * std::exp(0.7 * r + av[i] + bv[j]) * mu[i] * nu[j];
      }
    }
    const auto fit = fit_log_density(t, mu, s, nu, plan, 3);
    CHECK(fit.identifiable);
    CHECK(std::abs(fit.c - 0.7) <= 1e-6);
    CHECK(fit.r_squared >= 0.999999);
  }
  SUBCASE("separated parameters leave c unidentifiable") {
    const auto sol = solve_schrodinger_1d(kSource, uniform(3), kTarget, uniform(3), 2, 0.7);
    const auto fit = fit_log_density(kSource, uniform(3), kTarget, uniform(3), sol.plan, 2);
    CHECK_FALSE(fit.identifiable);
    CHECK(std::isnan(fit.c));
    CHECK(fit.r_squared >= 0.999999);
  }
}

TEST_CASE("entropic gradient matches finite differences") {
  const auto [mu, nu] = fixtures::builtin("translated-squares-2d", 6);
  const Matrix c = cost_matrix(mu, nu);
  const auto [pot, rep] = sinkhorn(mu, nu, c, 0.1);
  const auto f_at = [&](const Vector& x) {
    double m = -HUGE_VAL;
    Vector e(nu.size());
    for (Index j = 0; j < nu.size(); ++j) {
      e[j] = (pot.g[j] - (x - nu.points.row(j).transpose()).norm()) / pot.eps + std::log(nu.weights[j]);
      m = std::max(m, e[j]);
    }
    return -pot.eps * (m + std::log((e.array() - m).exp().sum()));
  };
  Vector x(2);
  x << 0.4, 0.6;
  const Vector grad = entropic_gradient_source(pot, nu, x);
  for (int k = 0; k < 2; ++k) {
    Vector dx = Vector::Zero(2);
    dx[k] = 1e-6;
    const double fd = (f_at(x + dx) - f_at(x - dx)) / 2e-6;
    CHECK(std::abs(grad[k] - fd) <= 1e-6);
  }
  // The same formula with the roles of the measures exchanged.
  const Vector gy = entropic_gradient_target(pot, mu, nu.points.row(3).transpose());
  CHECK(gy.allFinite());
}

TEST_CASE("orthogonal complement") {
  for (int d : {1, 2, 3}) {
    Vector v = Vector::LinSpaced(d, 1.0, 2.0).normalized();
    const Matrix q = orthogonal_complement(v);
    CHECK(q.rows() == d);
    CHECK(q.cols() == d - 1);
    if (d > 1) {
      CHECK((q.transpose() * v).norm() <= 1e-12);
      CHECK((q.transpose() * q - Matrix::Identity(d - 1, d - 1)).norm() <= 1e-12);
    }
  }
}

TEST_CASE("estimate_c on translated squares is near zero") {
  const auto [mu, nu] = fixtures::builtin("translated-squares-2d", 16);
  const Matrix c = cost_matrix(mu, nu);
  const auto sol = solve_exact(mu, nu, c);
  const auto u = extend_u(sol, mu, nu);
  const auto rays = extract_rays(sol, u, mu, nu);
  const auto& ray = rays.rays[central_ray(rays, builtin_scenario("translated-squares-2d").source_domain)];
  const auto sweep = eps_sweep(mu, nu, c, {0.2, 0.1, 0.0625});
  const auto est = estimate_c(sweep, ray, mu, nu);
  CHECK(std::abs(est.c_hat) <= 0.1);
  CHECK(est.probes.size() == 2);
  CHECK(est.method == "derivative");

  SweepResult short_sweep;
  short_sweep.entries.push_back(sweep.entries[0]);
  CHECK_THROWS_AS(estimate_c(short_sweep, ray, mu, nu), Error);
}

TEST_CASE("segment-1d: the additive log-density model fits the limit coupling") {
  const auto [mu, nu] = fixtures::builtin("segment-1d", 32);
  const Matrix c = cost_matrix(mu, nu);
  const auto sol = solve_exact(mu, nu, c);
  const auto rays = extract_rays(sol, extend_u(sol, mu, nu), mu, nu);
  const auto sweep = eps_sweep(mu, nu, c, {0.1, 0.05, 0.025, 0.0125, 0.00625, 0.00390625});
  REQUIRE_FALSE(sweep.failure.has_value());
  const auto est = estimate_c(sweep, rays.rays[0], mu, nu);
  CHECK(est.method == "none");
  CHECK(est.r_squared >= 0.99);
}

TEST_CASE("predicted cylinder mass") {
  const auto sol = solve_schrodinger_1d(kSource, uniform(3), kTarget, uniform(3), 1, 0.0);
  CHECK(predicted_cylinder_mass(sol, -HUGE_VAL, HUGE_VAL, -HUGE_VAL, HUGE_VAL, 1.0) ==
        doctest::Approx(1.0));
  const auto sol2 = solve_schrodinger_1d(kSource, uniform(3), kTarget, uniform(3), 2, 0.0);
  const double full = predicted_cylinder_mass(sol2, 0.0, 1.0, 2.0, 3.0, 0.2);
  CHECK(predicted_cylinder_mass(sol2, 0.0, 1.0, 2.0, 3.0, 0.1) == doctest::Approx(full / 2));
  CHECK(predicted_cylinder_mass(sol2, 1.0, 0.0, 2.0, 3.0, 0.1) == 0.0);
  CHECK_THROWS_AS(predicted_cylinder_mass(sol2, 0.0, 1.0, 2.0, 3.0, 0.0), Error);

  const auto [lo, hi] = middle_half({0.0, 1.0, 2.0, 3.0, 4.0});
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(3.0));
}
