#include <doctest.h>

#include <cmath>

#include "entsel/discrete_oracle.hpp"
#include "entsel/entropic.hpp"
#include "fixtures.hpp"

using namespace entsel;

TEST_CASE("equal costs: every plan is optimal and the limit is the product") {
  const auto mu = fixtures::line_measure({0.0, 1.0});
  const auto nu = fixtures::line_measure({0.0, 1.0});
  const Matrix cost = Matrix::Constant(2, 2, 1.0);
  const auto face = enumerate_optimal_vertices(mu, nu, cost);
  CHECK(face.vertices.size() == 2);
  CHECK(face.cost == doctest::Approx(1.0));
  const Matrix maxent = max_entropy_plan(mu, nu, face.support);
  CHECK((maxent.array() - 0.25).abs().maxCoeff() <= 1e-12);
  const auto [pot, rep] = sinkhorn(mu, nu, cost, 1e-2);
  CHECK(total_variation(coupling_from_potentials(pot, mu, nu, cost).plan, maxent) <= 1e-6);
}

TEST_CASE("tied instance: two optimal vertices on a collinear block") {
  const auto [mu, nu] = tied_discrete_instance();
  const Matrix cost = cost_matrix(mu, nu);
  const auto face = enumerate_optimal_vertices(mu, nu, cost);
  REQUIRE(face.vertices.size() == 2);
  for (const auto& v : face.vertices) {
    CHECK(v.cwiseProduct(cost).sum() == doctest::Approx(face.cost));
    CHECK((Vector(v.rowwise().sum()) - mu.weights).cwiseAbs().maxCoeff() <= 1e-12);
  }
  // Sources (0,0),(1,0) and targets (3,0),(4,0) tie on the line; (0,1) goes
  // to (3,1).
  const Matrix maxent = max_entropy_plan(mu, nu, face.support);
  Matrix expected = Matrix::Zero(3, 3);
  expected.topLeftCorner(2, 2).setConstant(1.0 / 6.0);
  expected(2, 2) = 1.0 / 3.0;
  CHECK((maxent - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("enumeration limits and total variation") {
  const auto big = fixtures::line_measure({0, 1, 2, 3, 4});
  CHECK_THROWS_AS(enumerate_optimal_vertices(big, big, cost_matrix(big, big)), Error);
  Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  CHECK(total_variation(a, b) == doctest::Approx(1.0));
  CHECK(total_variation(a, a) == 0.0);
}
