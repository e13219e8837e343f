#include <doctest.h>

#include <cmath>

#include "entsel/instances.hpp"
#include "fixtures.hpp"

using namespace entsel;

TEST_CASE("builtin scenarios have the documented boxes and separations") {
  const auto sq = builtin_scenario("translated-squares-2d");
  CHECK(sq.dim == 2);
  CHECK(sq.source_domain.low == std::vector<double>{0.0, 0.0});
  CHECK(sq.target_domain.low == std::vector<double>{2.0, 0.0});
  CHECK(sq.target_domain.high == std::vector<double>{3.0, 1.0});
  CHECK(sq.separation == doctest::Approx(1.0));
  CHECK(builtin_scenario("segment-1d").separation == doctest::Approx(1.0));
  CHECK(builtin_scenario("segment-1d").dim == 1);
  CHECK(builtin_scenario("translated-cubes-3d").separation == doctest::Approx(2.0));
  CHECK_THROWS_AS(builtin_scenario("no-such-scenario"), ConfigError);
}

TEST_CASE("box distance is the norm of the per-axis gaps") {
  CHECK(box_distance(Box{{0, 0}, {1, 1}}, Box{{4, 5}, {6, 7}}) == doctest::Approx(5.0));
  CHECK(box_distance(Box{{0, 0}, {1, 1}}, Box{{0.5, 0.5}, {2, 2}}) == 0.0);
}

TEST_CASE("scenarios must be separated") {
  CHECK_THROWS_AS(make_scenario("overlap", Box{{0.0}, {1.0}}, Box{{0.5}, {2.0}}), ScenarioError);
}

TEST_CASE("uniform 2x2 cell-center quadrature") {
  const auto m = discretize_box(Box{{0, 0}, {1, 1}}, {}, GridSpec::uniform(2, 2));
  REQUIRE(m.size() == 4);
  const double expect[4][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
  for (int k = 0; k < 4; ++k) {
    CHECK(m.points(k, 0) == doctest::Approx(expect[k][0]));
    CHECK(m.points(k, 1) == doctest::Approx(expect[k][1]));
    CHECK(m.weights[k] == doctest::Approx(0.25));
  }
  CHECK(m.cell_width == doctest::Approx(0.5));
}

TEST_CASE("linear density is sampled at cell centers and renormalized") {
  DensitySpec lin;
  lin.kind = DensitySpec::Kind::polynomial;
  lin.terms = {{1.0, {1}}};
  const auto m = discretize_box(Box{{0.0}, {1.0}}, lin, GridSpec::uniform(1, 2));
  CHECK(m.weights[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m.weights[1] == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("non-positive density samples are rejected") {
  DensitySpec d;
  d.kind = DensitySpec::Kind::polynomial;
  d.terms = {{1.0, {1}}, {-0.5, {0}}};  // x - 0.5 changes sign
  CHECK_THROWS_AS(discretize_box(Box{{0.0}, {1.0}}, d, GridSpec::uniform(1, 4)), ScenarioError);
}

TEST_CASE("tabulated density interpolates its nodes") {
  DensitySpec d;
  d.kind = DensitySpec::Kind::tabulated;
  d.table_shape = {2};
  d.table_values = {1.0, 3.0};
  const Box box{{0.0}, {1.0}};
  const double x = 0.25;
  CHECK(d.evaluate(box, std::span<const double>(&x, 1)) == doctest::Approx(1.5));
}

TEST_CASE("weights sum to one on every builtin scenario") {
  for (const auto& name : builtin_scenario_names()) {
    const auto s = builtin_scenario(name);
    const auto [mu, nu] = discretize(s, GridSpec::uniform(s.dim, 4));
    CHECK(std::abs(mu.weights.sum() - 1.0) <= 1e-12);
    CHECK(std::abs(nu.weights.sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("grid limits") {
  const Box unit{{0.0}, {1.0}};
  CHECK_THROWS_AS(discretize_box(unit, {}, GridSpec{{0}}), Error);
  CHECK_THROWS_AS(discretize_box(Box{{0, 0}, {1, 1}}, {}, GridSpec{{400, 400}}), Error);
}

TEST_CASE("discretized mean converges at second order") {
  // Density 1 + x on [0, 1]: mean 5/9. Cell-center quadrature of a smooth
  // density has O(h^2) error, so doubling the grid quarters it.
  DensitySpec d;
  d.kind = DensitySpec::Kind::polynomial;
  d.terms = {{1.0, {0}}, {1.0, {1}}};
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    const auto m = discretize_box(Box{{0.0}, {1.0}}, d, GridSpec::uniform(1, n));
    const double err = std::abs(m.weights.dot(m.points.col(0)) - 5.0 / 9.0);
    if (prev > 0.0) CHECK(err < 0.3 * prev);
    prev = err;
  }
}

TEST_CASE("cost matrix") {
  const auto x = fixtures::point_measure({0.0, 0.0});
  const auto y = fixtures::point_measure({3.0, 4.0});
  CHECK(cost_matrix(x, y)(0, 0) == doctest::Approx(5.0));
  CHECK(cost_matrix(x, x)(0, 0) == 0.0);
  CHECK_THROWS_AS(cost_matrix(x, fixtures::point_measure({1.0})), Error);

  const auto [mu, nu] = fixtures::builtin("translated-squares-2d", 2);
  const Matrix c = cost_matrix(mu, nu);
  REQUIRE(c.rows() == 4);
  REQUIRE(c.cols() == 4);
  CHECK(c.minCoeff() == doctest::Approx(1.5));
}

TEST_CASE("tied discrete instance") {
  const auto [mu, nu] = tied_discrete_instance();
  CHECK(mu.size() == 3);
  CHECK(nu.size() == 3);
  CHECK(mu.cell_width == kAtomicCellWidth);
  CHECK(mu.weights[0] == doctest::Approx(1.0 / 3.0));
}
