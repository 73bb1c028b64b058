#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "perimlab/dimension.hpp"
#include "perimlab/geometry.hpp"
#include "perimlab/harness.hpp"
#include "perimlab/reference.hpp"

using namespace perimlab;
namespace nb = std::numbers;

TEST_CASE("alpha solves the scale equation") {
  // eta = 3: all four pieces have ratio 1/3, so alpha = log 4 / log 3 exactly.
  CHECK(solve_alpha(3.0) == doctest::Approx(std::log(4.0) / std::log(3.0)).epsilon(1e-13));
  // frozen root for eta = 5 (bisection at long-double precision, independent run)
  CHECK(solve_alpha(5.0) == doctest::Approx(1.1600853739964372).epsilon(1e-12));
  for (double eta : {2.0, 3.0, 4.0, 5.0, 7.0, 10.0}) {
    const double a = solve_alpha(eta);
    const SnowflakeSpec s{eta, 0, 1.0};
    const double res = 2.0 * std::pow(s.r1(), a) + 2.0 * std::pow(s.r2(), a) - 1.0;
    CHECK(std::abs(res) < 1e-13);
    CHECK(a > 1.0);
    CHECK(a < 2.0);
  }
  // alpha decreases in eta: thinner bumps carry less boundary
  CHECK(solve_alpha(3.0) > solve_alpha(5.0));
  CHECK(solve_alpha(5.0) > solve_alpha(10.0));
}

TEST_CASE("lattice classification") {
  const LatticeVerdict three = check_nonlattice(3.0);
  CHECK(three.kind == LatticeVerdict::Kind::lattice);
  CHECK(three.p == 1);
  CHECK(three.q == 1);

  const LatticeVerdict two = check_nonlattice(2.0);
  CHECK(two.kind == LatticeVerdict::Kind::lattice);
  CHECK(two.p == 2);
  CHECK(two.q == 1);

  // rho(5) = log(2/5) / log(1/5); best convergent under 1e6 frozen from a
  // 50-digit continued-fraction run
  const LatticeVerdict five = check_nonlattice(5.0, 1000000);
  CHECK(five.kind == LatticeVerdict::Kind::nonlattice_up_to);
  CHECK(five.p == 129389);
  CHECK(five.q == 227268);
  CHECK(five.err == doctest::Approx(9.8514458e-13).epsilon(1e-4));
  CHECK(five.bound == 1000000);

  CHECK_THROWS_AS(check_nonlattice(1.0), std::domain_error);
  CHECK_THROWS_AS(check_nonlattice(5.0, 0), std::invalid_argument);
}

TEST_CASE("tube volume matches the convex closed form") {
  const Polygon sq = make_square(1.0);
  for (double t : {0.02, 0.1}) {
    const TubeEstimate est = tube_volume(sq, t, 2000000, 31);
    const double exact = reference::convex_tube_volume(sq, t);
    CHECK(std::abs(est.value - exact) <= 4.0 * est.se);
    CHECK(est.se < 0.01 * exact);
  }
}

TEST_CASE("tube volume is deterministic under the chunked reduction") {
  const Polygon sq = make_square(1.0);
  const TubeEstimate a = tube_volume(sq, 0.05, 300000, 7);
  const TubeEstimate b = tube_volume(sq, 0.05, 300000, 7);
  CHECK(a.value == b.value);
  CHECK(a.hits == b.hits);
}

TEST_CASE("minkowski fit recovers dimension one for the square") {
  const Polygon sq = make_square(1.0);
  const DimensionFit fit = fit_minkowski(sq, parse_grid("0.2:0.02:log8"), 400000, 11, 0.0);
  CHECK(std::abs(fit.alpha_hat - 1.0) < 0.08);
  CHECK(fit.content_lower > 0.0);
  CHECK(fit.content_upper < 4.0 * fit.content_lower);
}

TEST_CASE("minkowski fit sees the snowflake dimension") {
  const SnowflakeSpec spec{3.0, 6, 1.0};
  const Polygon poly = build_snowflake(spec);
  const DimensionFit fit =
      fit_minkowski(poly, parse_grid("0.15:0.008:log8"), 600000, 13, spec.feature_floor());
  CHECK(std::abs(fit.alpha_hat - solve_alpha(3.0)) < 0.1);
  CHECK(fit.fit.r2 > 0.99);
}

TEST_CASE("fit refuses grids below the resolution floor") {
  const SnowflakeSpec spec{3.0, 4, 1.0};
  const Polygon poly = build_snowflake(spec);
  // depth 4 floor is 5/81 > 0.01: the whole grid sits below it
  CHECK_THROWS_AS(
      fit_minkowski(poly, parse_grid("0.01:0.001:log6"), 1000, 1, spec.feature_floor()),
      std::invalid_argument);
}
