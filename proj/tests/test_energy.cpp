#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "perimlab/energy.hpp"
#include "perimlab/geometry.hpp"
#include "perimlab/harness.hpp"
#include "perimlab/kernel.hpp"
#include "perimlab/reference.hpp"

using namespace perimlab;
namespace nb = std::numbers;

// Frozen through the covariogram closed forms: for the unit square
// E(t) = pi t^2 - A(t)^2 with A = 2 int_0^1 e^{-u^2/t^2}(1-u) du, for the unit
// disk the radial deficit integral. Both evaluated at 30 digits.
namespace {
constexpr double kSquareT010 = 0.00344490770181103;
constexpr double kSquareT005 = 0.000436863462726379;
constexpr double kSquareT020 = 0.0267592616144817;
constexpr double kDiskT010 = 0.00556484451888939;
constexpr double kDiskT005 = 0.000695932217688051;
}  // namespace

TEST_CASE("direct energy hits the square closed form") {
  const Polygon sq = make_square(1.0);
  const RadialKernel k = RadialKernel::gaussian();
  struct Row {
    double t, expect;
  };
  for (const Row row : {Row{0.1, kSquareT010}, Row{0.05, kSquareT005}, Row{0.2, kSquareT020}}) {
    const Estimate e = energy_direct_mc(sq, k, row.t, 2000000, 21);
    CHECK(e.se > 0.0);
    CHECK(std::abs(e.value - row.expect) <= 4.0 * e.se);
    CHECK(e.se < 0.01 * row.expect);
  }
}

TEST_CASE("direct energy hits the disk closed form") {
  // 256-gon: perimeter deficit 2.5e-5 relative, far below the MC error
  const Polygon disk = make_regular_ngon(1.0);
  const RadialKernel k = RadialKernel::gaussian();
  struct Row {
    double t, expect;
  };
  for (const Row row : {Row{0.1, kDiskT010}, Row{0.05, kDiskT005}}) {
    const Estimate e = energy_direct_mc(disk, k, row.t, 2000000, 22);
    CHECK(std::abs(e.value - row.expect) <= 4.0 * e.se + 1e-4 * row.expect);
  }
}

TEST_CASE("parallel and serial estimators agree exactly on one thread of history") {
  // same derived streams, same chunk order: identical bits, not just statistics
  const Polygon sq = make_square(1.0);
  const RadialKernel k = RadialKernel::gaussian();
  const Estimate par = energy_direct_mc(sq, k, 0.1, 400000, 33);
  const Estimate par2 = energy_direct_mc(sq, k, 0.1, 400000, 33);
  CHECK(par.value == par2.value);
  CHECK(par.se == par2.se);

  const Estimate ser = reference::energy_direct_mc_serial(sq, k, 0.1, 400000, 34);
  CHECK(std::abs(par.value - ser.value) <= 4.0 * std::hypot(par.se, ser.se));
}

TEST_CASE("covariogram route reproduces the direct route") {
  // the radial grid lives in kernel units rho = r / t; the gaussian keeps less
  // than 1e-6 of its mass beyond rho = 4.2
  const Polygon sq = make_square(1.0);
  const RadialKernel k = RadialKernel::gaussian();
  const double t = 0.1;
  const std::vector<double> grid = parse_grid("0:4.5:lin46");
  const double cov = energy_covariogram(sq, k, t, grid, 500000, 40);
  // trapezoid bias on this grid is ~1e-3 relative; MC noise similar
  CHECK(cov == doctest::Approx(kSquareT010).epsilon(1e-2));
}

TEST_CASE("covariogram refuses a grid that truncates kernel mass") {
  const Polygon sq = make_square(1.0);
  const RadialKernel k = RadialKernel::gaussian();
  // mass of exp(-rho^2) beyond rho = 2 is e^{-4}, far over the 1e-6 budget
  CHECK_THROWS_AS(energy_covariogram(sq, k, 0.2, parse_grid("0:2:lin11"), 1000, 1),
                  std::invalid_argument);
}

TEST_CASE("ball kernel energy equals the gaussian route on its own scale") {
  // sanity across kernels: both estimates must agree with their own closed forms'
  // leading order (1/2) (2/pi) m1 P t^3 within 20% at t = 0.02
  const Polygon sq = make_square(1.0);
  const double t = 0.02;
  for (const RadialKernel& k : {RadialKernel::gaussian(), RadialKernel::ball(1.0)}) {
    const Estimate e = energy_direct_mc(sq, k, t, 2000000, 55);
    const double lead = (1.0 / nb::pi) * k.moment(1.0) * 4.0 * t * t * t;
    CHECK(e.value == doctest::Approx(lead).epsilon(0.2));
  }
}

TEST_CASE("signed energy splits the sign-changing kernel") {
  const Polygon sq = make_square(1.0);
  const SignedEnergy se = signed_energy(sq, 0.05, 400000, 60);
  CHECK(se.positive.value > 0.0);
  CHECK(se.negative.value > 0.0);
  CHECK(se.net.value == doctest::Approx(se.positive.value - se.negative.value).epsilon(1e-12));
  const double combined = std::hypot(se.positive.se, se.negative.se);
  CHECK(se.net.se == doctest::Approx(combined).epsilon(1e-12));
  // net m1 > 0, so the net energy at boundary scale must come out positive
  CHECK(se.net.value > 3.0 * se.net.se);
}

TEST_CASE("sweep recovers the cube law for a smooth boundary") {
  const Polygon sq = make_square(1.0);
  const EnergySweep sweep = sweep_and_fit(sq, RadialKernel::gaussian(),
                                          parse_grid("0.15:0.02:log8"), 1500000, 70);
  CHECK(std::abs(sweep.beta_hat - 3.0) < 0.1);
  CHECK(sweep.fit.r2 > 0.999);
  // t comes back sorted decreasing
  for (std::size_t i = 1; i < sweep.t.size(); ++i) CHECK(sweep.t[i] < sweep.t[i - 1]);
}

TEST_CASE("sweep tracks the snowflake exponent") {
  const SnowflakeSpec spec{3.0, 7, 1.0};
  const Polygon poly = build_snowflake(spec);
  const double beta_ref = 4.0 - std::log(4.0) / std::log(3.0);
  const EnergySweep sweep =
      sweep_and_fit(poly, RadialKernel::gaussian(), parse_grid("0.15:0.015:log8"), 1500000,
                    71, spec.feature_floor(), &beta_ref);
  CHECK(std::abs(sweep.beta_hat - beta_ref) < 0.12);
  CHECK(sweep.has_beta_ref);
  // prefactor series stays within a band (no drift to 0 or infinity)
  double lo = sweep.prefactor.front(), hi = lo;
  for (double p : sweep.prefactor) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK(hi / lo < 3.0);
}

TEST_CASE("sweep refuses t below the feature floor") {
  const SnowflakeSpec spec{3.0, 3, 1.0};
  const Polygon poly = build_snowflake(spec);
  CHECK_THROWS_AS(sweep_and_fit(poly, RadialKernel::gaussian(), parse_grid("0.05:0.01:log4"),
                                1000, 1, spec.feature_floor()),
                  std::invalid_argument);
}

TEST_CASE("renewal identity holds for the classical snowflake") {
  // the G trace runs three log-periods below t0, so the construction needs
  // depth 7 to keep every evaluation above the feature floor
  const SnowflakeSpec spec{3.0, 7, 1.0};
  const RenewalReport rep =
      renewal_check(spec, RadialKernel::gaussian(), 0.15, 3, 600000, 80);
  CHECK(rep.alpha == doctest::Approx(std::log(4.0) / std::log(3.0)).epsilon(1e-12));
  REQUIRE(rep.residual.size() == 3);
  for (std::size_t i = 0; i < rep.residual.size(); ++i) {
    // identity holds within MC noise at the t^4 scale; 5 sigma plus a bias pad
    const double scale = std::pow(rep.t[i], 4);
    CHECK(std::abs(rep.residual[i]) <= 5.0 * rep.residual_se[i] + 50.0 * scale);
  }
  CHECK(rep.g.size() == rep.s_grid.size());
  CHECK(rep.period_amplitude.size() == 3);
  for (double g : rep.g) CHECK(g > 0.0);
}

TEST_CASE("renewal refuses configurations below the feature floor") {
  const SnowflakeSpec spec{3.0, 4, 1.0};
  CHECK_THROWS_AS(renewal_check(spec, RadialKernel::gaussian(), 0.15, 3, 1000, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      renewal_check(SnowflakeSpec{3.0, 7, 1.0}, RadialKernel::gef(), 0.15, 3, 1000, 1),
      std::invalid_argument);
}
