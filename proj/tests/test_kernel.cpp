#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "perimlab/kernel.hpp"
#include "perimlab/rng.hpp"

using namespace perimlab;
namespace nb = std::numbers;

TEST_CASE("gaussian kernel closed forms") {
  const RadialKernel k = RadialKernel::gaussian();
  CHECK(k.eval(0.0) == doctest::Approx(1.0));
  CHECK(k.eval(1.5) == doctest::Approx(std::exp(-2.25)));
  // Int exp(-|z|^2) dz = pi, Int exp(-|z|^2) |z| dz = pi^{3/2} / 2
  CHECK(k.moment(0.0) == doctest::Approx(nb::pi).epsilon(1e-12));
  CHECK(k.moment(1.0) == doctest::Approx(0.5 * std::pow(nb::pi, 1.5)).epsilon(1e-12));
  CHECK(k.abs_l1() == doctest::Approx(k.moment(0.0)));
  CHECK_FALSE(k.sign_changing());
}

TEST_CASE("ball kernel closed forms") {
  const RadialKernel k = RadialKernel::ball(0.5);
  CHECK(k.eval(0.49) == 1.0);
  CHECK(k.eval(0.51) == 0.0);
  CHECK(k.moment(0.0) == doctest::Approx(nb::pi * 0.25).epsilon(1e-14));
  // Int_{|z|<=R} |z| dz = 2 pi R^3 / 3
  CHECK(k.moment(1.0) == doctest::Approx(2.0 * nb::pi * 0.125 / 3.0).epsilon(1e-14));
  CHECK(k.effective_range() == doctest::Approx(0.5));
}

TEST_CASE("exponential kernel moments") {
  const RadialKernel k = RadialKernel::exponential();
  // Int exp(-|z|) dz = 2 pi, Int exp(-|z|) |z| dz = 2 pi Gamma(3) / 2 ... = 4 pi? No:
  // 2 pi Int_0^inf e^{-r} r^{1+gamma} dr = 2 pi Gamma(2 + gamma).
  CHECK(k.moment(0.0) == doctest::Approx(2.0 * nb::pi).epsilon(1e-10));
  CHECK(k.moment(1.0) == doctest::Approx(4.0 * nb::pi).epsilon(1e-10));
}

// Frozen reference values for the sign-changing family, computed once from the
// series coth r - 1 = 2 sum_{k>=1} e^{-2kr} with adaptive quadrature at 1e-14
// target and cross-checked against a 50-digit evaluation.
TEST_CASE("sign-changing kernel frozen values") {
  const RadialKernel k = RadialKernel::gef();
  CHECK(k.eval(1.0) == doctest::Approx(-0.18436952670727014).epsilon(1e-12));
  CHECK(k.eval(0.5) == doctest::Approx(-0.52644619596752903).epsilon(1e-12));
  CHECK(gef_sign_change() == doctest::Approx(1.5430468848087245).epsilon(1e-12));
  CHECK(k.moment(1.0) == doctest::Approx(3.7763731361630789).epsilon(1e-9));
  CHECK(k.abs_l1() == doctest::Approx(3.1992466545870184).epsilon(1e-9));
  CHECK(k.sign_changing());

  const RadialKernel plus = k.positive_part();
  const RadialKernel minus = k.negative_part();
  CHECK(plus.moment(1.0) == doctest::Approx(4.8651276460814117).epsilon(1e-9));
  CHECK(minus.moment(1.0) == doctest::Approx(1.0887545099183328).epsilon(1e-9));
  // parts recombine: m1 = m1+ - m1-
  CHECK(plus.moment(1.0) - minus.moment(1.0) == doctest::Approx(k.moment(1.0)).epsilon(1e-9));
  // J(0) = -1 exactly (the series telescopes)
  CHECK(k.eval(0.0) == doctest::Approx(-1.0).epsilon(1e-12));
  RngStream rng(1, "gef-sample", 0);
  CHECK_THROWS(k.sample(rng));  // must go through the clipped parts
}

TEST_CASE("kernel sampler matches density moments") {
  // E|z| under J / ||J||_1 equals moment(1) / moment(0); MC check at 3 sigma.
  for (const RadialKernel& k :
       {RadialKernel::gaussian(), RadialKernel::ball(0.7), RadialKernel::gef().positive_part()}) {
    RngStream rng(42, "kernel-sample", 0);
    const std::int64_t n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const Vec2 z = k.sample(rng);
      const double r = std::sqrt(norm2(z));
      sum += r;
      sum2 += r * r;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(n));
    const double expect = k.moment(1.0) / k.moment(0.0);
    CHECK(std::abs(mean - expect) <= 3.0 * se + 1e-4 * expect);
  }
}

TEST_CASE("lower bound on a ball is a genuine bound") {
  for (const RadialKernel& k : {RadialKernel::gaussian(), RadialKernel::ball(0.3)}) {
    const auto [c, a] = k.lower_bound_on_ball();
    CHECK(c > 0.0);
    CHECK(a > 0.0);
    for (double r : {0.0, 0.25 * a, 0.5 * a, 0.99 * a}) {
      CHECK(k.eval(r) >= c - 1e-15);
    }
  }
  CHECK_THROWS_AS(RadialKernel::gef().lower_bound_on_ball(), std::domain_error);
}

TEST_CASE("derived streams are decorrelated and reproducible") {
  RngStream a(7, "energy", 3, 0);
  RngStream b(7, "energy", 3, 0);
  RngStream c(7, "energy", 4, 0);
  double first_a = a.u01();
  CHECK(first_a == b.u01());          // same labels, same stream
  CHECK(first_a != c.u01());          // different task index
  CHECK(a.u01() == b.u01());
}
