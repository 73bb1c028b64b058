#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "perimlab/geometry.hpp"
#include "perimlab/reference.hpp"
#include "perimlab/rng.hpp"

using namespace perimlab;
namespace nb = std::numbers;

TEST_CASE("square basics") {
  const Polygon sq = make_square(2.0, {-1.0, -1.0});
  CHECK(sq.area() == doctest::Approx(4.0));
  CHECK(sq.perimeter() == doctest::Approx(8.0));
  CHECK(sq.contains({0.0, 0.0}));
  CHECK_FALSE(sq.contains({1.5, 0.0}));
  CHECK(sq.distance_to_boundary({0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(sq.distance_to_boundary({0.9, 0.0}) == doctest::Approx(0.1));
  // outside points report distance too
  CHECK(sq.distance_to_boundary({2.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("regular polygon approaches the disk") {
  const Polygon disk = make_regular_ngon(1.0, 256);
  const double n = 256.0;
  CHECK(disk.area() == doctest::Approx(0.5 * n * std::sin(2.0 * nb::pi / n)).epsilon(1e-14));
  CHECK(disk.perimeter() ==
        doctest::Approx(2.0 * n * std::sin(nb::pi / n)).epsilon(1e-14));
  // inscribed-polygon area deficit is 2 pi^3 / (3 n^2) ~ 3.155e-4 at n = 256
  CHECK(std::abs(disk.area() - nb::pi) < 3.2e-4);
  CHECK(disk.contains({0.99, 0.0}));
  CHECK_FALSE(disk.contains({1.001, 0.0}));
}

TEST_CASE("half disk splits area and keeps the diameter edge") {
  const Polygon upper = make_half_disk(0.5, 256, true);
  const Polygon lower = make_half_disk(0.5, 256, false);
  CHECK(upper.area() == doctest::Approx(lower.area()).epsilon(1e-14));
  CHECK(std::abs(upper.area() - 0.5 * nb::pi * 0.25) < 1e-4);
  CHECK(upper.contains({0.0, 0.2}));
  CHECK_FALSE(upper.contains({0.0, -0.2}));
  CHECK(lower.contains({0.0, -0.2}));
  // the shared diameter sits on the x axis
  CHECK(upper.distance_to_boundary({0.3, 1e-9}) == doctest::Approx(1e-9).epsilon(0.5));
}

TEST_CASE("snowflake counts and closed forms") {
  for (double eta : {3.0, 5.0}) {
    for (int depth : {0, 1, 2, 3}) {
      const SnowflakeSpec spec{eta, depth, 1.0};
      const Polygon poly = build_snowflake(spec);
      // each edge becomes four
      CHECK(poly.vertices().size() == static_cast<std::size_t>(3ll * (1ll << (2 * depth))));
      CHECK(poly.perimeter() ==
            doctest::Approx(snowflake_perimeter_closed_form(spec)).epsilon(1e-12));
      CHECK(poly.area() == doctest::Approx(snowflake_area_closed_form(spec)).epsilon(1e-12));
    }
  }
}

TEST_CASE("snowflake depth six closed forms at eta three") {
  const SnowflakeSpec spec{3.0, 6, 1.0};
  const Polygon poly = build_snowflake(spec);
  CHECK(poly.vertices().size() == 3u * 4096u);
  // perimeter multiplies by (eta + 1) / eta per level: 3 * (4/3)^6
  CHECK(poly.perimeter() == doctest::Approx(3.0 * std::pow(4.0 / 3.0, 6)).epsilon(1e-12));
  CHECK(std::abs(poly.area() - snowflake_area_closed_form(spec)) < 1e-10);
  // classical Koch: limit area = (2/5) sqrt(3) for unit side at eta = 3 ... partial sums stay below
  CHECK(poly.area() < 2.0 * std::sqrt(3.0) / 5.0);
  CHECK(poly.area() > std::sqrt(3.0) / 4.0);
}

TEST_CASE("scaling and translation are exact on measures") {
  const SnowflakeSpec spec{5.0, 3, 1.0};
  const Polygon poly = build_snowflake(spec);
  const Polygon moved = poly.scaled_translated(2.0, {1.0, -3.0});
  CHECK(moved.area() == doctest::Approx(4.0 * poly.area()).epsilon(1e-14));
  CHECK(moved.perimeter() == doctest::Approx(2.0 * poly.perimeter()).epsilon(1e-14));
  const Box b0 = poly.bbox();
  const Box b1 = moved.bbox();
  CHECK(b1.lo.x == doctest::Approx(2.0 * b0.lo.x + 1.0));
  CHECK(b1.hi.y == doctest::Approx(2.0 * b0.hi.y - 3.0));
}

TEST_CASE("locator agrees with the brute force scan") {
  const SnowflakeSpec spec{3.0, 5, 1.0};
  const Polygon poly = build_snowflake(spec);
  const Box box = poly.bbox();
  RngStream rng(9, "geom-scan", 0);
  for (int i = 0; i < 4000; ++i) {
    const Vec2 p{box.lo.x + rng.u01() * box.width(), box.lo.y + rng.u01() * box.height()};
    CHECK(poly.contains(p) == reference::contains(poly, p));
    const double fast = poly.distance_to_boundary(p);
    const double slow = reference::distance_to_boundary(poly, p);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("feature floor tracks the smallest edge") {
  const SnowflakeSpec spec{5.0, 4, 1.0};
  const Polygon poly = build_snowflake(spec);
  CHECK(spec.min_edge() == doctest::Approx(std::pow(1.0 / 5.0, 4)).epsilon(1e-13));
  CHECK(poly.min_edge_length() == doctest::Approx(spec.min_edge()).epsilon(1e-10));
  CHECK(spec.feature_floor() == doctest::Approx(5.0 * spec.max_edge()).epsilon(1e-13));
  CHECK(spec.max_edge() == doctest::Approx(std::pow(2.0 / 5.0, 4)).epsilon(1e-13));
}

TEST_CASE("degenerate polygons are rejected") {
  CHECK_THROWS_AS(Polygon(std::vector<Vec2>{{0, 0}, {1, 0}}), GeometryError);
  CHECK_THROWS_AS(Polygon(std::vector<Vec2>{{0, 0}, {1, 0}, {1, 0}, {0, 1}}), GeometryError);
  // bowtie self-intersects
  CHECK_THROWS_AS(Polygon(std::vector<Vec2>{{0, 0}, {1, 1}, {1, 0}, {0, 1}}), GeometryError);
  CHECK_THROWS_AS(make_regular_ngon(1.0, 2), GeometryError);
  CHECK_THROWS_AS(build_snowflake(SnowflakeSpec{1.0, 2, 1.0}), GeometryError);
  CHECK_THROWS_AS(build_snowflake(SnowflakeSpec{3.0, -1, 1.0}), GeometryError);
}

TEST_CASE("convex tube closed form matches the square") {
  const Polygon sq = make_square(1.0);
  for (double t : {0.01, 0.05, 0.2}) {
    CHECK(reference::convex_tube_volume(sq, t) ==
          doctest::Approx(8.0 * t + (nb::pi - 4.0) * t * t).epsilon(1e-12));
  }
}
