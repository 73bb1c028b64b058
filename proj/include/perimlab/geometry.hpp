#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "perimlab/kernel.hpp"
#include "perimlab/rng.hpp"

namespace perimlab {

struct Box {
  Vec2 lo{0, 0};
  Vec2 hi{0, 0};
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  Box inflated(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class PolygonLocator;

/// Simple closed polygon, vertices normalized to counterclockwise order.
/// Immutable after construction; shares its spatial index across copies, so
/// instances are safe to use from concurrent workers.
class Polygon {
 public:
  explicit Polygon(std::vector<Vec2> vertices, bool validate_simple = true);

  const std::vector<Vec2>& vertices() const { return v_; }
  std::size_t edge_count() const { return v_.size(); }
  double area() const { return area_; }
  double perimeter() const { return perim_; }
  double min_edge_length() const { return min_edge_; }
  const Box& bbox() const { return bbox_; }

  /// Even-odd membership; points within 1e-12 of the boundary count as inside.
  bool contains(Vec2 p) const;
  double distance_to_boundary(Vec2 p) const;
  bool within_distance(Vec2 p, double t) const;

  Polygon scaled_translated(double scale, Vec2 shift) const;

  /// Uniform point by rejection from the bounding box. Increments *attempts per trial.
  Vec2 sample_point(RngStream& rng, std::int64_t* attempts = nullptr) const;

  const PolygonLocator& locator() const { return *loc_; }

 private:
  std::vector<Vec2> v_;
  double area_ = 0.0;
  double perim_ = 0.0;
  double min_edge_ = 0.0;
  Box bbox_;
  std::shared_ptr<const PolygonLocator> loc_;
};

/// Koch-type snowflake family. Each edge of length L is replaced by four edges of
/// lengths r1 L, r2 L, r2 L, r1 L with r1 = (eta-1)/(2 eta), r2 = 1/eta and the middle
/// bump erected outward; eta = 3 is the classical snowflake.
struct SnowflakeSpec {
  double eta = 3.0;
  int depth = 0;
  double side = 1.0;

  double r1() const { return (eta - 1.0) / (2.0 * eta); }
  double r2() const { return 1.0 / eta; }
  double min_edge() const;
  double max_edge() const;
  /// scale below which a finite-depth polygon stops resembling the limit set
  double feature_floor() const { return 5.0 * max_edge(); }
  void validate() const;
};

/// 3 * 4^depth edges; exact affine recursion on edge frames (no accumulated trig).
Polygon build_snowflake(const SnowflakeSpec& spec);

Polygon make_square(double side = 1.0, Vec2 corner = {0, 0});
Polygon make_regular_ngon(double radius, int sides = 256, Vec2 center = {0, 0});
/// Half disk bounded by the diameter on the x-axis through `center`.
Polygon make_half_disk(double radius, int sides = 256, bool upper = true, Vec2 center = {0, 0});

/// Closed-form area of the depth-k snowflake: (sqrt(3)/4) side^2 [1 + (3/eta^2)(1-q^k)/(1-q)],
/// q = 2 r1^2 + 2 r2^2. Used as a test oracle against the shoelace value.
double snowflake_area_closed_form(const SnowflakeSpec& spec);
double snowflake_perimeter_closed_form(const SnowflakeSpec& spec);

}  // namespace perimlab
