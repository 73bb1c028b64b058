#include "perimlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "perimlab/locator.hpp"

namespace perimlab {

Polygon::Polygon(std::vector<Vec2> vertices, bool validate_simple) : v_(std::move(vertices)) {
  const std::size_t n = v_.size();
  if (n < 3) throw GeometryError("polygon: need at least 3 vertices, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v_[i], b = v_[(i + 1) % n];
    if (a.x == b.x && a.y == b.y)
      throw GeometryError("polygon: duplicate consecutive vertex at index " + std::to_string(i));
    if (!std::isfinite(a.x) || !std::isfinite(a.y))
      throw GeometryError("polygon: non-finite vertex at index " + std::to_string(i));
  }

  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) s2 += cross(v_[i], v_[(i + 1) % n]);
  if (s2 == 0.0) throw GeometryError("polygon: degenerate (zero signed area)");
  if (s2 < 0.0) std::reverse(v_.begin(), v_.end());
  area_ = 0.5 * std::abs(s2);

  bbox_ = {v_[0], v_[0]};
  min_edge_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    bbox_.lo.x = std::min(bbox_.lo.x, v_[i].x);
    bbox_.lo.y = std::min(bbox_.lo.y, v_[i].y);
    bbox_.hi.x = std::max(bbox_.hi.x, v_[i].x);
    bbox_.hi.y = std::max(bbox_.hi.y, v_[i].y);
    const double len = std::sqrt(norm2(v_[(i + 1) % n] - v_[i]));
    perim_ += len;
    min_edge_ = std::min(min_edge_, len);
  }

  loc_ = std::make_shared<const PolygonLocator>(v_, bbox_);
  if (validate_simple) {
    const auto [e, f] = loc_->first_intersection();
    if (e >= 0)
      throw GeometryError("polygon: self-intersection between edges " + std::to_string(e) +
                          " and " + std::to_string(f));
  }
}

bool Polygon::contains(Vec2 p) const {
  if (loc_->within(p, 1e-12)) return true;
  return loc_->contains(p);
}

double Polygon::distance_to_boundary(Vec2 p) const { return loc_->distance(p); }

bool Polygon::within_distance(Vec2 p, double t) const { return loc_->within(p, t); }

Polygon Polygon::scaled_translated(double scale, Vec2 shift) const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw GeometryError("polygon: scale must be positive and finite");
  std::vector<Vec2> w(v_.size());
  for (std::size_t i = 0; i < v_.size(); ++i) w[i] = scale * v_[i] + shift;
  return Polygon(std::move(w), /*validate_simple=*/false);
}

Vec2 Polygon::sample_point(RngStream& rng, std::int64_t* attempts) const {
  for (std::int64_t k = 0; k < (std::int64_t)1e9; ++k) {
    const Vec2 p = {rng.uniform(bbox_.lo.x, bbox_.hi.x), rng.uniform(bbox_.lo.y, bbox_.hi.y)};
    if (attempts) ++*attempts;
    if (loc_->contains(p)) return p;
  }
  throw GeometryError("polygon: rejection sampling failed (degenerate area fraction)");
}

double SnowflakeSpec::min_edge() const { return std::pow(std::min(r1(), r2()), depth) * side; }
double SnowflakeSpec::max_edge() const { return std::pow(std::max(r1(), r2()), depth) * side; }

void SnowflakeSpec::validate() const {
  if (!(eta > 1.0) || !std::isfinite(eta))
    throw GeometryError("snowflake: eta must be finite and > 1 (got " + std::to_string(eta) + ")");
  if (depth < 0 || depth > 12)
    throw GeometryError("snowflake: depth must lie in [0, 12] (got " + std::to_string(depth) + ")");
  if (!(side > 0.0) || !std::isfinite(side))
    throw GeometryError("snowflake: side must be positive and finite");
}

Polygon build_snowflake(const SnowflakeSpec& spec) {
  spec.validate();
  const double r1 = spec.r1(), r2 = spec.r2();
  const double rot_c = 0.5, rot_s = -std::sqrt(3.0) / 2.0;  // Rot(-60 deg): outward for CCW loops

  std::vector<Vec2> cur = {{0.0, 0.0},
                           {spec.side, 0.0},
                           {spec.side / 2.0, spec.side * std::sqrt(3.0) / 2.0}};
  for (int level = 0; level < spec.depth; ++level) {
    std::vector<Vec2> next;
    next.reserve(cur.size() * 4);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Vec2 p = cur[i], q = cur[(i + 1) % cur.size()];
      const Vec2 d = q - p;
      const Vec2 a = p + r1 * d;
      const Vec2 c = p + (r1 + r2) * d;
      const Vec2 ac = c - a;
      const Vec2 b = {a.x + rot_c * ac.x - rot_s * ac.y, a.y + rot_s * ac.x + rot_c * ac.y};
      next.push_back(p);
      next.push_back(a);
      next.push_back(b);
      next.push_back(c);
    }
    cur = std::move(next);
  }
  return Polygon(std::move(cur));
}

Polygon make_square(double side, Vec2 corner) {
  if (!(side > 0.0)) throw GeometryError("square: side must be positive");
  return Polygon({corner,
                  corner + Vec2{side, 0.0},
                  corner + Vec2{side, side},
                  corner + Vec2{0.0, side}},
                 /*validate_simple=*/false);
}

Polygon make_regular_ngon(double radius, int sides, Vec2 center) {
  if (!(radius > 0.0)) throw GeometryError("ngon: radius must be positive");
  if (sides < 3) throw GeometryError("ngon: need at least 3 sides");
  std::vector<Vec2> v(sides);
  for (int k = 0; k < sides; ++k) {
    const double a = 2.0 * M_PI * k / sides;
    v[k] = center + radius * Vec2{std::cos(a), std::sin(a)};
  }
  return Polygon(std::move(v), /*validate_simple=*/false);
}

Polygon make_half_disk(double radius, int sides, bool upper, Vec2 center) {
  if (!(radius > 0.0)) throw GeometryError("half_disk: radius must be positive");
  if (sides < 2) throw GeometryError("half_disk: need at least 2 arc segments");
  std::vector<Vec2> v(sides + 1);
  const double a0 = upper ? 0.0 : M_PI;
  for (int k = 0; k <= sides; ++k) {
    const double a = a0 + M_PI * k / sides;
    v[k] = center + radius * Vec2{std::cos(a), std::sin(a)};
  }
  return Polygon(std::move(v), /*validate_simple=*/false);
}

double snowflake_area_closed_form(const SnowflakeSpec& spec) {
  const double r1 = spec.r1(), r2 = spec.r2();
  const double q = 2.0 * r1 * r1 + 2.0 * r2 * r2;
  const double base = std::sqrt(3.0) / 4.0 * spec.side * spec.side;
  const double gsum =
      std::abs(q - 1.0) < 1e-14 ? spec.depth : (1.0 - std::pow(q, spec.depth)) / (1.0 - q);
  return base * (1.0 + 3.0 * r2 * r2 * gsum);
}

double snowflake_perimeter_closed_form(const SnowflakeSpec& spec) {
  return 3.0 * spec.side * std::pow((spec.eta + 1.0) / spec.eta, spec.depth);
}

}  // namespace perimlab
