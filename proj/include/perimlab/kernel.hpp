#pragma once

#include <memory>
#include <string>
#include <vector>

#include "perimlab/rng.hpp"

namespace perimlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }

enum class KernelFamily { gaussian, exponential, ball, gef, gef_positive, gef_negative };

/// Radial interaction kernel J(|z|) on R^n. Families:
///   gaussian      J(r) = exp(-r^2)
///   exponential   J(r) = exp(-r)
///   ball          J(r) = 1{r <= radius}
///   gef           J(r) = (1/2) d^2/dr^2 [ r^2 (coth r - 1) ]   (n = 2 only, changes sign)
/// gef_positive / gef_negative are the clipped parts max(+-J, 0), used for signed sampling.
/// Immutable; cheap to copy.
class RadialKernel {
 public:
  static RadialKernel gaussian(int dim = 2);
  static RadialKernel exponential(int dim = 2);
  static RadialKernel ball(double radius, int dim = 2);
  static RadialKernel gef();

  KernelFamily family() const { return family_; }
  int dim() const { return dim_; }
  std::string name() const;
  bool sign_changing() const { return family_ == KernelFamily::gef; }

  double eval(double r) const;

  /// Signed moment  Int_{R^n} J(|z|) |z|^gamma dz. Closed form where available,
  /// adaptive quadrature otherwise; memoized per (family, dim, param, gamma).
  /// gamma must lie in [0, dim].
  double moment(double gamma) const;

  /// Int |J|; equals moment(0) for the nonnegative families.
  double abs_l1() const;

  /// Draw z ~ J / ||J||_1 (throws for the sign-changing gef; use the parts).
  Vec2 sample(RngStream& rng) const;

  RadialKernel positive_part() const;  // gef only
  RadialKernel negative_part() const;  // gef only

  /// (c_J, a_J) with J >= c_J > 0 on B(0, a_J). Throws for gef (J(0) = -1).
  struct BallBound {
    double c_J;
    double a_J;
  };
  BallBound lower_bound_on_ball() const;

  /// Radius beyond which |J| mass is negligible (exact for ball, effective otherwise).
  double effective_range() const;

 private:
  RadialKernel(KernelFamily f, int dim, double param);
  void build_part_table() const;

  KernelFamily family_;
  int dim_;
  double param_ = 0.0;  // ball radius; unused otherwise

  // inverse-CDF table for gef parts, built lazily
  struct PartTable {
    std::vector<double> r;    // abscissae
    std::vector<double> cdf;  // normalized cumulative of |J(r)| r dr
  };
  mutable std::shared_ptr<PartTable> table_;
};

/// gef sign change location, J(r) < 0 on (0, r*), J(r) > 0 beyond.
double gef_sign_change();

}  // namespace perimlab
