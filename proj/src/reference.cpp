#include "perimlab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "perimlab/rng.hpp"

namespace perimlab::reference {

bool contains(const Polygon& poly, Vec2 p) {
  const auto& v = poly.vertices();
  bool in = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xc =
          v[j].x + (v[i].x - v[j].x) * (p.y - v[j].y) / (v[i].y - v[j].y);
      if (p.x < xc) in = !in;
    }
  }
  return in;
}

double distance_to_boundary(const Polygon& poly, Vec2 p) {
  const auto& v = poly.vertices();
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const Vec2 d = v[i] - v[j];
    const double len2 = norm2(d);
    double s = len2 > 0.0 ? dot(p - v[j], d) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    best2 = std::min(best2, norm2(p - (v[j] + s * d)));
  }
  return std::sqrt(best2);
}

Estimate energy_direct_mc_serial(const Polygon& poly, const RadialKernel& kernel,
                                 double t, std::int64_t n_samples, std::uint64_t seed) {
  if (kernel.sign_changing()) {
    throw std::invalid_argument("energy_direct_mc_serial: sign-changing kernel");
  }
  if (!(t > 0.0) || n_samples < 1) {
    throw std::invalid_argument("energy_direct_mc_serial: bad t or sample count");
  }
  const Box box = poly.bbox();
  RngStream rng(derive_stream_seed(seed, "refmc"));
  Welford w;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Vec2 x;
    do {
      x = {rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
    } while (!contains(poly, x));
    const Vec2 z = kernel.sample(rng);
    const Vec2 y = x - t * z;
    w.add(contains(poly, y) ? 0.0 : 1.0);
  }
  const double scale = t * t * kernel.abs_l1() * poly.area();
  return {scale * w.mean, scale * w.sem()};
}

namespace {

// Weighted reproducing kernel K_N(z, w) = (N/pi) e^{-N(|z|^2+|w|^2)/2} sum_{m<N} (N z wbar)^m / m!,
// summed by the stable term recurrence (every term is bounded by a Poisson mass).
std::complex<double> kernel_value(int n, Vec2 z, Vec2 w) {
  const std::complex<double> u(z.x * w.x + z.y * w.y, z.y * w.x - z.x * w.y);
  const double a = 0.5 * (norm2(z) + norm2(w));
  std::complex<double> term = std::exp(-static_cast<double>(n) * a);
  std::complex<double> sum = term;
  for (int m = 1; m < n; ++m) {
    term *= u * (static_cast<double>(n) / m);
    sum += term;
  }
  return (static_cast<double>(n) / std::numbers::pi) * sum;
}

}  // namespace

double kernel_variance_pairwise(int n, const KernelQuadrature& quad) {
  const std::size_t m = quad.nodes.size();
  double trace = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    trace += quad.weights[i] * kernel_value(n, quad.nodes[i], quad.nodes[i]).real();
  }
  double frob = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row += quad.weights[j] * std::norm(kernel_value(n, quad.nodes[i], quad.nodes[j]));
    }
    frob += quad.weights[i] * row;
  }
  return trace - frob;
}

double disk_mean_radial(int n, double radius) {
  const double s = static_cast<double>(n) * radius * radius;
  double mean = 0.0;
  for (int m = 0; m < n; ++m) mean += boost::math::gamma_p(m + 1, s);
  return mean;
}

double disk_variance_radial(int n, double radius) {
  const double s = static_cast<double>(n) * radius * radius;
  double var = 0.0;
  for (int m = 0; m < n; ++m) {
    const double p = boost::math::gamma_p(m + 1, s);
    var += p * (1.0 - p);
  }
  return var;
}

double convex_tube_volume(const Polygon& poly, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("convex_tube_volume: t must be positive");
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  const double scale = std::max(poly.bbox().width(), poly.bbox().height());

  double tan_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 prev = v[(i + n - 1) % n], cur = v[i], next = v[(i + 1) % n];
    const Vec2 e0 = cur - prev, e1 = next - cur;
    const double cr = cross(e0, e1);
    if (cr < -1e-12 * scale * scale) {
      throw GeometryError("convex_tube_volume: polygon is not convex");
    }
    const double turn = std::atan2(cr, dot(e0, e1));  // exterior angle in [0, pi)
    tan_sum += std::tan(0.5 * std::max(0.0, turn));
  }

  // The inner collar formula needs the inward offset polygon to survive: offset each
  // edge line by t, intersect consecutive lines, and demand the result stays convex
  // with edges pointing the original way.
  std::vector<Vec2> off(n);
  for (std::size_t i = 0; i < n; ++i) {
    // inward normals of edges i-1 and i meet at offset vertex i
    const Vec2 a0 = v[(i + n - 1) % n], a1 = v[i], a2 = v[(i + 1) % n];
    const Vec2 d0 = a1 - a0, d1 = a2 - a1;
    const double l0 = std::sqrt(norm2(d0)), l1 = std::sqrt(norm2(d1));
    const Vec2 n0{-d0.y / l0, d0.x / l0}, n1{-d1.y / l1, d1.x / l1};  // inward for ccw
    const double det = cross(d0, d1);
    if (std::fabs(det) < 1e-15 * l0 * l1) {
      off[i] = a1 + t * n0;  // collinear corner, offset straight
      continue;
    }
    // solve p = a1 + t n0 + s d0 = a1 + t n1 + r d1
    const Vec2 rhs = t * (n1 - n0);
    const double s = cross(rhs, d1) / det;
    off[i] = a1 + t * n0 + s * d0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e_orig = v[(i + 1) % n] - v[i];
    const Vec2 e_off = off[(i + 1) % n] - off[i];
    if (dot(e_orig, e_off) <= 0.0) {
      throw GeometryError("convex_tube_volume: t too large for the closed-form collar");
    }
  }

  const double p = poly.perimeter();
  const double outer = p * t + std::numbers::pi * t * t;
  const double inner = p * t - t * t * tan_sum;
  return outer + inner;
}

}  // namespace perimlab::reference
