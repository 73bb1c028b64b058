#include "perimlab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "perimlab/rng.hpp"

namespace perimlab {

double solve_alpha(double eta) {
  if (!(eta > 1.0) || !std::isfinite(eta)) {
    throw std::domain_error("solve_alpha: eta must be a finite number > 1");
  }
  const double r1 = (eta - 1.0) / (2.0 * eta);
  const double r2 = 1.0 / eta;
  const auto phi = [&](double a) { return 2.0 * std::pow(r1, a) + 2.0 * std::pow(r2, a) - 1.0; };
  // phi(1) = 1/eta > 0 always; a root in (1,2) needs phi(2) < 0.
  if (!(phi(2.0) < 0.0)) {
    throw std::domain_error("solve_alpha: 2 r1^2 + 2 r2^2 >= 1, no root in (1,2)");
  }
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  // Newton polish; phi is strictly decreasing on [1,2] here.
  double a = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double f = phi(a);
    if (std::fabs(f) < 1e-14) break;
    const double df =
        2.0 * std::pow(r1, a) * std::log(r1) + 2.0 * std::pow(r2, a) * std::log(r2);
    const double step = f / df;
    const double next = a - step;
    if (!(next > lo && next < hi)) break;
    a = next;
  }
  return a;
}

LatticeVerdict check_nonlattice(double eta, std::int64_t max_denominator) {
  if (!(eta > 1.0) || !std::isfinite(eta)) {
    throw std::domain_error("check_nonlattice: eta must be a finite number > 1");
  }
  if (max_denominator < 1) {
    throw std::invalid_argument("check_nonlattice: max_denominator must be >= 1");
  }
  const long double r1 = (static_cast<long double>(eta) - 1.0L) / (2.0L * eta);
  const long double r2 = 1.0L / static_cast<long double>(eta);
  const long double rho = std::log(r1) / std::log(r2);

  LatticeVerdict out;
  out.rho = static_cast<double>(rho);
  out.bound = max_denominator;

  // Convergents of the continued fraction of rho; keep the best with q <= bound.
  // Seeds p_{-2}/q_{-2} = 0/1, p_{-1}/q_{-1} = 1/0 make the recurrence uniform.
  long double x = rho;
  std::int64_t pm1 = 0, qm1 = 1;
  std::int64_t p0 = 1, q0 = 0;
  long double best_err = std::numeric_limits<long double>::infinity();
  for (int iter = 0; iter < 64; ++iter) {
    const long double fl = std::floor(x);
    if (fl > 4.0e18L) break;
    const auto a = static_cast<std::int64_t>(fl);
    // overflow guard before forming a*p0 + pm1
    if (p0 != 0 && a > (std::numeric_limits<std::int64_t>::max() - std::llabs(pm1)) /
                           std::max<std::int64_t>(1, std::llabs(p0)))
      break;
    if (q0 != 0 &&
        a > (std::numeric_limits<std::int64_t>::max() - qm1) / std::max<std::int64_t>(1, q0))
      break;
    const std::int64_t p = a * p0 + pm1;
    const std::int64_t q = a * q0 + qm1;
    if (q > max_denominator) break;
    const long double err = std::fabs(rho - static_cast<long double>(p) / q);
    if (err < best_err) {
      best_err = err;
      out.p = p;
      out.q = q;
      out.err = static_cast<double>(err);
    }
    pm1 = p0;
    qm1 = q0;
    p0 = p;
    q0 = q;
    const long double frac = x - fl;
    if (frac <= 0.0L) break;  // terminated: rho is exactly rational at this precision
    x = 1.0L / frac;
  }

  const long double ulp_scale =
      std::numeric_limits<long double>::epsilon() * std::max(1.0L, std::fabs(rho));
  out.kind = (out.q > 0 && best_err <= 10.0L * ulp_scale) ? LatticeVerdict::Kind::lattice
                                                          : LatticeVerdict::Kind::nonlattice_up_to;
  return out;
}

TubeEstimate tube_volume(const Polygon& poly, double t, std::int64_t samples,
                         std::uint64_t seed) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("tube_volume: t must be positive");
  }
  if (samples < 1) throw std::invalid_argument("tube_volume: samples must be >= 1");
  const Box box = poly.bbox().inflated(t);
  const double box_area = box.area();
  const auto n_chunks = static_cast<std::int64_t>((samples + kMcChunk - 1) / kMcChunk);
  std::vector<std::int64_t> chunk_hits(static_cast<std::size_t>(n_chunks), 0);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    RngStream rng(derive_stream_seed(seed, "tube", 0, static_cast<std::uint64_t>(c)));
    const std::int64_t lo = c * kMcChunk;
    const std::int64_t hi = std::min(samples, lo + kMcChunk);
    std::int64_t h = 0;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Vec2 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
      if (poly.within_distance(p, t)) ++h;
    }
    chunk_hits[static_cast<std::size_t>(c)] = h;
  }

  std::int64_t hits = 0;
  for (std::int64_t h : chunk_hits) hits += h;
  const double p_hat = static_cast<double>(hits) / static_cast<double>(samples);
  TubeEstimate est;
  est.hits = hits;
  est.samples = samples;
  est.value = box_area * p_hat;
  est.se = box_area * std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) /
                                static_cast<double>(samples));
  return est;
}

DimensionFit fit_minkowski(const Polygon& poly, const std::vector<double>& t_grid,
                           std::int64_t samples_per_t, std::uint64_t seed,
                           double resolution_floor) {
  const double floor_t =
      resolution_floor < 0.0 ? 5.0 * poly.min_edge_length() : resolution_floor;
  if (t_grid.size() < 2) {
    throw std::invalid_argument("fit_minkowski: need at least two t values");
  }
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("fit_minkowski: t values must be positive");
    if (t < floor_t) {
      throw std::invalid_argument("fit_minkowski: t = " + std::to_string(t) +
                                  " is below the resolution floor " + std::to_string(floor_t) +
                                  "; the polygon reads as dimension 1 there");
    }
  }

  DimensionFit out;
  out.t_grid = t_grid;
  std::sort(out.t_grid.begin(), out.t_grid.end(), std::greater<double>());
  out.volume.resize(out.t_grid.size());
  out.volume_se.resize(out.t_grid.size());

  std::vector<double> xs, ys;
  xs.reserve(out.t_grid.size());
  ys.reserve(out.t_grid.size());
  for (std::size_t i = 0; i < out.t_grid.size(); ++i) {
    const TubeEstimate est = tube_volume(
        poly, out.t_grid[i], samples_per_t,
        derive_stream_seed(seed, "minkfit", static_cast<std::uint64_t>(i)));
    out.volume[i] = est.value;
    out.volume_se[i] = est.se;
    if (!(est.value > 0.0)) {
      throw std::runtime_error("fit_minkowski: tube volume estimate vanished at t = " +
                               std::to_string(out.t_grid[i]) + "; raise samples_per_t");
    }
    xs.push_back(std::log(out.t_grid[i]));
    ys.push_back(std::log(est.value));
  }

  out.fit = linear_fit(xs, ys);
  out.alpha_hat = 2.0 - out.fit.slope;
  out.slope_stderr = out.fit.slope_stderr;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < out.t_grid.size(); ++i) {
    const double c = out.volume[i] / std::pow(out.t_grid[i], 2.0 - out.alpha_hat);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  out.content_lower = lo;
  out.content_upper = hi;
  return out;
}

}  // namespace perimlab
