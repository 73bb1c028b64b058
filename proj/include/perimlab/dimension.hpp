#pragma once

#include <cstdint>
#include <vector>

#include "perimlab/geometry.hpp"
#include "perimlab/stats.hpp"

namespace perimlab {

/// Root of 2 r1^a + 2 r2^a = 1 on (1,2) for the snowflake ratios of `eta`.
/// Throws std::domain_error when no root exists there (eta too close to 1,
/// i.e. 2 r1^2 + 2 r2^2 >= 1).
double solve_alpha(double eta);

struct LatticeVerdict {
  enum class Kind { lattice, nonlattice_up_to, undecided };
  Kind kind = Kind::undecided;
  double rho = 0.0;        // log r1 / log r2
  std::int64_t p = 0;      // best convergent p/q with q <= bound
  std::int64_t q = 0;
  double err = 0.0;        // |rho - p/q|
  std::int64_t bound = 0;  // denominator bound that was searched
};

/// Continued-fraction test of rho = log r1 / log r2 (computed in long double).
/// lattice when a convergent with q <= max_denominator matches rho to 10 ulp;
/// nonlattice_up_to otherwise. Never claims irrationality outright.
LatticeVerdict check_nonlattice(double eta, std::int64_t max_denominator = 1000000);

struct TubeEstimate {
  double value = 0.0;
  double se = 0.0;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
};

/// MC estimate of |{x : dist(x, boundary) <= t}| over the bbox inflated by t.
/// Samples are split into fixed-size chunks with derived RNG streams and reduced
/// in chunk order, so the result is bit-identical for any worker count.
TubeEstimate tube_volume(const Polygon& poly, double t, std::int64_t samples,
                         std::uint64_t seed);

struct DimensionFit {
  double alpha_hat = 0.0;
  double slope_stderr = 0.0;
  double content_lower = 0.0;  // min over grid of V(t)/t^(2-alpha_hat)
  double content_upper = 0.0;
  std::vector<double> t_grid;
  std::vector<double> volume;
  std::vector<double> volume_se;
  LineFit fit;  // log V vs log t
};

/// Log-log fit of tube volume against t; alpha_hat = 2 - slope.
/// resolution_floor < 0 selects the default 5 * (shortest polygon edge); fits
/// refuse any t below the floor (below feature scale the polygon reads as
/// dimension 1). Pass 0 for shapes that are exact rather than approximations.
DimensionFit fit_minkowski(const Polygon& poly, const std::vector<double>& t_grid,
                           std::int64_t samples_per_t, std::uint64_t seed,
                           double resolution_floor = -1.0);

}  // namespace perimlab
