#pragma once

#include <cstdint>
#include <vector>

#include "perimlab/geometry.hpp"
#include "perimlab/kernel.hpp"
#include "perimlab/stats.hpp"

namespace perimlab {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Interaction energy E(t) = Int_{Omega} Int_{Omega^c} J((x-y)/t) dx dy.
///
/// Monte Carlo with x uniform in Omega (rejection from the bounding box) and the
/// displacement drawn from the normalized kernel: E = t^2 ||J||_1 |Omega| * P(x - t z
/// leaves Omega). Unbiased; stderr from the per-chunk Welford reduction. Nonnegative
/// kernels only; the sign-changing family goes through signed_energy.
Estimate energy_direct_mc(const Polygon& poly, const RadialKernel& kernel, double t,
                          std::int64_t n_samples, std::uint64_t seed);

/// Deterministic-in-structure cross-check of the same integral through the direction-
/// averaged covariogram deficit: tabulates Vbar(rho) = avg_theta |Omega cap (Omega^c +
/// rho e^{i theta})| by MC membership counting at each radial node, then returns
/// t^2 * 2 pi * trapezoid( J(rho) * Vbar(t rho) * rho ) over radial_grid.
/// Throws when the kernel keeps more than 1e-6 of its mass beyond the last node.
double energy_covariogram(const Polygon& poly, const RadialKernel& kernel, double t,
                          const std::vector<double>& radial_grid,
                          std::int64_t angular_samples, std::uint64_t seed);

struct EnergySweep {
  std::vector<double> t;  // decreasing
  std::vector<double> value;
  std::vector<double> se;
  double beta_hat = 0.0;
  double beta_stderr = 0.0;
  LineFit fit;
  double beta_ref = 0.0;          // reference exponent for the prefactor series
  bool has_beta_ref = false;
  std::vector<double> prefactor;  // value[i] / t[i]^beta_ref
};

/// Runs energy_direct_mc on every t and fits log E vs log t. t values must stay
/// above `feature_floor` (0 disables the guard; pass the snowflake feature floor
/// when the polygon approximates a fractal).
EnergySweep sweep_and_fit(const Polygon& poly, const RadialKernel& kernel,
                          const std::vector<double>& t_grid, std::int64_t samples,
                          std::uint64_t seed, double feature_floor = 0.0,
                          const double* beta_ref = nullptr);

struct SignedEnergy {
  Estimate positive;
  Estimate negative;
  Estimate net;  // positive - negative, stderrs combined in quadrature
};

/// Energy for the sign-changing kernel: independent runs on its positive and
/// negative parts.
SignedEnergy signed_energy(const Polygon& poly, double t, std::int64_t samples,
                           std::uint64_t seed);

struct RenewalReport {
  double eta = 0.0;
  double alpha = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  // halving grid t_k = t0 / 2^k with F evaluated at t_k, t_k/r1, t_k/r2
  std::vector<double> t;
  std::vector<double> f, f_se;
  std::vector<double> f_over_r1, f_over_r1_se;
  std::vector<double> f_over_r2, f_over_r2_se;
  // residual of the two-scale identity, R = 2[r1^4 F(t/r1) + r2^4 F(t/r2)] - F(t)
  std::vector<double> residual, residual_se;
  std::vector<double> residual_over_t4;
  bool residual_bounded = false;  // consecutive |R|/t^4 ratios within [0.2, 5]
  // G(s) = e^{(4-alpha)s} F(e^{-s}) on an arithmetic s-grid spanning three
  // log-periods of length ln(eta), six points per period
  std::vector<double> s_grid, g, g_se;
  std::vector<double> period_amplitude;  // max-min of G per period window
};

/// Two-scale self-similarity check for the snowflake boundary block.
///
/// F(t) is the energy with x restricted to one side's block window W (the outward
/// equilateral triangle over a depth-0 side, which meets the boundary exactly in
/// that side's sub-curve) and y unrestricted. W partitions into the four child
/// copies up to a region touching the curve only at junction points, which makes
/// the residual of 2[r1^4 F(t/r1) + r2^4 F(t/r2)] = F(t) of order t^4.
/// Importance sampling concentrates x near the curve through a dilated
/// boundary-cell mask mixed with a 5% uniform-over-W defensive component.
RenewalReport renewal_check(const SnowflakeSpec& spec, const RadialKernel& kernel,
                            double t0, int levels, std::int64_t samples,
                            std::uint64_t seed);

}  // namespace perimlab
