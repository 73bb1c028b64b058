#pragma once

#include <cstdint>
#include <vector>

#include "perimlab/energy.hpp"
#include "perimlab/geometry.hpp"
#include "perimlab/ginibre.hpp"
#include "perimlab/kernel.hpp"

// Serial reference implementations. Each routine here recomputes a quantity the
// optimized code produces, through a structurally different route (brute force
// scans, pairwise kernel sums, closed forms), and exists only to cross-check.
// Nothing in this header is used by the library itself.

namespace perimlab::reference {

/// Point-in-polygon by a direct crossing count over all edges. O(edges).
bool contains(const Polygon& poly, Vec2 p);

/// Distance to the boundary by scanning every segment. O(edges).
double distance_to_boundary(const Polygon& poly, Vec2 p);

/// Single-threaded direct Monte Carlo for the interaction energy. Same
/// estimator as energy_direct_mc but one loop, one RNG stream, no chunking.
Estimate energy_direct_mc_serial(const Polygon& poly, const RadialKernel& kernel,
                                 double t, std::int64_t n_samples, std::uint64_t seed);

/// Var X_N(Omega) by the pairwise route: Int_Omega K_N(x,x) dx minus
/// Int_Omega Int_Omega |K_N(x,y)|^2 dx dy, with K_N evaluated pointwise from
/// the stable gaussian-weighted series. Quadratic in the node count; meant for
/// small N.
double kernel_variance_pairwise(int N, const KernelQuadrature& quad);

/// Var X_N(disk of radius R about 0) from the radial law: the count is a sum of
/// independent Bernoullis with p_m = P(m+1, N R^2) (regularized lower incomplete
/// gamma), so Var = sum p_m (1 - p_m). Exact up to gamma evaluation.
double disk_variance_radial(int N, double radius);

/// Mean of the same count: sum of the p_m.
double disk_mean_radial(int N, double radius);

/// Closed-form area of the two-sided t-neighborhood of a convex polygon's
/// boundary: outer collar P t + pi t^2 plus inner collar P t - t^2 sum_i
/// cot(theta_i / 2), valid for t below the inradius. Throws GeometryError if
/// the polygon is not convex.
double convex_tube_volume(const Polygon& poly, double t);

}  // namespace perimlab::reference
