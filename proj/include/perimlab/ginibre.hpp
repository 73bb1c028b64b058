#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "perimlab/energy.hpp"
#include "perimlab/geometry.hpp"
#include "perimlab/stats.hpp"

namespace perimlab {

struct GinibreConfig {
  int N = 1;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
};

struct CountStats {
  std::vector<int> counts;  // per-trial eigenvalue counts inside the polygon
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;     // unbiased sample variance
  double variance_se = 0.0;  // bootstrap, 1000 resamples
};

/// Eigenvalue Monte Carlo: per trial, an N x N matrix of iid complex Gaussians of
/// variance 1/N is fully diagonalized (dense complex Schur, no Schur vectors) and
/// the eigenvalues inside `poly` are counted. A non-converged factorization is
/// retried with a fresh random diagonal shift (exact on the spectrum), three
/// attempts. Warns to stderr if the polygon is not contained in the unit disk.
CountStats sample_counts(const GinibreConfig& config, const Polygon& poly);

/// Quadrature for the determinantal-kernel integrals: tensor Gauss-Legendre
/// patches over a convex polygon (uniform grid, boundary cells clipped against
/// the polygon and triangulated) plus polar annulus patches covering
/// {lambda <= |x| <= r_cut} of the complement. Patch size tracks the kernel
/// oscillation scale 1/sqrt(N).
struct KernelQuadrature {
  std::vector<Vec2> nodes;     // interior nodes
  std::vector<double> weights;
  std::vector<Vec2> outer_nodes;  // complement annulus nodes
  std::vector<double> outer_weights;
  double lambda = 0.0;    // circumradius of the polygon about the origin
  double r_cut = 1.0;     // max(1, lambda + 6/sqrt(N))
  double rel_tol = 1e-6;  // target relative tolerance of the kernel integrals
  int modes = 0;          // retained mode cutoff M <= N

  // Requires a convex polygon strictly inside the unit disk; throws
  // GeometryError / invalid_argument otherwise, and a runtime error when
  // node_budget cannot support patches fine enough for rel_tol.
  static KernelQuadrature build(const Polygon& poly, int N, double rel_tol = 1e-6,
                                std::int64_t node_budget = 6000000);
};

/// Var X_N(Omega) via the mode compression: with A_{mk} = Int_Omega psi_m
/// conj(psi_k) dmu (Hermitian, 0 <= A <= I, psi_m the normalized monomial
/// modes), the variance equals Tr A - ||A||_F^2. Deterministic given the
/// quadrature (fixed summation order).
double kernel_variance_exact(int N, const Polygon& poly, const KernelQuadrature& quad);

/// Asymptotic surrogate (N/pi)^2 * E_t(Omega) at t = 1/sqrt(N) with the gaussian
/// kernel, evaluated by energy_direct_mc. Estimate of the same boundary-dominated
/// variance without any N x N linear algebra.
Estimate gaussian_approx_variance(int N, const Polygon& poly, std::int64_t samples,
                                  std::uint64_t seed);

struct RemainderProbe {
  Vec2 z, w;
  double rho = 0.0;  // scaled remainder at the largest N
};

struct RemainderReport {
  std::vector<int> n_values;
  std::vector<double> max_scaled;  // max over probes of rho_N
  double rate = 0.0;               // fitted geometric decay ratio per unit N
  double rate_bound = 0.0;         // delta(lambda) + 0.02 admissible ceiling
  bool pass = false;
  std::vector<RemainderProbe> probes;
};

/// Truncation remainder of the exponential kernel on probe pairs drawn uniformly
/// from the disk of radius `lambda` < 1:
///   rho_N(z, w) = |e^{N z wbar} - sum_{m<N} (N z wbar)^m / m!| * sqrt(N) * e^{-N|z||w|},
/// evaluated without cancellation by continuing the scaled term recurrence past
/// m = N (every scaled term is bounded by a Poisson mass). Fits log of the probe
/// maximum against N; the geometric rate must stay below
/// delta(lambda) + 0.02 with delta(x) = x e^{1-x}.
RemainderReport remainder_check(double lambda, const std::vector<int>& n_values,
                                int probe_pairs, std::uint64_t seed);

enum class VarianceMethod { exact_kernel, eigen_mc, gaussian_approx };

struct ScalingPoint {
  int N = 0;
  double variance = 0.0;
  double se = 0.0;  // 0 for deterministic routes
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  std::vector<double> prefactor_series;  // Var / N^{alpha_ref/2} per point
  LineFit fit;                           // log variance vs log N
  double exponent = 0.0;                 // fitted d log Var / d log N
  double exponent_se = 0.0;
  double prefactor_extrapolated = 0.0;   // intercept of prefactor vs 1/sqrt(N)
  bool has_alpha_ref = false;
};

/// Fits Var X_N ~ C N^{alpha/2} over `n_grid`. `alpha_ref`, when given, pins the
/// exponent used for the prefactor series (otherwise the fitted one is used).
/// `budget` is per grid point, in the method's own unit: trials for eigen_mc,
/// quadrature nodes for exact_kernel, MC samples for gaussian_approx.
ScalingFit variance_scaling_fit(const Polygon& poly, const std::vector<int>& n_grid,
                                VarianceMethod method, std::int64_t budget,
                                std::uint64_t seed, const double* alpha_ref = nullptr);

struct CltReport {
  double mean = 0.0;
  double variance = 0.0;
  double ks_statistic = 0.0;
  double p_value = 0.0;
  std::int64_t trials = 0;
};

/// Kolmogorov-Smirnov test of the standardized counts against N(0,1). With
/// `negative_control` the per-trial statistic is the squared count, which is
/// far from Gaussian and must be rejected. Throws std::invalid_argument for
/// trials < 500 or zero sample variance.
CltReport clt_test(const GinibreConfig& config, const Polygon& poly,
                   bool negative_control = false);

struct CovarianceReport {
  double covariance = 0.0;  // = -Tr(A1 A2), nonpositive
  double scaled = 0.0;      // |covariance| / sqrt(N)
  double hermiticity_defect = 0.0;
  bool disjoint_interiors = false;
};

/// Cov(X_N(Omega1), X_N(Omega2)) for polygons with disjoint interiors:
/// -Int_{Omega1} Int_{Omega2} |K_N|^2. Requires disjoint interiors (shared
/// boundary arcs are fine); throws GeometryError otherwise.
CovarianceReport covariance_two_sets(int N, const Polygon& poly1, const Polygon& poly2,
                                     std::int64_t node_budget = 6000000);

struct SobolevPoint {
  int N = 0;
  double variance = 0.0;
};

struct SobolevReport {
  std::vector<SobolevPoint> points;
  double limit = 0.0;       // (1/4pi) Int |grad phi|^2 target
  double final_value = 0.0;
  double final_rel_err = 0.0;
  bool cauchy = false;      // consecutive gaps shrink
};

/// Variance of the smooth linear statistic phi(x) = scale * exp(1 - 1/(1 -
/// |x-c|^2/rho^2)) on |x-c| < rho (zero outside), against the H^1 limit
/// (1/4pi) Int |grad phi|^2. The bump must stay strictly inside the unit disk;
/// throws std::domain_error if it touches the circle. Var = Tr Phi_2 - ||Phi||_F^2
/// with Phi_{mk} = Int phi psi_m conj(psi_k) dmu and Phi_2 its phi^2 analogue.
SobolevReport sobolev_variance_check(Vec2 bump_center, double bump_radius,
                                     const std::vector<int>& n_grid,
                                     double scale = 1.0);

}  // namespace perimlab
