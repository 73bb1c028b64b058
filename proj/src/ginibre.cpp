#include "perimlab/ginibre.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "perimlab/rng.hpp"

namespace perimlab {

namespace {

// Gauss-Legendre 7 on [-1, 1]
constexpr double kGlX[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                            0.0,                 0.4058451513773972,  0.7415311855993945,
                            0.9491079123427585};
constexpr double kGlW[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                            0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                            0.1294849661688697};

double circumradius(const Polygon& poly) {
  double r2 = 0.0;
  for (const Vec2& v : poly.vertices()) r2 = std::max(r2, norm2(v));
  return std::sqrt(r2);
}

void require_in_unit_disk(const Polygon& poly, const char* who) {
  if (circumradius(poly) >= 1.0) {
    throw std::invalid_argument(std::string(who) + ": polygon closure must lie inside the unit disk");
  }
}

// Modes m >= N lambda^2 + 10 sqrt(N lambda^2) + 25 hold a 10-sigma-negligible share
// of the counting measure on B(0, lambda); truncating there keeps the dropped trace
// far below every tolerance used here.
int mode_cutoff(int n, double lambda) {
  const double s = static_cast<double>(n) * lambda * lambda;
  const double m = s + 10.0 * std::sqrt(s) + 25.0;
  return static_cast<int>(std::min(static_cast<double>(n), std::ceil(m)));
}

void check_convex(const Polygon& poly, const char* who) {
  const auto& v = poly.vertices();
  const double scale = std::max(poly.bbox().width(), poly.bbox().height());
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = v[i] - v[(i + n - 1) % n];
    const Vec2 e1 = v[(i + 1) % n] - v[i];
    if (cross(e0, e1) < -1e-12 * scale * scale) {
      throw GeometryError(std::string(who) + ": polygon must be convex");
    }
  }
}

// convex clip of a polygon chain against one directed edge (keep left side)
void clip_chain(std::vector<Vec2>& pts, Vec2 a, Vec2 d, std::vector<Vec2>& tmp) {
  tmp.clear();
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = pts[i], q = pts[(i + 1) % n];
    const double sp = cross(d, p - a), sq = cross(d, q - a);
    if (sp >= 0.0) {
      tmp.push_back(p);
      if (sq < 0.0) tmp.push_back(p + (sp / (sp - sq)) * (q - p));
    } else if (sq >= 0.0) {
      tmp.push_back(p + (sp / (sp - sq)) * (q - p));
    }
  }
  pts.swap(tmp);
}

void push_triangle_nodes(Vec2 a, Vec2 b, Vec2 c, std::vector<Vec2>& nodes,
                         std::vector<double>& weights) {
  const double area2 = cross(b - a, c - b);  // 2 * signed area
  if (std::fabs(area2) <= 0.0) return;
  for (int i = 0; i < 7; ++i) {
    const double u = 0.5 * (kGlX[i] + 1.0);
    for (int j = 0; j < 7; ++j) {
      const double v = 0.5 * (kGlX[j] + 1.0);
      nodes.push_back(a + u * ((b - a) + v * (c - b)));
      weights.push_back(kGlW[i] * kGlW[j] * 0.25 * u * std::fabs(area2));
    }
  }
}

}  // namespace

KernelQuadrature KernelQuadrature::build(const Polygon& poly, int n, double rel_tol,
                                         std::int64_t node_budget) {
  if (n < 1) throw std::invalid_argument("KernelQuadrature: N must be >= 1");
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-2)) {
    throw std::invalid_argument("KernelQuadrature: rel_tol must lie in [1e-12, 1e-2]");
  }
  if (node_budget < 10000) throw std::invalid_argument("KernelQuadrature: node budget too small");
  check_convex(poly, "KernelQuadrature");
  require_in_unit_disk(poly, "KernelQuadrature");

  KernelQuadrature quad;
  quad.rel_tol = rel_tol;
  quad.lambda = circumradius(poly);
  quad.r_cut = std::max(1.0, quad.lambda + 6.0 / std::sqrt(static_cast<double>(n)));
  quad.modes = mode_cutoff(n, quad.lambda);

  // Patch size tracks the fastest kernel oscillation, wavelength ~ 2 pi / (N lambda);
  // degree-7 panels near one wavelength per patch reach ~1e-6, and the patch count
  // grows like tol^{-1/14} beyond that.
  const Box box = poly.bbox();
  const double h_osc = 6.0 / (static_cast<double>(n) * std::max(quad.lambda, 1e-3));
  const double h_tol =
      h_osc * std::clamp(std::pow(rel_tol / 1e-6, 1.0 / 14.0), 0.3, 3.0);
  double h = std::min(h_tol, std::max(box.width(), box.height()) / 4.0);
  const double h_budget =
      std::sqrt(49.0 * box.area() / (0.5 * static_cast<double>(node_budget)));
  if (h_budget > h) {
    if (h_budget > 2.5 * h_tol) {
      throw std::runtime_error(
          "KernelQuadrature: node budget cannot reach the requested tolerance");
    }
    h = h_budget;
  }

  const int nx = std::max(1, static_cast<int>(std::ceil(box.width() / h)));
  const int ny = std::max(1, static_cast<int>(std::ceil(box.height() / h)));
  const double cw = box.width() / nx, ch = box.height() / ny;

  std::vector<Vec2> pts, tmp;
  const auto& verts = poly.vertices();
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double x0 = box.lo.x + ix * cw, x1 = box.lo.x + (ix + 1) * cw;
      const double y0 = box.lo.y + iy * ch, y1 = box.lo.y + (iy + 1) * ch;
      const bool in00 = poly.contains({x0, y0}), in10 = poly.contains({x1, y0});
      const bool in11 = poly.contains({x1, y1}), in01 = poly.contains({x0, y1});
      if (in00 && in10 && in11 && in01) {
        // convex polygon containing all four corners contains the whole cell
        for (int i = 0; i < 7; ++i) {
          const double x = 0.5 * (x0 + x1) + 0.5 * cw * kGlX[i];
          for (int j = 0; j < 7; ++j) {
            quad.nodes.push_back({x, 0.5 * (y0 + y1) + 0.5 * ch * kGlX[j]});
            quad.weights.push_back(kGlW[i] * kGlW[j] * 0.25 * cw * ch);
          }
        }
        continue;
      }
      // boundary (or outside) cell: clip the rectangle against every polygon edge
      pts.assign({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
      for (std::size_t e = 0; e < verts.size() && !pts.empty(); ++e) {
        clip_chain(pts, verts[e], verts[(e + 1) % verts.size()] - verts[e], tmp);
      }
      if (pts.size() < 3) continue;
      double area2 = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        area2 += cross(pts[i], pts[(i + 1) % pts.size()]);
      }
      if (std::fabs(area2) * 0.5 <= 1e-14 * cw * ch) continue;
      for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
        push_triangle_nodes(pts[0], pts[i + 1], pts[i + 2], quad.nodes, quad.weights);
      }
    }
  }

  // complement factor: polar panels on the annulus lambda <= r <= r_cut
  const double rad = quad.r_cut - quad.lambda;
  if (rad > 0.0) {
    const int nr = std::max(2, static_cast<int>(std::ceil(rad / h)));
    const int nt = std::max(
        8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * quad.r_cut / h)));
    const double dr = rad / nr, dt = 2.0 * std::numbers::pi / nt;
    for (int ir = 0; ir < nr; ++ir) {
      const double rc = quad.lambda + (ir + 0.5) * dr;
      for (int it = 0; it < nt; ++it) {
        const double tc = (it + 0.5) * dt;
        for (int i = 0; i < 7; ++i) {
          const double r = rc + 0.5 * dr * kGlX[i];
          for (int j = 0; j < 7; ++j) {
            const double th = tc + 0.5 * dt * kGlX[j];
            quad.outer_nodes.push_back({r * std::cos(th), r * std::sin(th)});
            quad.outer_weights.push_back(kGlW[i] * kGlW[j] * 0.25 * dr * dt * r);
          }
        }
      }
    }
  }
  return quad;
}

namespace {

struct GramTask {
  Eigen::MatrixXcd* out;                  // modes x modes, zero-initialized
  const std::vector<double>* node_scale;  // nullptr for unit scaling
};

// out += V^H diag(scale) V over node blocks, V_{x,m} = sqrt(w_x) psi_m(x) with the
// normalized modes psi_m(z) = sqrt(N^{m+1}/(pi m!)) z^m e^{-N|z|^2/2}, evaluated by
// the upward term recurrence (every magnitude stays below sqrt(N/pi)).
void accumulate_grams(const std::vector<Vec2>& nodes, const std::vector<double>& weights,
                      int n, int modes, const std::vector<GramTask>& tasks) {
  constexpr int kBlock = 8192;
  std::vector<double> fac(static_cast<std::size_t>(modes));
  for (int m = 0; m < modes; ++m) {
    fac[static_cast<std::size_t>(m)] = std::sqrt(static_cast<double>(n) / (m + 1));
  }
  const double c0 = std::sqrt(static_cast<double>(n) / std::numbers::pi);
  Eigen::MatrixXcd v(kBlock, modes), scaled(kBlock, modes);
  for (std::size_t base = 0; base < nodes.size(); base += kBlock) {
    const int b = static_cast<int>(std::min<std::size_t>(kBlock, nodes.size() - base));
    for (int r = 0; r < b; ++r) {
      const Vec2 p = nodes[base + static_cast<std::size_t>(r)];
      const std::complex<double> z(p.x, p.y);
      std::complex<double> t =
          c0 * std::exp(-0.5 * n * norm2(p)) *
          std::sqrt(weights[base + static_cast<std::size_t>(r)]);
      for (int m = 0; m < modes; ++m) {
        v(r, m) = t;
        t *= z * fac[static_cast<std::size_t>(m)];
      }
    }
    const auto vb = v.topRows(b);
    for (const GramTask& task : tasks) {
      if (task.node_scale == nullptr) {
        task.out->noalias() += vb.adjoint() * vb;
      } else {
        const Eigen::Map<const Eigen::VectorXd> s(task.node_scale->data() + base, b);
        scaled.topRows(b) = s.asDiagonal() * vb;
        task.out->noalias() += vb.adjoint() * scaled.topRows(b);
      }
    }
  }
}

Eigen::MatrixXcd gram_matrix(const KernelQuadrature& quad, int n, int modes) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(modes, modes);
  std::vector<GramTask> tasks{{&a, nullptr}};
  accumulate_grams(quad.nodes, quad.weights, n, modes, tasks);
  return a;
}

}  // namespace

double kernel_variance_exact(int n, const Polygon& poly, const KernelQuadrature& quad) {
  if (n < 1) throw std::invalid_argument("kernel_variance_exact: N must be >= 1");
  require_in_unit_disk(poly, "kernel_variance_exact");
  const int modes = std::min(quad.modes > 0 ? quad.modes : n, n);
  const Eigen::MatrixXcd a = gram_matrix(quad, n, modes);
  // 0 <= A <= I; the variance is Tr A - Tr A^2 = Tr A - ||A||_F^2
  return a.trace().real() - a.squaredNorm();
}

Estimate gaussian_approx_variance(int n, const Polygon& poly, std::int64_t samples,
                                  std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gaussian_approx_variance: N must be >= 1");
  const double t = 1.0 / std::sqrt(static_cast<double>(n));
  const Estimate e = energy_direct_mc(poly, RadialKernel::gaussian(), t, samples, seed);
  const double scale = std::pow(static_cast<double>(n) / std::numbers::pi, 2);
  return {scale * e.value, scale * e.se};
}

CountStats sample_counts(const GinibreConfig& config, const Polygon& poly) {
  if (config.N < 1) throw std::invalid_argument("sample_counts: N must be >= 1");
  if (config.trials < 1) throw std::invalid_argument("sample_counts: trials must be >= 1");
  if (circumradius(poly) > 1.0 + 1e-9) {
    std::fprintf(stderr,
                 "sample_counts: warning: polygon leaves the unit disk; "
                 "bulk eigenvalue statistics will not apply\n");
  }

  const int n = config.N;
  const double sigma = 1.0 / std::sqrt(2.0 * n);
  std::vector<int> counts(static_cast<std::size_t>(config.trials), 0);
  bool solver_failed = false;  // OMP reduction, can't throw inside the region

#pragma omp parallel for schedule(dynamic) reduction(|| : solver_failed)
  for (std::int64_t trial = 0; trial < config.trials; ++trial) {
    RngStream rng(derive_stream_seed(config.seed, "ginibre", 0,
                                     static_cast<std::uint64_t>(trial)));
    Eigen::MatrixXcd g(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        g(r, c) = std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
      }
    }
    std::complex<double> shift(0.0, 0.0);
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur;
    bool ok = false;
    for (int attempt = 0; attempt < 3; ++attempt) {
      schur.compute(g, /*computeU=*/false);
      if (schur.info() == Eigen::Success) {
        ok = true;
        break;
      }
      // shifting the matrix moves the spectrum exactly; undone when counting
      const std::complex<double> s(1e-3 * rng.normal(), 1e-3 * rng.normal());
      g.diagonal().array() += s;
      shift += s;
    }
    if (!ok) {
      solver_failed = true;
      continue;
    }
    int inside = 0;
    for (int i = 0; i < n; ++i) {
      const std::complex<double> lam = schur.matrixT()(i, i) - shift;
      if (poly.contains({lam.real(), lam.imag()})) ++inside;
    }
    counts[static_cast<std::size_t>(trial)] = inside;
  }
  if (solver_failed) {
    throw std::runtime_error("sample_counts: eigensolver failed to converge after 3 attempts");
  }

  CountStats stats;
  stats.counts = std::move(counts);
  Welford w;
  for (int c : stats.counts) w.add(static_cast<double>(c));
  stats.mean = w.mean;
  stats.variance = w.variance();
  stats.mean_se = w.sem();

  std::vector<std::int64_t> hist(static_cast<std::size_t>(n) + 1, 0);
  for (int c : stats.counts) ++hist[static_cast<std::size_t>(c)];
  RngStream boot(derive_stream_seed(config.seed, "ginboot"));
  const BootstrapCi ci = bootstrap_variance_ci(hist, 0, 1000, 0.6827, boot);
  stats.variance_se = 0.5 * (ci.hi - ci.lo);
  return stats;
}

RemainderReport remainder_check(double lambda, const std::vector<int>& n_values,
                                int probe_pairs, std::uint64_t seed) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("remainder_check: lambda must lie in (0,1)");
  }
  if (n_values.size() < 2) {
    throw std::invalid_argument("remainder_check: need at least two N values");
  }
  if (probe_pairs < 1) throw std::invalid_argument("remainder_check: probe_pairs must be >= 1");

  RemainderReport rep;
  rep.n_values = n_values;
  std::sort(rep.n_values.begin(), rep.n_values.end());
  rep.rate_bound = lambda * std::exp(1.0 - lambda) + 0.02;

  RngStream rng(derive_stream_seed(seed, "remainder"));
  rep.probes.resize(static_cast<std::size_t>(probe_pairs));
  for (RemainderProbe& probe : rep.probes) {
    const double rz = lambda * std::sqrt(rng.u01()), az = rng.uniform(0.0, 2 * std::numbers::pi);
    const double rw = lambda * std::sqrt(rng.u01()), aw = rng.uniform(0.0, 2 * std::numbers::pi);
    probe.z = {rz * std::cos(az), rz * std::sin(az)};
    probe.w = {rw * std::cos(aw), rw * std::sin(aw)};
  }

  rep.max_scaled.resize(rep.n_values.size(), 0.0);
  for (std::size_t k = 0; k < rep.n_values.size(); ++k) {
    const int n = rep.n_values[k];
    if (n < 1) throw std::invalid_argument("remainder_check: N values must be >= 1");
    double worst = 0.0;
    for (RemainderProbe& probe : rep.probes) {
      const Vec2 z = probe.z, w = probe.w;
      const std::complex<double> u(z.x * w.x + z.y * w.y, z.y * w.x - z.x * w.y);
      const double a = std::sqrt(norm2(z)) * std::sqrt(norm2(w));  // = |z w conj| bound
      // scaled terms sigma_m = e^{-N a} (N u)^m / m!; |sigma_m| <= Poisson(m; Na) <= 1.
      // The scaled remainder is the tail sum from m = N on, no cancellation involved.
      std::complex<double> term = std::exp(-static_cast<double>(n) * a);
      for (int m = 1; m < n; ++m) term *= u * (static_cast<double>(n) / m);
      std::complex<double> tail(0.0, 0.0);
      const int m_cap = n + 4000 + 20 * static_cast<int>(std::sqrt(static_cast<double>(n)));
      for (int m = n; m <= m_cap; ++m) {
        term *= u * (static_cast<double>(n) / m);
        tail += term;
        if (std::abs(term) < 1e-24 * std::abs(tail) + 1e-300) break;
      }
      const double rho = std::abs(tail) * std::sqrt(static_cast<double>(n));
      probe.rho = rho;
      worst = std::max(worst, rho);
    }
    rep.max_scaled[k] = worst;
  }

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < rep.n_values.size(); ++k) {
    if (rep.max_scaled[k] > 0.0) {
      xs.push_back(static_cast<double>(rep.n_values[k]));
      ys.push_back(std::log(rep.max_scaled[k]));
    }
  }
  if (xs.size() >= 2) {
    rep.rate = std::exp(linear_fit(xs, ys).slope);
    rep.pass = rep.rate <= rep.rate_bound;
  } else {
    rep.rate = 0.0;   // remainders vanished identically (e.g. probes at the origin)
    rep.pass = true;
  }
  return rep;
}

ScalingFit variance_scaling_fit(const Polygon& poly, const std::vector<int>& n_grid,
                                VarianceMethod method, std::int64_t budget,
                                std::uint64_t seed, const double* alpha_ref) {
  if (n_grid.size() < 2) {
    throw std::invalid_argument("variance_scaling_fit: need at least two N values");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
      throw std::invalid_argument("variance_scaling_fit: N grid must be increasing and >= 1");
    }
  }
  require_in_unit_disk(poly, "variance_scaling_fit");

  ScalingFit out;
  out.points.resize(n_grid.size());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const int n = n_grid[i];
    ScalingPoint& pt = out.points[i];
    pt.N = n;
    switch (method) {
      case VarianceMethod::exact_kernel: {
        const KernelQuadrature quad = KernelQuadrature::build(poly, n, 1e-6, budget);
        pt.variance = kernel_variance_exact(n, poly, quad);
        pt.se = 0.0;
        break;
      }
      case VarianceMethod::eigen_mc: {
        GinibreConfig cfg;
        cfg.N = n;
        cfg.trials = budget;
        cfg.seed = derive_stream_seed(seed, "scalemc", static_cast<std::uint64_t>(i));
        const CountStats cs = sample_counts(cfg, poly);
        pt.variance = cs.variance;
        pt.se = cs.variance_se;
        break;
      }
      case VarianceMethod::gaussian_approx: {
        const Estimate e = gaussian_approx_variance(
            n, poly, budget, derive_stream_seed(seed, "scalega", static_cast<std::uint64_t>(i)));
        pt.variance = e.value;
        pt.se = e.se;
        break;
      }
    }
    if (!(pt.variance > 0.0)) {
      throw std::runtime_error("variance_scaling_fit: variance estimate vanished at N = " +
                               std::to_string(n));
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(pt.variance));
  }

  out.fit = linear_fit(xs, ys);
  out.exponent = out.fit.slope;
  out.exponent_se = out.fit.slope_stderr;
  out.has_alpha_ref = alpha_ref != nullptr;
  const double a = alpha_ref ? *alpha_ref : 2.0 * out.exponent;
  out.prefactor_series.resize(n_grid.size());
  std::vector<double> px, py;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    out.prefactor_series[i] =
        out.points[i].variance / std::pow(static_cast<double>(n_grid[i]), 0.5 * a);
    px.push_back(1.0 / std::sqrt(static_cast<double>(n_grid[i])));
    py.push_back(out.prefactor_series[i]);
  }
  out.prefactor_extrapolated = linear_fit(px, py).intercept;
  return out;
}

CltReport clt_test(const GinibreConfig& config, const Polygon& poly, bool negative_control) {
  if (config.trials < 500) {
    throw std::invalid_argument("clt_test: trials must be >= 500");
  }
  const CountStats cs = sample_counts(config, poly);
  std::vector<double> data(cs.counts.size());
  for (std::size_t i = 0; i < cs.counts.size(); ++i) {
    const double c = static_cast<double>(cs.counts[i]);
    data[i] = negative_control ? c * c : c;
  }
  Welford w;
  for (double d : data) w.add(d);
  CltReport rep;
  rep.mean = w.mean;
  rep.variance = w.variance();
  rep.trials = config.trials;
  if (!(rep.variance > 0.0)) {
    throw std::invalid_argument("clt_test: zero sample variance");
  }
  const double sd = std::sqrt(rep.variance);
  for (double& d : data) d = (d - rep.mean) / sd;
  const KsResult ks = ks_normal_test(std::move(data));
  rep.ks_statistic = ks.d;
  rep.p_value = ks.p;
  return rep;
}

namespace {

bool segments_properly_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const Vec2 dp = p2 - p1, dq = q2 - q1;
  const double tol = 1e-14 * (norm2(dp) + norm2(dq));
  const double s1 = cross(dq, p1 - q1), s2 = cross(dq, p2 - q1);
  const double s3 = cross(dp, q1 - p1), s4 = cross(dp, q2 - p1);
  return ((s1 > tol && s2 < -tol) || (s1 < -tol && s2 > tol)) &&
         ((s3 > tol && s4 < -tol) || (s3 < -tol && s4 > tol));
}

bool interiors_overlap(const Polygon& a, const Polygon& b) {
  const auto& va = a.vertices();
  const auto& vb = b.vertices();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const Vec2 p1 = va[i], p2 = va[(i + 1) % va.size()];
    for (std::size_t j = 0; j < vb.size(); ++j) {
      if (segments_properly_cross(p1, p2, vb[j], vb[(j + 1) % vb.size()])) return true;
    }
  }
  // a vertex strictly interior to the other polygon (clear of its boundary)
  for (const Vec2& p : va) {
    if (b.contains(p) && b.distance_to_boundary(p) > 1e-9) return true;
  }
  for (const Vec2& p : vb) {
    if (a.contains(p) && a.distance_to_boundary(p) > 1e-9) return true;
  }
  return false;
}

}  // namespace

CovarianceReport covariance_two_sets(int n, const Polygon& poly1, const Polygon& poly2,
                                     std::int64_t node_budget) {
  if (n < 1) throw std::invalid_argument("covariance_two_sets: N must be >= 1");
  require_in_unit_disk(poly1, "covariance_two_sets");
  require_in_unit_disk(poly2, "covariance_two_sets");
  if (interiors_overlap(poly1, poly2)) {
    throw GeometryError("covariance_two_sets: polygons must have disjoint interiors");
  }

  const double lam = std::max(circumradius(poly1), circumradius(poly2));
  const int modes = mode_cutoff(n, lam);
  const KernelQuadrature q1 = KernelQuadrature::build(poly1, n, 1e-6, node_budget);
  const KernelQuadrature q2 = KernelQuadrature::build(poly2, n, 1e-6, node_budget);
  const Eigen::MatrixXcd a1 = gram_matrix(q1, n, modes);
  const Eigen::MatrixXcd a2 = gram_matrix(q2, n, modes);

  // disjoint interiors: Cov = -Int_{O1} Int_{O2} |K_N|^2 dmu dmu = -<A1, A2>_F
  const std::complex<double> inner = a1.cwiseProduct(a2.conjugate()).sum();
  CovarianceReport rep;
  rep.covariance = -inner.real();
  rep.scaled = std::fabs(rep.covariance) / std::sqrt(static_cast<double>(n));
  rep.hermiticity_defect =
      std::fabs(inner.imag()) / std::max(std::fabs(inner.real()), 1e-300);
  rep.disjoint_interiors = true;
  return rep;
}

SobolevReport sobolev_variance_check(Vec2 bump_center, double bump_radius,
                                     const std::vector<int>& n_grid, double scale) {
  if (!(bump_radius > 0.0)) {
    throw std::invalid_argument("sobolev_variance_check: bump_radius must be positive");
  }
  const double reach = std::sqrt(norm2(bump_center)) + bump_radius;
  if (reach >= 1.0) {
    throw std::domain_error("sobolev_variance_check: bump support touches the unit circle");
  }
  if (n_grid.empty()) {
    throw std::invalid_argument("sobolev_variance_check: empty N grid");
  }
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("sobolev_variance_check: N grid must be increasing");
    }
  }

  const double rho = bump_radius;
  const auto phi = [&](Vec2 p) {
    const double u = norm2(p - bump_center) / (rho * rho);
    if (u >= 1.0 - 1e-14) return 0.0;
    return scale * std::exp(1.0 - 1.0 / (1.0 - u));
  };

  SobolevReport rep;
  // (1/4pi) Int |grad phi|^2, radial quadrature of the bump profile
  const auto dphi = [&](double r) {
    const double u = (r * r) / (rho * rho);
    if (u >= 1.0 - 1e-14) return 0.0;
    const double f = scale * std::exp(1.0 - 1.0 / (1.0 - u));
    return f * (-2.0 * r / (rho * rho)) / ((1.0 - u) * (1.0 - u));
  };
  const double grad_sq =
      2.0 * std::numbers::pi *
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double r) { return dphi(r) * dphi(r) * r; }, 0.0, rho, 10, 1e-12);
  rep.limit = grad_sq / (4.0 * std::numbers::pi);

  rep.points.resize(n_grid.size());
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const int n = n_grid[k];
    const int modes = mode_cutoff(n, reach);
    // cartesian panels over the support square; the integrand is globally smooth
    // because the bump vanishes to all orders on its rim
    const double h_osc = 6.0 / (static_cast<double>(n) * std::max(reach, 1e-3));
    const double h = std::min(h_osc, 2.0 * rho / 6.0);
    const int cells = std::max(6, static_cast<int>(std::ceil(2.0 * rho / h)));
    const double cw = 2.0 * rho / cells;
    std::vector<Vec2> nodes;
    std::vector<double> weights;
    nodes.reserve(static_cast<std::size_t>(cells) * cells * 49);
    weights.reserve(nodes.capacity());
    for (int iy = 0; iy < cells; ++iy) {
      for (int ix = 0; ix < cells; ++ix) {
        const double xc = bump_center.x - rho + (ix + 0.5) * cw;
        const double yc = bump_center.y - rho + (iy + 0.5) * cw;
        for (int i = 0; i < 7; ++i) {
          for (int j = 0; j < 7; ++j) {
            nodes.push_back({xc + 0.5 * cw * kGlX[i], yc + 0.5 * cw * kGlX[j]});
            weights.push_back(kGlW[i] * kGlW[j] * 0.25 * cw * cw);
          }
        }
      }
    }
    std::vector<double> f1(nodes.size()), f2(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      f1[i] = phi(nodes[i]);
      f2[i] = f1[i] * f1[i];
    }
    Eigen::MatrixXcd m1 = Eigen::MatrixXcd::Zero(modes, modes);
    Eigen::MatrixXcd m2 = Eigen::MatrixXcd::Zero(modes, modes);
    std::vector<GramTask> tasks{{&m1, &f1}, {&m2, &f2}};
    accumulate_grams(nodes, weights, n, modes, tasks);
    rep.points[k] = {n, m2.trace().real() - m1.squaredNorm()};
  }

  rep.final_value = rep.points.back().variance;
  rep.final_rel_err = rep.limit != 0.0
                          ? std::fabs(rep.final_value - rep.limit) / std::fabs(rep.limit)
                          : std::fabs(rep.final_value);
  rep.cauchy = true;
  for (std::size_t k = 2; k < rep.points.size(); ++k) {
    const double g0 = std::fabs(rep.points[k - 1].variance - rep.points[k - 2].variance);
    const double g1 = std::fabs(rep.points[k].variance - rep.points[k - 1].variance);
    if (!(g1 <= g0 / 1.5)) rep.cauchy = false;
  }
  return rep;
}

}  // namespace perimlab
