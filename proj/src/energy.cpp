#include "perimlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "perimlab/dimension.hpp"
#include "perimlab/locator.hpp"
#include "perimlab/rng.hpp"

namespace perimlab {

namespace {

std::int64_t chunk_count(std::int64_t samples) {
  return (samples + kMcChunk - 1) / kMcChunk;
}

Welford merge_chunks(const std::vector<Welford>& chunks) {
  Welford total;
  for (const Welford& c : chunks) total.merge(c);
  return total;
}

}  // namespace

Estimate energy_direct_mc(const Polygon& poly, const RadialKernel& kernel, double t,
                          std::int64_t n_samples, std::uint64_t seed) {
  if (kernel.sign_changing()) {
    throw std::invalid_argument("energy_direct_mc: sign-changing kernel, use signed_energy");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("energy_direct_mc: t must be positive");
  }
  if (n_samples < 1) throw std::invalid_argument("energy_direct_mc: n_samples must be >= 1");
  const double efficiency = poly.area() / poly.bbox().area();
  if (efficiency < 1e-3) {
    throw std::invalid_argument(
        "energy_direct_mc: rejection efficiency " + std::to_string(efficiency) +
        " below 1e-3; the polygon fills too little of its bounding box");
  }

  const double scale = t * t * kernel.abs_l1() * poly.area();
  const std::int64_t n_chunks = chunk_count(n_samples);
  std::vector<Welford> chunks(static_cast<std::size_t>(n_chunks));

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    RngStream rng(derive_stream_seed(seed, "energymc", 0, static_cast<std::uint64_t>(c)));
    const std::int64_t lo = c * kMcChunk;
    const std::int64_t hi = std::min(n_samples, lo + kMcChunk);
    Welford w;
    for (std::int64_t i = lo; i < hi; ++i) {
      const Vec2 x = poly.sample_point(rng);
      const Vec2 z = kernel.sample(rng);
      const Vec2 y = x - t * z;
      w.add(poly.contains(y) ? 0.0 : 1.0);
    }
    chunks[static_cast<std::size_t>(c)] = w;
  }

  const Welford total = merge_chunks(chunks);
  return {scale * total.mean, scale * total.sem()};
}

double energy_covariogram(const Polygon& poly, const RadialKernel& kernel, double t,
                          const std::vector<double>& radial_grid,
                          std::int64_t angular_samples, std::uint64_t seed) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("energy_covariogram: t must be positive");
  }
  if (radial_grid.size() < 2) {
    throw std::invalid_argument("energy_covariogram: radial_grid needs at least two nodes");
  }
  for (std::size_t k = 0; k < radial_grid.size(); ++k) {
    if (!(radial_grid[k] >= 0.0) || (k > 0 && !(radial_grid[k] > radial_grid[k - 1]))) {
      throw std::invalid_argument(
          "energy_covariogram: radial_grid must be nonnegative and strictly increasing");
    }
  }
  if (angular_samples < 1) {
    throw std::invalid_argument("energy_covariogram: angular_samples must be >= 1");
  }

  // Mass the grid fails to cover must be negligible or the quadrature is meaningless.
  const double r_max = radial_grid.back();
  const double covered =
      2.0 * std::numbers::pi *
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double r) { return std::fabs(kernel.eval(r)) * r; }, 0.0, r_max, 10, 1e-12);
  const double l1 = kernel.abs_l1();
  if (l1 - covered > 1e-6 * l1) {
    throw std::invalid_argument(
        "energy_covariogram: kernel keeps relative mass " +
        std::to_string((l1 - covered) / l1) + " beyond the last radial node");
  }

  const double area = poly.area();
  std::vector<double> vbar(radial_grid.size(), 0.0);
  for (std::size_t k = 0; k < radial_grid.size(); ++k) {
    const double rho_abs = t * radial_grid[k];
    if (rho_abs == 0.0) continue;  // the deficit vanishes at zero shift
    const std::int64_t n_chunks = chunk_count(angular_samples);
    std::vector<Welford> chunks(static_cast<std::size_t>(n_chunks));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < n_chunks; ++c) {
      RngStream rng(derive_stream_seed(seed, "covar", static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(c)));
      const std::int64_t lo = c * kMcChunk;
      const std::int64_t hi = std::min(angular_samples, lo + kMcChunk);
      Welford w;
      for (std::int64_t i = lo; i < hi; ++i) {
        const Vec2 x = poly.sample_point(rng);
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 y{x.x - rho_abs * std::cos(theta), x.y - rho_abs * std::sin(theta)};
        w.add(poly.contains(y) ? 0.0 : 1.0);
      }
      chunks[static_cast<std::size_t>(c)] = w;
    }
    vbar[k] = area * merge_chunks(chunks).mean;
  }

  // E = t^2 * 2 pi * Int J(rho) Vbar(t rho) rho drho, trapezoid on the given nodes.
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < radial_grid.size(); ++k) {
    const double f0 = kernel.eval(radial_grid[k]) * vbar[k] * radial_grid[k];
    const double f1 = kernel.eval(radial_grid[k + 1]) * vbar[k + 1] * radial_grid[k + 1];
    integral += 0.5 * (f0 + f1) * (radial_grid[k + 1] - radial_grid[k]);
  }
  return t * t * 2.0 * std::numbers::pi * integral;
}

EnergySweep sweep_and_fit(const Polygon& poly, const RadialKernel& kernel,
                          const std::vector<double>& t_grid, std::int64_t samples,
                          std::uint64_t seed, double feature_floor, const double* beta_ref) {
  if (t_grid.size() < 2) {
    throw std::invalid_argument("sweep_and_fit: need at least two t values");
  }
  for (double t : t_grid) {
    if (!(t > 0.0)) throw std::invalid_argument("sweep_and_fit: t values must be positive");
    if (t < feature_floor) {
      throw std::invalid_argument("sweep_and_fit: t = " + std::to_string(t) +
                                  " is below the feature floor " +
                                  std::to_string(feature_floor));
    }
  }

  EnergySweep sweep;
  sweep.t = t_grid;
  std::sort(sweep.t.begin(), sweep.t.end(), std::greater<double>());
  sweep.value.resize(sweep.t.size());
  sweep.se.resize(sweep.t.size());

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < sweep.t.size(); ++i) {
    const Estimate e = energy_direct_mc(
        poly, kernel, sweep.t[i], samples,
        derive_stream_seed(seed, "sweep", static_cast<std::uint64_t>(i)));
    sweep.value[i] = e.value;
    sweep.se[i] = e.se;
    if (!(e.value > 0.0)) {
      throw std::runtime_error("sweep_and_fit: energy estimate vanished at t = " +
                               std::to_string(sweep.t[i]) + "; raise samples");
    }
    xs.push_back(std::log(sweep.t[i]));
    ys.push_back(std::log(e.value));
  }

  sweep.fit = linear_fit(xs, ys);
  sweep.beta_hat = sweep.fit.slope;
  sweep.beta_stderr = sweep.fit.slope_stderr;
  sweep.has_beta_ref = beta_ref != nullptr;
  sweep.beta_ref = beta_ref ? *beta_ref : sweep.beta_hat;
  sweep.prefactor.resize(sweep.t.size());
  for (std::size_t i = 0; i < sweep.t.size(); ++i) {
    sweep.prefactor[i] = sweep.value[i] / std::pow(sweep.t[i], sweep.beta_ref);
  }
  return sweep;
}

SignedEnergy signed_energy(const Polygon& poly, double t, std::int64_t samples,
                           std::uint64_t seed) {
  const RadialKernel kernel = RadialKernel::gef();
  SignedEnergy out;
  out.positive = energy_direct_mc(poly, kernel.positive_part(), t, samples,
                                  derive_stream_seed(seed, "gef+"));
  out.negative = energy_direct_mc(poly, kernel.negative_part(), t, samples,
                                  derive_stream_seed(seed, "gef-"));
  out.net.value = out.positive.value - out.negative.value;
  out.net.se = std::hypot(out.positive.se, out.negative.se);
  return out;
}

namespace {

// Closed triangular window, counterclockwise. Holds the block geometry for the
// self-similarity check: clipping, membership, uniform sampling.
struct TriWindow {
  Vec2 v0, v1, v2;
  double area = 0.0;
  Box bbox;

  static TriWindow over_base(double side) {
    // outward (below-base) equilateral envelope of the first polygon side
    TriWindow w;
    w.v0 = {0.0, 0.0};
    w.v1 = {side / 2.0, -side * std::numbers::sqrt3 / 2.0};
    w.v2 = {side, 0.0};
    w.area = side * side * std::numbers::sqrt3 / 4.0;
    w.bbox = {{0.0, w.v1.y}, {side, 0.0}};
    return w;
  }

  bool contains(Vec2 p) const {
    return cross(v1 - v0, p - v0) >= 0.0 && cross(v2 - v1, p - v1) >= 0.0 &&
           cross(v0 - v2, p - v2) >= 0.0;
  }

  Vec2 sample(RngStream& rng) const {
    double u = rng.u01();
    double v = rng.u01();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    return v0 + u * (v1 - v0) + v * (v2 - v0);
  }

  // rect clipped against the triangle; out must hold 8 points, returns the count
  int clip_rect(const Box& r, Vec2* out) const {
    Vec2 buf_a[8] = {{r.lo.x, r.lo.y}, {r.hi.x, r.lo.y}, {r.hi.x, r.hi.y}, {r.lo.x, r.hi.y}};
    Vec2 buf_b[8];
    int n = 4;
    const Vec2 edge_a[3] = {v0, v1, v2};
    const Vec2 edge_b[3] = {v1, v2, v0};
    Vec2* in = buf_a;
    Vec2* tmp = buf_b;
    for (int e = 0; e < 3 && n > 0; ++e) {
      const Vec2 a = edge_a[e], d = edge_b[e] - edge_a[e];
      int m = 0;
      for (int i = 0; i < n; ++i) {
        const Vec2 p = in[i], q = in[(i + 1) % n];
        const double sp = cross(d, p - a), sq = cross(d, q - a);
        if (sp >= 0.0) {
          tmp[m++] = p;
          if (sq < 0.0) tmp[m++] = p + (sp / (sp - sq)) * (q - p);
        } else if (sq >= 0.0) {
          tmp[m++] = p + (sp / (sp - sq)) * (q - p);
        }
      }
      std::swap(in, tmp);
      n = m;
    }
    for (int i = 0; i < n; ++i) out[i] = in[i];
    return n;
  }

  double clip_area(const Box& r) const {
    Vec2 pts[8];
    const int n = clip_rect(r, pts);
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) s2 += cross(pts[i], pts[(i + 1) % n]);
    return 0.5 * std::fabs(s2);
  }
};

// Importance sampler for x over the window: a dilated boundary-cell mask (alias
// table over cells weighted by their window-clipped area, uniform within each
// clipped cell) mixed with a 5% uniform-over-window component. The density is
// therefore two-valued, which keeps weights bounded by |W|/0.05.
class BlockSampler {
 public:
  BlockSampler(const Polygon& poly, const TriWindow& w) : loc_(&poly.locator()), w_(w) {}

  void build(double range) {
    const Box& gb = loc_->grid_box();
    const double cw = loc_->cell_w(), ch = loc_->cell_h();
    const double pad = range + 2.0 * std::max(cw, ch);
    ix0_ = clamp_ix(static_cast<int>(std::floor((w_.bbox.lo.x - pad - gb.lo.x) / cw)));
    iy0_ = clamp_iy(static_cast<int>(std::floor((w_.bbox.lo.y - pad - gb.lo.y) / ch)));
    const int ix1 = clamp_ix(static_cast<int>(std::floor((w_.bbox.hi.x + pad - gb.lo.x) / cw)));
    const int iy1 = clamp_iy(static_cast<int>(std::floor((w_.bbox.hi.y + pad - gb.lo.y) / ch)));
    mx_ = ix1 - ix0_ + 1;
    my_ = iy1 - iy0_ + 1;
    const std::size_t cells = static_cast<std::size_t>(mx_) * static_cast<std::size_t>(my_);
    support_.assign(cells, 0);

    std::vector<std::uint8_t> mark(cells, 0);
    for (int iy = 0; iy < my_; ++iy) {
      for (int ix = 0; ix < mx_; ++ix) {
        if (loc_->cell_has_edges(loc_->cell_index(ix0_ + ix, iy0_ + iy))) {
          mark[idx(ix, iy)] = 1;
        }
      }
    }
    dilate_rows(mark, static_cast<int>(std::ceil(range / cw)) + 1);
    dilate_cols(mark, static_cast<int>(std::ceil(range / ch)) + 1);

    cells_.clear();
    std::vector<double> weights;
    total_clip_ = 0.0;
    const double min_area = 1e-14 * cw * ch;
    for (int iy = 0; iy < my_; ++iy) {
      for (int ix = 0; ix < mx_; ++ix) {
        if (!mark[idx(ix, iy)]) continue;
        const double a = w_.clip_area(loc_->cell_rect(loc_->cell_index(ix0_ + ix, iy0_ + iy)));
        if (a <= min_area) continue;
        support_[idx(ix, iy)] = 1;
        cells_.push_back(idx(ix, iy));
        weights.push_back(a);
        total_clip_ += a;
      }
    }
    alias_ = weights.empty() ? nullptr : std::make_unique<AliasTable>(weights);
  }

  Vec2 sample(RngStream& rng, double* density_out) const {
    Vec2 x;
    if (alias_ == nullptr || rng.u01() < kMix) {
      x = w_.sample(rng);
    } else {
      x = sample_in_cell(cells_[alias_->sample(rng)], rng);
    }
    *density_out = density(x);
    return x;
  }

  double density(Vec2 x) const {
    double d = kMix / w_.area;
    if (alias_ != nullptr) {
      const Box& gb = loc_->grid_box();
      const int ix = static_cast<int>(std::floor((x.x - gb.lo.x) / loc_->cell_w())) - ix0_;
      const int iy = static_cast<int>(std::floor((x.y - gb.lo.y) / loc_->cell_h())) - iy0_;
      if (ix >= 0 && ix < mx_ && iy >= 0 && iy < my_ && support_[idx(ix, iy)]) {
        d += (1.0 - kMix) / total_clip_;
      }
    }
    return d;
  }

 private:
  static constexpr double kMix = 0.05;

  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(mx_) +
           static_cast<std::size_t>(ix);
  }
  int clamp_ix(int i) const { return std::clamp(i, 0, loc_->nx() - 1); }
  int clamp_iy(int i) const { return std::clamp(i, 0, loc_->ny() - 1); }

  void dilate_rows(std::vector<std::uint8_t>& m, int r) const {
    std::vector<std::int32_t> pre(static_cast<std::size_t>(mx_) + 1);
    for (int iy = 0; iy < my_; ++iy) {
      pre[0] = 0;
      for (int ix = 0; ix < mx_; ++ix) pre[ix + 1] = pre[ix] + m[idx(ix, iy)];
      for (int ix = 0; ix < mx_; ++ix) {
        const int a = std::max(0, ix - r), b = std::min(mx_ - 1, ix + r);
        m[idx(ix, iy)] = pre[b + 1] > pre[a] ? 1 : 0;
      }
    }
  }
  void dilate_cols(std::vector<std::uint8_t>& m, int r) const {
    std::vector<std::int32_t> pre(static_cast<std::size_t>(my_) + 1);
    for (int ix = 0; ix < mx_; ++ix) {
      pre[0] = 0;
      for (int iy = 0; iy < my_; ++iy) pre[iy + 1] = pre[iy] + m[idx(ix, iy)];
      for (int iy = 0; iy < my_; ++iy) {
        const int a = std::max(0, iy - r), b = std::min(my_ - 1, iy + r);
        m[idx(ix, iy)] = pre[b + 1] > pre[a] ? 1 : 0;
      }
    }
  }

  // uniform point in cell-rect intersect window, by fan triangulation of the clip
  Vec2 sample_in_cell(std::size_t sub, RngStream& rng) const {
    const int ix = static_cast<int>(sub % static_cast<std::size_t>(mx_));
    const int iy = static_cast<int>(sub / static_cast<std::size_t>(mx_));
    Vec2 pts[8];
    const int n = w_.clip_rect(loc_->cell_rect(loc_->cell_index(ix0_ + ix, iy0_ + iy)), pts);
    if (n < 3) return w_.sample(rng);  // degenerate sliver; measure-zero fallback
    double areas[6];
    double total = 0.0;
    for (int i = 0; i + 2 < n; ++i) {
      areas[i] = 0.5 * std::fabs(cross(pts[i + 1] - pts[0], pts[i + 2] - pts[0]));
      total += areas[i];
    }
    double pick = rng.u01() * total;
    int tri = 0;
    while (tri + 3 < n && pick > areas[tri]) {
      pick -= areas[tri];
      ++tri;
    }
    double u = rng.u01(), v = rng.u01();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    return pts[0] + u * (pts[tri + 1] - pts[0]) + v * (pts[tri + 2] - pts[0]);
  }

  const PolygonLocator* loc_;
  TriWindow w_;
  int ix0_ = 0, iy0_ = 0, mx_ = 0, my_ = 0;
  std::vector<std::uint8_t> support_;
  std::vector<std::size_t> cells_;
  double total_clip_ = 0.0;
  std::unique_ptr<AliasTable> alias_;
};

// F(t) = Int_{Omega cap W} Int_{Omega^c} J((x-y)/t) dy dx by importance sampling on x
// and a kernel draw on the displacement. Membership always tests the full polygon.
Estimate block_energy(const Polygon& poly, const BlockSampler& sampler,
                      const RadialKernel& kernel, double t, std::int64_t samples,
                      std::uint64_t seed, std::uint64_t task) {
  const double scale = t * t * kernel.abs_l1();
  const std::int64_t n_chunks = chunk_count(samples);
  std::vector<Welford> chunks(static_cast<std::size_t>(n_chunks));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    RngStream rng(derive_stream_seed(seed, "blockF", task, static_cast<std::uint64_t>(c)));
    const std::int64_t lo = c * kMcChunk;
    const std::int64_t hi = std::min(samples, lo + kMcChunk);
    Welford w;
    for (std::int64_t i = lo; i < hi; ++i) {
      double q = 0.0;
      const Vec2 x = sampler.sample(rng, &q);
      double v = 0.0;
      if (poly.contains(x)) {
        const Vec2 z = kernel.sample(rng);
        const Vec2 y = x - t * z;
        if (!poly.contains(y)) v = scale / q;
      }
      w.add(v);
    }
    chunks[static_cast<std::size_t>(c)] = w;
  }
  const Welford total = merge_chunks(chunks);
  return {total.mean, total.sem()};
}

}  // namespace

RenewalReport renewal_check(const SnowflakeSpec& spec, const RadialKernel& kernel,
                            double t0, int levels, std::int64_t samples,
                            std::uint64_t seed) {
  spec.validate();
  if (kernel.sign_changing()) {
    throw std::invalid_argument("renewal_check: kernel must be nonnegative");
  }
  if (!(t0 > 0.0) || !std::isfinite(t0)) {
    throw std::invalid_argument("renewal_check: t0 must be positive");
  }
  if (levels < 2) throw std::invalid_argument("renewal_check: levels must be >= 2");
  if (samples < 1) throw std::invalid_argument("renewal_check: samples must be >= 1");

  RenewalReport rep;
  rep.eta = spec.eta;
  rep.r1 = spec.r1();
  rep.r2 = spec.r2();
  rep.alpha = solve_alpha(spec.eta);

  rep.t.resize(static_cast<std::size_t>(levels));
  for (int k = 0; k < levels; ++k) rep.t[static_cast<std::size_t>(k)] = std::ldexp(t0, -k);

  constexpr int kPeriods = 3, kPerPeriod = 6;
  const double period = std::log(spec.eta);
  const int n_s = kPeriods * kPerPeriod + 1;
  rep.s_grid.resize(static_cast<std::size_t>(n_s));
  std::vector<double> t_s(static_cast<std::size_t>(n_s));
  for (int j = 0; j < n_s; ++j) {
    rep.s_grid[static_cast<std::size_t>(j)] = -std::log(t0) + j * period / kPerPeriod;
    t_s[static_cast<std::size_t>(j)] = std::exp(-rep.s_grid[static_cast<std::size_t>(j)]);
  }

  const double t_min = std::min(rep.t.back(), t_s.back());
  if (t_min < spec.feature_floor()) {
    throw std::invalid_argument(
        "renewal_check: t reaches " + std::to_string(t_min) +
        " at the deepest level, below the feature floor " +
        std::to_string(spec.feature_floor()) + "; raise t0 or the construction depth");
  }

  // one evaluation per distinct t across both grids
  std::vector<double> need;
  for (double t : rep.t) {
    need.push_back(t);
    need.push_back(t / rep.r1);
    need.push_back(t / rep.r2);
  }
  for (double t : t_s) need.push_back(t);
  std::sort(need.begin(), need.end(), std::greater<double>());
  const auto close = [](double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max(std::fabs(a), std::fabs(b));
  };
  std::vector<double> evals;
  for (double t : need) {
    if (evals.empty() || !close(evals.back(), t)) evals.push_back(t);
  }
  const auto find_eval = [&](double t) -> std::size_t {
    auto it = std::lower_bound(evals.begin(), evals.end(), t, std::greater<double>());
    if (it != evals.end() && close(*it, t)) return static_cast<std::size_t>(it - evals.begin());
    if (it != evals.begin() && close(*(it - 1), t)) {
      return static_cast<std::size_t>(it - evals.begin()) - 1;
    }
    throw std::logic_error("renewal_check: evaluation grid lookup failed");
  };

  const Polygon poly = build_snowflake(spec);
  const TriWindow window = TriWindow::over_base(spec.side);
  BlockSampler sampler(poly, window);
  const double range = kernel.effective_range();
  std::vector<Estimate> f(evals.size());
  for (std::size_t i = 0; i < evals.size(); ++i) {
    sampler.build(evals[i] * range);
    f[i] = block_energy(poly, sampler, kernel, evals[i], samples, seed,
                        static_cast<std::uint64_t>(i));
  }

  const std::size_t nl = static_cast<std::size_t>(levels);
  rep.f.resize(nl), rep.f_se.resize(nl);
  rep.f_over_r1.resize(nl), rep.f_over_r1_se.resize(nl);
  rep.f_over_r2.resize(nl), rep.f_over_r2_se.resize(nl);
  rep.residual.resize(nl), rep.residual_se.resize(nl), rep.residual_over_t4.resize(nl);
  const double c1 = 2.0 * std::pow(rep.r1, 4), c2 = 2.0 * std::pow(rep.r2, 4);
  for (std::size_t k = 0; k < nl; ++k) {
    const std::size_t i0 = find_eval(rep.t[k]);
    const std::size_t i1 = find_eval(rep.t[k] / rep.r1);
    const std::size_t i2 = find_eval(rep.t[k] / rep.r2);
    rep.f[k] = f[i0].value, rep.f_se[k] = f[i0].se;
    rep.f_over_r1[k] = f[i1].value, rep.f_over_r1_se[k] = f[i1].se;
    rep.f_over_r2[k] = f[i2].value, rep.f_over_r2_se[k] = f[i2].se;
    rep.residual[k] = c1 * f[i1].value + c2 * f[i2].value - f[i0].value;
    // shared evaluations (r1 == r2) are the same random variable, so combine first
    const double var = (i1 == i2)
                           ? std::pow((c1 + c2) * f[i1].se, 2) + std::pow(f[i0].se, 2)
                           : std::pow(c1 * f[i1].se, 2) + std::pow(c2 * f[i2].se, 2) +
                                 std::pow(f[i0].se, 2);
    rep.residual_se[k] = std::sqrt(var);
    rep.residual_over_t4[k] = rep.residual[k] / std::pow(rep.t[k], 4);
  }

  rep.residual_bounded = true;
  for (std::size_t k = 0; k + 1 < nl; ++k) {
    const double a = std::fabs(rep.residual_over_t4[k]);
    const double b = std::fabs(rep.residual_over_t4[k + 1]);
    const double ratio = b / a;
    if (!(ratio >= 0.2 && ratio <= 5.0)) {
      rep.residual_bounded = false;
      break;
    }
  }

  rep.g.resize(static_cast<std::size_t>(n_s));
  rep.g_se.resize(static_cast<std::size_t>(n_s));
  for (int j = 0; j < n_s; ++j) {
    const std::size_t i = find_eval(t_s[static_cast<std::size_t>(j)]);
    const double scale = std::exp((4.0 - rep.alpha) * rep.s_grid[static_cast<std::size_t>(j)]);
    rep.g[static_cast<std::size_t>(j)] = scale * f[i].value;
    rep.g_se[static_cast<std::size_t>(j)] = scale * f[i].se;
  }
  rep.period_amplitude.resize(kPeriods);
  for (int w = 0; w < kPeriods; ++w) {
    double lo = rep.g[static_cast<std::size_t>(w * kPerPeriod)];
    double hi = lo;
    for (int j = w * kPerPeriod; j <= (w + 1) * kPerPeriod; ++j) {
      lo = std::min(lo, rep.g[static_cast<std::size_t>(j)]);
      hi = std::max(hi, rep.g[static_cast<std::size_t>(j)]);
    }
    rep.period_amplitude[static_cast<std::size_t>(w)] = hi - lo;
  }
  return rep;
}

}  // namespace perimlab
