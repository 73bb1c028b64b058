#include "perimlab/kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace perimlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Taylor branch of the gef kernel, |coefficients of r^{2k+1}| alternate after the
// constant; derived once symbolically from (1/2) d^2/dr^2 [r^2 (coth r - 1)].
// Truncation error below 4e-12 for r <= 0.7.
double gef_series(double r) {
  const double r2 = r * r;
  double odd = r * (1.0 + r2 * (-2.0 / 9.0 + r2 * (2.0 / 45.0 + r2 * (-4.0 / 525.0 +
               r2 * (2.0 / 1701.0 + r2 * (-2764.0 / 16372125.0 + r2 * (4.0 / 173745.0 +
               r2 * (-28936.0 / 9577693125.0 + r2 * (87734.0 / 227949096375.0 +
               r2 * (-698444.0 / 14584090145625.0))))))))));
  return -1.0 + odd;
}

// Closed form in terms of E = exp(-2r): coth r - 1 = 2E/D, csch^2 r = 4E/D^2, D = 1 - E.
// Cancels catastrophically as r -> 0, hence the series branch below 1/2.
double gef_closed(double r) {
  const double E = std::exp(-2.0 * r);
  const double D = -std::expm1(-2.0 * r);
  const double cm1 = 2.0 * E / D;            // coth r - 1
  const double csch2 = 4.0 * E / (D * D);
  return cm1 - 2.0 * r * csch2 + r * r * csch2 * (1.0 + cm1);
}

double gef_eval(double r) {
  if (r < 0.5) return gef_series(r);
  return gef_closed(r);
}

double quad_moment(double gamma, double lo, double hi, bool negate) {
  auto f = [gamma, negate](double r) {
    double j = gef_eval(r);
    if (negate) j = -j;
    j = std::max(j, 0.0);
    return j * std::pow(r, 1.0 + gamma);
  };
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 12,
                                                                           1e-12, &err);
  return 2.0 * kPi * v;
}

double gef_signed_moment(double gamma) {
  auto f = [gamma](double r) { return gef_eval(r) * std::pow(r, 1.0 + gamma); };
  double err = 0.0;
  // split at the sign change; tail truncated where exp(-2r) drowns everything
  const double rs = gef_sign_change();
  double a = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, 0.0, rs, 12,
                                                                           1e-13, &err);
  double b = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, rs, 42.0, 12,
                                                                           1e-13, &err);
  return 2.0 * kPi * (a + b);
}

struct MomentKey {
  int family;
  int dim;
  double param;
  double gamma;
  bool operator<(const MomentKey& o) const {
    return std::tie(family, dim, param, gamma) < std::tie(o.family, o.dim, o.param, o.gamma);
  }
};

std::map<MomentKey, double>& moment_cache() {
  static std::map<MomentKey, double> cache;
  return cache;
}
std::mutex& moment_mutex() {
  static std::mutex m;
  return m;
}

double surface_area_sphere(int n) {
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace

double gef_sign_change() {
  // root of gef_eval on (1, 2); bisection refined once by Newton-free secant
  static const double root = [] {
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
      double mid = 0.5 * (lo + hi);
      (gef_eval(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

RadialKernel::RadialKernel(KernelFamily f, int dim, double param)
    : family_(f), dim_(dim), param_(param) {}

RadialKernel RadialKernel::gaussian(int dim) {
  if (dim < 1) throw std::domain_error("kernel: dim must be positive");
  return {KernelFamily::gaussian, dim, 0.0};
}

RadialKernel RadialKernel::exponential(int dim) {
  if (dim < 1) throw std::domain_error("kernel: dim must be positive");
  return {KernelFamily::exponential, dim, 0.0};
}

RadialKernel RadialKernel::ball(double radius, int dim) {
  if (!(radius > 0.0)) throw std::domain_error("kernel: ball radius must be positive");
  if (dim < 1) throw std::domain_error("kernel: dim must be positive");
  return {KernelFamily::ball, dim, radius};
}

RadialKernel RadialKernel::gef() { return {KernelFamily::gef, 2, 0.0}; }

std::string RadialKernel::name() const {
  switch (family_) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::ball: return "ball";
    case KernelFamily::gef: return "gef";
    case KernelFamily::gef_positive: return "gef+";
    case KernelFamily::gef_negative: return "gef-";
  }
  return "?";
}

double RadialKernel::eval(double r) const {
  if (r < 0.0) throw std::domain_error("kernel: negative radius");
  switch (family_) {
    case KernelFamily::gaussian: return std::exp(-r * r);
    case KernelFamily::exponential: return std::exp(-r);
    case KernelFamily::ball: return r <= param_ ? 1.0 : 0.0;
    case KernelFamily::gef: return gef_eval(r);
    case KernelFamily::gef_positive: return std::max(gef_eval(r), 0.0);
    case KernelFamily::gef_negative: return std::max(-gef_eval(r), 0.0);
  }
  return 0.0;
}

double RadialKernel::moment(double gamma) const {
  if (gamma < 0.0 || gamma > static_cast<double>(dim_))
    throw std::domain_error("kernel: moment order outside [0, dim]");
  const MomentKey key{static_cast<int>(family_), dim_, param_, gamma};
  {
    std::lock_guard<std::mutex> lk(moment_mutex());
    auto it = moment_cache().find(key);
    if (it != moment_cache().end()) return it->second;
  }
  const double surf = surface_area_sphere(dim_);
  double v = 0.0;
  switch (family_) {
    case KernelFamily::gaussian:
      // Int_0^inf r^{n-1+g} e^{-r^2} dr = Gamma((n+g)/2) / 2
      v = surf * 0.5 * std::tgamma(0.5 * (dim_ + gamma));
      break;
    case KernelFamily::exponential:
      v = surf * std::tgamma(static_cast<double>(dim_) + gamma);
      break;
    case KernelFamily::ball:
      v = surf * std::pow(param_, dim_ + gamma) / (dim_ + gamma);
      break;
    case KernelFamily::gef:
      v = gef_signed_moment(gamma);
      break;
    case KernelFamily::gef_positive:
      v = quad_moment(gamma, gef_sign_change(), 42.0, false);
      break;
    case KernelFamily::gef_negative:
      v = quad_moment(gamma, 0.0, gef_sign_change(), true);
      break;
  }
  std::lock_guard<std::mutex> lk(moment_mutex());
  moment_cache().emplace(key, v);
  return v;
}

double RadialKernel::abs_l1() const {
  if (family_ == KernelFamily::gef)
    return positive_part().moment(0.0) + negative_part().moment(0.0);
  return moment(0.0);
}

RadialKernel RadialKernel::positive_part() const {
  if (family_ != KernelFamily::gef) throw std::logic_error("kernel: parts only for gef");
  return {KernelFamily::gef_positive, 2, 0.0};
}

RadialKernel RadialKernel::negative_part() const {
  if (family_ != KernelFamily::gef) throw std::logic_error("kernel: parts only for gef");
  return {KernelFamily::gef_negative, 2, 0.0};
}

RadialKernel::BallBound RadialKernel::lower_bound_on_ball() const {
  switch (family_) {
    case KernelFamily::gaussian:
      return {0.5, std::sqrt(std::log(2.0))};  // J = 1/2 at r = sqrt(ln 2), decreasing
    case KernelFamily::exponential:
      return {0.5, std::log(2.0)};
    case KernelFamily::ball:
      return {1.0, param_};
    default:
      throw std::domain_error("kernel: no positive ball lower bound for sign-changing gef");
  }
}

double RadialKernel::effective_range() const {
  switch (family_) {
    case KernelFamily::gaussian: return 6.5;     // exp(-r^2) < 4e-19
    case KernelFamily::exponential: return 44.0; // exp(-r) < 1e-19
    case KernelFamily::ball: return param_;
    default: return 24.0;                        // gef tail ~ 4 r^2 exp(-2r)
  }
}

void RadialKernel::build_part_table() const {
  const bool neg = family_ == KernelFamily::gef_negative;
  const double lo = neg ? 0.0 : gef_sign_change();
  const double hi = neg ? gef_sign_change() : 24.0;
  auto tab = std::make_shared<PartTable>();
  const int n = 4096;
  tab->r.resize(n + 1);
  tab->cdf.resize(n + 1);
  auto w = [&](double r) {
    double j = gef_eval(r);
    if (neg) j = -j;
    return std::max(j, 0.0) * r;
  };
  double acc = 0.0;
  tab->r[0] = lo;
  tab->cdf[0] = 0.0;
  double prev = w(lo);
  for (int i = 1; i <= n; ++i) {
    const double r = lo + (hi - lo) * i / n;
    const double cur = w(r);
    acc += 0.5 * (prev + cur) * (hi - lo) / n;
    tab->r[i] = r;
    tab->cdf[i] = acc;
    prev = cur;
  }
  for (auto& c : tab->cdf) c /= acc;
  table_ = std::move(tab);
}

Vec2 RadialKernel::sample(RngStream& rng) const {
  double r = 0.0;
  switch (family_) {
    case KernelFamily::gaussian: {
      // density prop to exp(-|z|^2): coordinates are N(0, 1/2) (n = 2 only here)
      if (dim_ != 2) throw std::logic_error("kernel: sampling implemented for dim 2");
      const double s = std::numbers::sqrt2 / 2.0;
      return {s * rng.normal(), s * rng.normal()};
    }
    case KernelFamily::exponential:
      if (dim_ != 2) throw std::logic_error("kernel: sampling implemented for dim 2");
      r = rng.exponential() + rng.exponential();  // radial density r e^{-r} = Gamma(2,1)
      break;
    case KernelFamily::ball:
      if (dim_ != 2) throw std::logic_error("kernel: sampling implemented for dim 2");
      r = param_ * std::sqrt(rng.u01());
      break;
    case KernelFamily::gef:
      throw std::logic_error("kernel: cannot sample sign-changing gef; use parts");
    case KernelFamily::gef_positive:
    case KernelFamily::gef_negative: {
      if (!table_) build_part_table();
      const auto& t = *table_;
      const double u = rng.u01();
      auto it = std::upper_bound(t.cdf.begin(), t.cdf.end(), u);
      std::size_t i = std::min<std::size_t>(std::distance(t.cdf.begin(), it), t.cdf.size() - 1);
      if (i == 0) i = 1;
      const double c0 = t.cdf[i - 1], c1 = t.cdf[i];
      const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
      r = t.r[i - 1] + frac * (t.r[i] - t.r[i - 1]);
      break;
    }
  }
  const double th = 2.0 * kPi * rng.u01();
  return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace perimlab
