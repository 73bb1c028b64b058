#include "perimlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace perimlab {

double Welford::sem() const {
  return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need matching n >= 2");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return f;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

KsResult ks_normal_test(std::vector<double> s) {
  const std::size_t n = s.size();
  if (n == 0) throw std::invalid_argument("ks_normal_test: empty sample");
  std::sort(s.begin(), s.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(s[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  const double rn = std::sqrt(static_cast<double>(n));
  const double lam = (rn + 0.12 + 0.11 / rn) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k & 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
    q += term;
    if (std::abs(term) < 1e-12) break;
  }
  return {d, std::clamp(q, 0.0, 1.0)};
}

Richardson richardson_extrapolate(double f0, double f1, double f2, double ratio) {
  if (!(ratio > 1.0)) throw std::invalid_argument("richardson: ratio must exceed 1");
  const double d01 = f0 - f1, d12 = f1 - f2;
  Richardson r;
  if (d12 == 0.0 || d01 / d12 <= 0.0) {
    // differences no longer resolve the trend; treat the finest value as converged
    r.limit = f2;
    r.order = 0.0;
    return r;
  }
  r.order = std::log(d01 / d12) / std::log(ratio);
  const double g = std::pow(ratio, r.order);
  // f2 = L + a r^2 with r = ratio^-order, d12 = a r (1 - r), so a r^2 = d12 / (g - 1)
  r.limit = f2 - d12 / (g - 1.0);
  return r;
}

AliasTable::AliasTable(const std::vector<double>& w) {
  const std::size_t n = w.size();
  if (n == 0) throw std::invalid_argument("alias: empty weight vector");
  double total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0)) throw std::invalid_argument("alias: weights must be nonnegative");
    total += wi;
  }
  if (!(total > 0.0)) throw std::invalid_argument("alias: all weights zero");
  norm_.resize(n);
  prob_.assign(n, 1.0);
  alias_.resize(n);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    norm_[i] = w[i] / total;
    scaled[i] = norm_[i] * static_cast<double>(n);
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // leftovers are numerically 1.0; prob_ already says "accept"
}

std::size_t AliasTable::sample(RngStream& rng) const {
  const std::size_t i = static_cast<std::size_t>(rng.uniform_index(prob_.size()));
  return rng.u01() < prob_[i] ? i : alias_[i];
}

namespace {

struct BitGen {
  RngStream* s;
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }
  result_type operator()() { return s->bits(); }
};

double hist_variance(const std::vector<std::int64_t>& h, std::int64_t base) {
  std::int64_t n = 0;
  double mean = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    n += h[k];
    mean += static_cast<double>(h[k]) * static_cast<double>(base + static_cast<std::int64_t>(k));
  }
  if (n < 2) throw std::invalid_argument("bootstrap: need at least 2 observations");
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double d = static_cast<double>(base + static_cast<std::int64_t>(k)) - mean;
    ss += static_cast<double>(h[k]) * d * d;
  }
  return ss / static_cast<double>(n - 1);
}

}  // namespace

BootstrapCi bootstrap_variance_ci(const std::vector<std::int64_t>& hist, std::int64_t base,
                                  int replicates, double confidence, RngStream& rng) {
  if (replicates < 10) throw std::invalid_argument("bootstrap: need >= 10 replicates");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw std::invalid_argument("bootstrap: confidence must lie in (0,1)");
  std::int64_t total = 0;
  for (auto c : hist) total += c;

  BootstrapCi ci;
  ci.point = hist_variance(hist, base);

  BitGen gen{&rng};
  std::vector<double> vars(replicates);
  std::vector<std::int64_t> resampled(hist.size());
  for (int b = 0; b < replicates; ++b) {
    // multinomial resample via the binomial chain
    std::int64_t left = total;
    double pleft = 1.0;
    for (std::size_t k = 0; k < hist.size(); ++k) {
      const double pk = static_cast<double>(hist[k]) / static_cast<double>(total);
      std::int64_t draw = 0;
      if (left > 0 && pk > 0.0) {
        const double cond = std::min(1.0, pk / pleft);
        draw = cond >= 1.0
                   ? left
                   : std::binomial_distribution<std::int64_t>(left, cond)(gen);
      }
      resampled[k] = draw;
      left -= draw;
      pleft -= pk;
    }
    if (left > 0) resampled.back() += left;
    vars[b] = hist_variance(resampled, base);
  }
  std::sort(vars.begin(), vars.end());
  const double a = (1.0 - confidence) / 2.0;
  auto q = [&](double p) {
    const double idx = p * (replicates - 1);
    const std::size_t i0 = static_cast<std::size_t>(idx);
    const std::size_t i1 = std::min<std::size_t>(i0 + 1, replicates - 1);
    const double w = idx - static_cast<double>(i0);
    return (1.0 - w) * vars[i0] + w * vars[i1];
  };
  ci.lo = q(a);
  ci.hi = q(1.0 - a);
  return ci;
}

}  // namespace perimlab
