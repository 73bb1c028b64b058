#pragma once

#include <cstdint>
#include <vector>

#include "perimlab/rng.hpp"

namespace perimlab {

/// Running mean/variance accumulator. merge() is exact, so chunked reductions in a
/// fixed order give bit-identical results regardless of how chunks were produced.
struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double d = o.mean - mean;
    const double nt = static_cast<double>(n + o.n);
    m2 += o.m2 + d * d * (static_cast<double>(n) * static_cast<double>(o.n)) / nt;
    mean += d * static_cast<double>(o.n) / nt;
    n += o.n;
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double sem() const;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = a + b x. Needs >= 2 points (>= 3 for a finite stderr).
LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double z);

struct KsResult {
  double d = 0.0;  // sup-norm distance between empirical and reference CDF
  double p = 0.0;  // asymptotic p-value (Stephens' approximation)
};

/// One-sample Kolmogorov-Smirnov test of `sample` against the standard normal.
KsResult ks_normal_test(std::vector<double> sample);

/// Richardson extrapolation from values f0, f1, f2 at parameters t, t/ratio, t/ratio^2.
/// The convergence order is estimated from the triplet itself.
struct Richardson {
  double limit = 0.0;
  double order = 0.0;
};
Richardson richardson_extrapolate(double f0, double f1, double f2, double ratio);

/// Walker alias sampler over {0..n-1} with the given nonnegative weights.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights);
  std::size_t size() const { return prob_.size(); }
  std::size_t sample(RngStream& rng) const;
  double prob(std::size_t i) const { return norm_[i]; }

 private:
  std::vector<double> prob_;   // acceptance threshold per slot
  std::vector<std::uint32_t> alias_;
  std::vector<double> norm_;   // normalized weights
};

struct BootstrapCi {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap CI for the variance of an integer-valued sample given as a
/// histogram: hist[k] observations of value (base + k). Resamples the multinomial.
BootstrapCi bootstrap_variance_ci(const std::vector<std::int64_t>& hist, std::int64_t base,
                                  int replicates, double confidence, RngStream& rng);

}  // namespace perimlab
