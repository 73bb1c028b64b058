#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace perimlab {

// Seed expander (Fortuna/SplitMix64 finalizer). Only used to derive stream states.
inline std::uint64_t splitmix64_next(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// xoshiro256++ engine (Blackman & Vigna reference constants).
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64_next(seed);
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

// Stream derivation contract (language-independent, documented for reproduction):
//   state0 = splitmix chain over (master ^ fnv1a64(label), task, chunk), three rounds,
//   then xoshiro256++ seeded from the chain.
// Every sampling loop partitions its budget into fixed-size chunks; chunk k draws from
// stream (label, task, k) and partial results are reduced in increasing-k order, so a
// result depends only on (master seed, label, task, chunk size), never on worker count.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view label,
                                        std::uint64_t task = 0, std::uint64_t chunk = 0) {
  std::uint64_t x = master ^ fnv1a64(label);
  std::uint64_t a = splitmix64_next(x);
  x ^= task * 0xd1342543de82ef95ULL;
  std::uint64_t b = splitmix64_next(x);
  x ^= chunk * 0xaf251af3b0f025b5ULL;
  std::uint64_t c = splitmix64_next(x);
  return a ^ (b + 0x9e3779b97f4a7c15ULL) ^ (c << 1);
}

class RngStream {
 public:
  // from an already-derived stream seed
  explicit RngStream(std::uint64_t stream_seed) : eng_(stream_seed) {}

  RngStream(std::uint64_t master, std::string_view label, std::uint64_t task,
            std::uint64_t chunk = 0)
      : eng_(derive_stream_seed(master, label, task, chunk)) {}

  std::uint64_t bits() { return eng_.next(); }

  // uniform in [0,1)
  double u01() { return static_cast<double>(eng_.next() >> 11) * 0x1.0p-53; }

  // uniform in (0,1], safe as a log argument
  double u01_pos() { return static_cast<double>((eng_.next() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * u01(); }

  std::uint64_t uniform_index(std::uint64_t n) {
    // 128-bit multiply rejection-free scaling; bias < 2^-64, negligible for n << 2^64
    return static_cast<std::uint64_t>((static_cast<__uint128_t>(eng_.next()) * n) >> 64);
  }

  // standard normal, Box-Muller with pair caching
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(u01_pos()));
    const double th = 2.0 * std::numbers::pi * u01();
    cached_ = r * std::sin(th);
    have_cached_ = true;
    return r * std::cos(th);
  }

  double exponential() { return -std::log(u01_pos()); }

 private:
  Xoshiro256pp eng_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Fixed chunk size shared by all Monte Carlo loops; part of the reproducibility contract.
inline constexpr std::int64_t kMcChunk = 1 << 16;

}  // namespace perimlab
