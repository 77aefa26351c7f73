#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace edgesim {

// Deterministic, splittable randomness. Every consumer derives its own stream
// from (master seed, label, indices), so results do not depend on evaluation
// order or parallelism degree. Distributions are implemented explicitly since
// std::*_distribution is not bit-stable across standard libraries.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  double uniform01() {  // in [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double exponential(double mean = 1.0) { return -mean * std::log1p(-uniform01()); }
  double normal(double mu = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mu + sigma * spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return mu + sigma * r * std::cos(th);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Derived-stream constructors.
inline Rng derive_rng(std::uint64_t master, std::string_view label, std::uint64_t a = 0,
                      std::uint64_t b = 0) {
  std::uint64_t s = splitmix64(master ^ hash_label(label));
  s = splitmix64(s ^ (a * 0x9e3779b97f4a7c15ULL));
  s = splitmix64(s ^ (b * 0xd1b54a32d192ed03ULL));
  return Rng(s);
}

}  // namespace edgesim
