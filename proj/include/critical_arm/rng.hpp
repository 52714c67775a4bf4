#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace critical_arm {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** with splitmix64 seeding
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  // Independent stream for (master seed, chain index).
  static Rng stream(std::uint64_t master, std::uint64_t chain) {
    std::uint64_t x = master;
    std::uint64_t a = splitmix64(x);
    std::uint64_t y = chain ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t b = splitmix64(y);
    return Rng(a ^ (b * 0xd1342543de82ef95ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    __uint128_t m = static_cast<__uint128_t>(next()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool coin() { return (next() >> 63) != 0; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// Precomputed Bernoulli(p) test against raw 64-bit draws.
struct BernoulliThreshold {
  std::uint64_t t = 0;
  bool always = false;

  BernoulliThreshold() = default;
  explicit BernoulliThreshold(double p) {
    if (!(p > 0.0)) return;
    if (p >= 1.0) {
      always = true;
      return;
    }
    t = static_cast<std::uint64_t>(std::ldexp(p, 64));
  }
  bool operator()(Rng& r) const { return always || r.next() < t; }
};

}  // namespace critical_arm
