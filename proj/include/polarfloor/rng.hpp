#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace polarfloor {

// SplitMix64 finalizer, used to whiten seed material before feeding the
// generator.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic random stream. Substreams are derived by hashing
// (master, a, b), so any frame or record can be regenerated in isolation
// and results do not depend on how work is split across threads.
//
// All distributions are hand-rolled on top of the raw 64-bit output, which
// the standard pins down exactly; nothing here depends on
// implementation-defined library distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  static RngStream derive(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ (a + 0xA0761D6478BD642FULL));
    h = splitmix64(h ^ (b + 0xE7037ED1A0B428DBULL));
    return RngStream(h);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pairs are cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform integer in [0, n); rejection sampling, unbiased.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  bool bit() {
    if (bits_left_ == 0) {
      word_ = gen_();
      bits_left_ = 64;
    }
    const bool b = word_ & 1;
    word_ >>= 1;
    --bits_left_;
    return b;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
  std::uint64_t word_ = 0;
  int bits_left_ = 0;
};

}  // namespace polarfloor
