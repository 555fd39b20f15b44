#pragma once

#include <cstdint>
#include <iterator>
#include <random>
#include <utility>

namespace detect {

/// Portable seeded generator. The algorithm is fixed so generated datasets and
/// permutation tests reproduce across platforms and standard libraries:
///   - engine: std::mt19937_64 constructed from the 64-bit seed
///   - uniform01: top 53 bits of one draw times 2^-53, in [0, 1)
///   - below(n): one draw reduced modulo n, redrawing while the draw is less
///     than 2^64 mod n (removes modulo bias)
///   - shuffle: Fisher-Yates from the back, swapping element i with below(i + 1)
/// The standard <random> distributions are implementation-defined and are not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t draw = next();
      if (draw >= limit) return draw % n;
    }
  }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = below(i);
      using std::swap;
      swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detect
