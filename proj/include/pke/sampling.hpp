#pragma once

// Seeded sampling with results that do not depend on the standard library's
// distribution implementations (std::uniform_real_distribution is not
// specified bit-for-bit), so reports are reproducible across toolchains.

#include <pke/cotangent.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace pke {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(eng_() % span);
  }

 private:
  std::mt19937_64 eng_;
};

/// Points with every x^i and xi_i uniform in [-radius, radius].
inline std::vector<CotangentPoint> sample_points(int dim, int count, std::uint64_t seed, double radius) {
  Rng rng(seed);
  std::vector<CotangentPoint> out(static_cast<std::size_t>(count));
  for (auto& p : out) {
    p.x.resize(static_cast<std::size_t>(dim));
    p.xi.resize(static_cast<std::size_t>(dim));
    for (auto& v : p.x) v = rng.uniform(-radius, radius);
    for (auto& v : p.xi) v = rng.uniform(-radius, radius);
  }
  return out;
}

}  // namespace pke
