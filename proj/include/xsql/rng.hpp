#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xsql/tensor.hpp"

namespace xsql {

/// Deterministic random source. Sampling is implemented explicitly on top of
/// the raw mt19937_64 stream so that sequences are pinned by the seed alone,
/// independent of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  Real uniform01() {
    return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Box-Muller with cached spare.
  Real normal(Real mean, Real stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    Real u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    Real u2 = uniform01();
    Real r = std::sqrt(-2.0 * std::log(u1));
    Real theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  int uniform_int(int lo, int hi) {
    std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    std::uint64_t bound = range * (UINT64_MAX / range);
    std::uint64_t x = 0;
    do {
      x = next_u64();
    } while (x >= bound);
    return lo + static_cast<int>(x % range);
  }

  /// Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(0, i);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  Real spare_ = 0.0;
};

/// Stable seed derivation for independent sub-streams (per epoch, per split).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace xsql
