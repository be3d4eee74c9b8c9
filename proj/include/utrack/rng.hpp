#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

namespace utrack {

/// Seeded generator with a fixed, portable set of distributions.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the C++
/// standard. The standard library distributions are not, so the transforms are
/// defined here:
///   uniform()       = (next() >> 11) * 2^-53, in [0, 1)
///   uniform(a, b)   = a + (b - a) * uniform()
///   index(n)        = floor(uniform() * n), clamped to n - 1
///   normal()        = Box-Muller on (u1, u2) with u1 = 1 - uniform() in (0, 1];
///                     returns r*cos(2*pi*u2) and caches r*sin(2*pi*u2) for the
///                     next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

}  // namespace utrack
