#pragma once

#include <cmath>
#include <cstdint>

namespace xdiff {

/// Counter-based deterministic random stream.
///
/// Every sample index owns an independent stream derived from (seed, index),
/// so sampling loops can be chunked across threads and still produce
/// bit-identical draws for a given index regardless of the thread count.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index)
      : state_(mix(seed ^ mix(index + 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1] (safe as a log argument).
  double uniform_pos() { return 1.0 - uniform(); }

  /// Exp(1) variate.
  double exponential() { return -std::log(uniform_pos()); }

  /// Standard normal variate (Box-Muller, pinned implementation so draws
  /// do not depend on the standard library's distribution internals).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double t = 6.283185307179586476925286766559 * uniform();
    return r * std::cos(t);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace xdiff
