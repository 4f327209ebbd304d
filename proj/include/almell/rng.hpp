#pragma once

// Deterministic, counter-based random sampling.
//
// Every Monte Carlo draw is produced by a generator keyed on (seed, index),
// where index is the global sample number.  Two runs with the same seed give
// bitwise-identical streams regardless of how samples are distributed over
// worker threads, which is what makes reports byte-for-byte reproducible.

#include <cmath>
#include <cstdint>

namespace almell {

namespace detail {
// splitmix64 finalizer; also used to mix seed and counter into a stream key.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

class SampleRng {
 public:
  // Stream keyed by (seed, index); distinct indices give independent streams.
  SampleRng(std::uint64_t seed, std::uint64_t index)
      : m_state(detail::mix64(detail::mix64(seed) ^ (0x9e3779b97f4a7c15ull * (index + 1)))) {}

  std::uint64_t next_u64() {
    m_state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = m_state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t bound = ~0ull - ~0ull % static_cast<std::uint64_t>(n);
    std::uint64_t v;
    do { v = next_u64(); } while (v >= bound);
    return static_cast<int>(v % static_cast<std::uint64_t>(n));
  }

  // Standard normal via Box-Muller (pair cached).
  double normal() {
    if (m_has_cached) {
      m_has_cached = false;
      return m_cached;
    }
    double u1 = uniform01(), u2 = uniform01();
    // Guard the log against u1 == 0.
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    m_cached = r * std::sin(theta);
    m_has_cached = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t m_state;
  bool m_has_cached = false;
  double m_cached = 0.0;
};

}  // namespace almell
