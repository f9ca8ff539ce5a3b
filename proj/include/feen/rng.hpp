#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

// Counter-based random number generation.  Every draw is a pure function of
// its key, so streams keyed by (seed, sample, mode, slot) are reproducible
// regardless of evaluation order and can be sampled independently.

namespace feen::rng {

inline std::uint64_t mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t key4(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                          std::uint64_t d) {
  std::uint64_t h = mix(a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return mix(h ^ d);
}

inline double to_unit(std::uint64_t bits) {
  // 53-bit mantissa, value in [0, 1)
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline std::uint64_t bits(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                          std::uint64_t d) {
  return key4(a, b, c, d);
}

inline double uniform(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                      std::uint64_t d) {
  return to_unit(key4(a, b, c, d));
}

// Box-Muller pair; u1 is kept in (0, 1] so the log is finite.
inline std::pair<double, double> normal_pair(std::uint64_t a, std::uint64_t b,
                                             std::uint64_t c, std::uint64_t d) {
  const std::uint64_t h1 = key4(a, b, c, d);
  const std::uint64_t h2 = mix(h1 ^ 0xD1B54A32D192ED03ull);
  const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = to_unit(h2);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

inline double normal(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                     std::uint64_t d) {
  return normal_pair(a, b, c, d).first;
}

}  // namespace feen::rng
