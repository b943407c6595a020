#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace qmaps::detail {

// Canonical [0,1) double from the top 53 bits of the generator output. Used
// instead of std::uniform_real_distribution so that seeded streams are
// identical across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_pm(std::mt19937_64& rng, double halfwidth) {
  return (2.0 * uniform01(rng) - 1.0) * halfwidth;
}

inline std::complex<double> uniform_complex(std::mt19937_64& rng, double halfwidth) {
  const double re = uniform_pm(rng, halfwidth);
  const double im = uniform_pm(rng, halfwidth);
  return {re, im};
}

}  // namespace qmaps::detail
