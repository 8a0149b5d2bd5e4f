#pragma once

#include <cmath>
#include <cstdint>

namespace adalopo {

//! Counter-based deterministic random stream.
//!
//! The i-th variate is a pure function of (seed, i), so streams can be
//! evaluated in any order and datasets are reproducible across platforms.
//! Exact algorithm, fixed for reproducibility:
//!   state(seed, i) = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)
//!   mix64(z): z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//!             z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31
//!   uniform(i)  = (state >> 11) * 2^-53            in [0, 1)
//!   gaussian(i) = sqrt(-2 ln(1 - uniform(2i))) * cos(2 pi uniform(2i+1))
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  //! Derived stream for a fixed purpose tag (design draws vs noise draws).
  static CounterRng substream(std::uint64_t seed, std::uint64_t tag) {
    return CounterRng{mix64(seed ^ (0xD1B54A32D192ED03ULL * (tag + 1)))};
  }

  double uniform(std::uint64_t i) const {
    std::uint64_t s = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15ULL);
    return static_cast<double>(s >> 11) * 0x1.0p-53;
  }

  double gaussian(std::uint64_t i) const {
    double u1 = 1.0 - uniform(2 * i); // (0, 1]: keeps the log finite
    double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

} // namespace adalopo
