#pragma once

#include <cmath>
#include <cstdint>

namespace scns {

// Counter-based Gaussian draws: every value is a pure function of the
// (seed, path, step, mode, draw) tuple, so realizations are independent of
// evaluation order and thread schedule.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t path,
                                  std::uint64_t step, std::uint64_t mode,
                                  std::uint64_t draw) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (path + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (step + 0x9e6c63d0876a9a47ULL));
  h = splitmix64(h ^ (mode + 0xd1b54a32d192ed03ULL));
  h = splitmix64(h ^ (draw + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

// Uniform in (0,1]; the shift keeps log() finite.
inline double uniform01(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53;
}

// Standard normal via Box-Muller on two independent counter streams.
inline double gauss_draw(std::uint64_t seed, std::uint64_t path,
                         std::uint64_t step, std::uint64_t mode) {
  const double u1 = uniform01(counter_hash(seed, path, step, mode, 0));
  const double u2 = uniform01(counter_hash(seed, path, step, mode, 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace scns
