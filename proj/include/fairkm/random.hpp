#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fairkm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream per (seed, stream) pair, e.g. one stream per run.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0)
{
  return Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

// The distributions below are written out so results do not depend on the
// standard library's distribution implementations.

inline double uniform01(Rng &rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n)
{
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Standard normal via Box-Muller.
inline double standard_normal(Rng &rng)
{
  double u1 = uniform01(rng);
  while (u1 <= 0.0)
  {
    u1 = uniform01(rng);
  }
  double const u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace fairkm
