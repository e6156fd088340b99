#pragma once

#include <cstdint>
#include <random>

namespace qflow {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Engine for (seed, stream); distinct streams give independent deterministic
/// sequences, so per-trajectory draws do not depend on iteration order.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::uint64_t s = seed ^ (0x517cc1b727220a95ULL * (stream + 1));
  std::uint64_t a = splitmix64(s);
  std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<unsigned>(a), static_cast<unsigned>(a >> 32),
                    static_cast<unsigned>(b), static_cast<unsigned>(b >> 32)};
  return Rng(seq);
}

/// Uniform draw in (0, 1]; the closed top end keeps -log(u) finite.
inline double uniform01(Rng& rng) {
  return (double((rng() >> 11) + 1)) * 0x1.0p-53;
}

inline int fair_sign(Rng& rng) { return (rng() & 1u) ? 1 : -1; }

}  // namespace qflow
