#ifndef COPULA_FORGE_RNG_HPP
#define COPULA_FORGE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace copula_forge {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent generator for sub-stream `index` of `seed`. Row-parallel
// samplers give every row its own stream so results do not depend on how
// rows are split across threads.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)),
                    static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                    static_cast<std::uint32_t>(splitmix64(index ^ 0x5bd1e995ULL)),
                    static_cast<std::uint32_t>(splitmix64(index) >> 32)};
  return Rng(seq);
}

// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double unit_exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

}  // namespace copula_forge

#endif  // COPULA_FORGE_RNG_HPP
