#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace svfi {

// splitmix64; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic seed derivation: every random stream in the system is keyed
// by (master seed, purpose tag, indices) so that results do not depend on
// evaluation order or thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t i = 0, std::uint64_t j = 0) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(tag));
  h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
  h = splitmix64(h ^ (0xc2b2ae3d27d4eb4fULL * (j + 1)));
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace svfi
