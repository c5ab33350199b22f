#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace maple {

// splitmix64, used to derive independent seeds from a master seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// FNV-1a, stable across platforms. Used to hash stream names.
inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derives a named child seed from a master seed. Distinct names give
// unrelated streams; the same (seed, name, index) always gives the same
// value, which keeps runs reproducible without sharing generator state
// between components.
inline uint64_t derive_seed(uint64_t master, std::string_view stream,
                            uint64_t index = 0) {
  uint64_t h = splitmix64(master ^ fnv1a(stream));
  return splitmix64(h + 0x9e3779b97f4a7c15ull * (index + 1));
}

inline std::mt19937_64 make_rng(uint64_t master, std::string_view stream,
                                uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

}  // namespace maple
