#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace moljson {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Seed for a named sub-stream, so each stratum draws independently.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return fnv1a(std::to_string(seed) + "/" + std::string(label));
}

/// Uniform integer in [0, bound) by rejection; identical on every platform
/// because mt19937_64 output is fully specified.
inline std::uint64_t uniform_below(std::mt19937_64 &rng, std::uint64_t bound) {
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % bound;
  }
}

template <class T>
void seeded_shuffle(std::vector<T> &v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace moljson
