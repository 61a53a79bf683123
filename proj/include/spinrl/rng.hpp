#ifndef SPINRL_RNG_HPP_
#define SPINRL_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace spinrl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent seed for a named stream ("init", "rollout",
// "noise", ...) and an optional index from a single root seed.
constexpr std::uint64_t split_seed(std::uint64_t root, std::string_view stream,
                                   std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(root ^ h) + mix64(index + 0x51ed2701ULL));
}

}  // namespace spinrl

#endif  // SPINRL_RNG_HPP_
