#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace touchloc {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

/// Derives an independent, reproducible stream from (seed, purpose tag).
///
/// Streams are keyed by name rather than drawn sequentially from a parent, so
/// adding a consumer (a new metric, a new generator) never shifts the numbers
/// any other consumer sees.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  Rng stream(std::string_view tag) const {
    return Rng(mix64(mix64(seed_) ^ fnv1a(tag)));
  }

  StreamFactory child(std::string_view tag) const {
    return StreamFactory(mix64(seed_ ^ mix64(fnv1a(tag))));
  }

 private:
  std::uint64_t seed_;
};

}  // namespace touchloc
