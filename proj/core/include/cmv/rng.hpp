#pragma once

#include <cstdint>
#include <random>

namespace cmv {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` under `master`. Streams are keyed only by
/// (master, stream) so the order in which they are consumed is irrelevant.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

// Reserved stream ids. Particle streams use the particle index directly.
inline constexpr std::uint64_t kObservationStream = 0x8000000000000000ULL;
inline constexpr std::uint64_t kProbeStream = 0x4000000000000000ULL;
inline constexpr std::uint64_t kBootstrapStream = 0x2000000000000000ULL;

using Engine = std::mt19937_64;

}  // namespace cmv
