#pragma once

#include <cstdint>
#include <random>

namespace mirrorcoin {

// Every random draw comes from a std::mt19937_64 seeded with
// splitmix64-mix(master seed, purpose tag, index). Streams for different
// purposes or run indices are therefore independent and reproducible.
using Rng = std::mt19937_64;

enum class StreamTag : std::uint64_t {
  Init = 1,
  Langevin = 2,
  GroundTruth = 3,
  TargetData = 4,
  NoiseFloor = 5,
  Sweep = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t master, StreamTag tag, std::uint64_t index) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(tag));
  return splitmix64(s ^ index);
}

inline Rng make_stream(std::uint64_t master, StreamTag tag, std::uint64_t index = 0) {
  return Rng(stream_seed(master, tag, index));
}

}  // namespace mirrorcoin
