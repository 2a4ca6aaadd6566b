#pragma once

#include <compare>
#include <cstdint>

namespace coop {

struct Seed {
  std::uint64_t value = 0;
  auto operator<=>(const Seed&) const = default;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of sub-stream `stream` of `master`:
///   mix64(mix64(master) ^ mix64(stream + 0x5851f42d4c957f2d)).
/// Sub-stream seeds depend only on (master, stream), never on worker count.
constexpr Seed derive_seed(Seed master, std::uint64_t stream) {
  return Seed{mix64(mix64(master.value) ^ mix64(stream + 0x5851f42d4c957f2dULL))};
}

}  // namespace coop
