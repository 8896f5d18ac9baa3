#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fpfc {

using Rng = std::mt19937_64;

/// Stream tags keep substreams for different purposes disjoint.
enum class Stream : std::uint64_t {
  Init = 1,
  Sampling = 2,
  LocalBatch = 3,
  Delay = 4,
  Data = 5,
  Split = 6,
  Tuning = 7,
};

/// Mixes a base seed with a list of tags into an independent 64-bit seed
/// (splitmix64 finaliser applied per tag).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(base, tags));
}

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

}  // namespace fpfc
