#pragma once

#include <cstdint>
#include <random>

namespace dsub {

using Rng = std::mt19937_64;

/// Stream roles mixed into derived seeds so that data, initialization and
/// topology draws never share a stream.
enum class StreamRole : std::uint64_t {
  kModel = 1,
  kTopology = 2,
  kData = 3,
  kInit = 4,
};

/// SplitMix64 finalizer.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for stream (master, role, run, node):
///   s = mix64(master)
///   s = mix64(s ^ role), s = mix64(s ^ (run + 1)), s = mix64(s ^ (node + 1))
/// Streams depend only on their indices, never on draw order elsewhere.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, StreamRole role, std::uint64_t run,
                                        std::uint64_t node) noexcept;

[[nodiscard]] inline Rng make_stream(std::uint64_t master, StreamRole role, std::uint64_t run,
                                     std::uint64_t node) {
  return Rng(derive_seed(master, role, run, node));
}

}  // namespace dsub
