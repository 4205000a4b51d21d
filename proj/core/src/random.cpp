#include "dsub/random.hpp"

namespace dsub {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, StreamRole role, std::uint64_t run,
                          std::uint64_t node) noexcept {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ static_cast<std::uint64_t>(role));
  s = mix64(s ^ (run + 1));
  s = mix64(s ^ (node + 1));
  return s;
}

}  // namespace dsub
