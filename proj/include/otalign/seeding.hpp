#pragma once

#include <cstdint>

namespace otalign {

// splitmix64 step; used to expand one root seed into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ splitmix64(stream)) ^ index);
}

}  // namespace otalign
