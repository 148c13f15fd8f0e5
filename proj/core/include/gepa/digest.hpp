#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gepa {

// FNV-1a 64-bit. Stable across platforms and runs; used for cache keys,
// pool digests and run-log self-checks (not a cryptographic hash).
inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t value);

inline std::string digest_hex(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace gepa
