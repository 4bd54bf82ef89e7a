#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace radcl {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t state = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    state ^= static_cast<std::uint64_t>(p[i]);
    state *= kFnvPrime;
  }
  return state;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t state = kFnvOffset) {
  return fnv1a64(s.data(), s.size(), state);
}

std::string hex64(std::uint64_t v);

// FNV-1a over a file's bytes, as a 16-char hex string. Throws DataError if
// the file cannot be read.
std::string hash_file(const std::string& path);

}  // namespace radcl
