#include "radcl/hashing.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "radcl/errors.hpp"

namespace radcl {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path);
  std::uint64_t state = kFnvOffset;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    state = fnv1a64(buf.data(), static_cast<std::size_t>(in.gcount()), state);
  }
  return hex64(state);
}

}  // namespace radcl
