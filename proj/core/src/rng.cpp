#include "bgch/rng.hpp"

#include <array>

namespace bgch {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::string_view name, std::uint64_t salt) {
  const std::uint64_t tag = fnv1a(name);
  std::array<std::uint32_t, 6> words = {
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(tag),  static_cast<std::uint32_t>(tag >> 32),
      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

Rng make_stream(std::uint64_t seed, std::string_view name) {
  return make_stream(seed, name, 0);
}

}  // namespace bgch
