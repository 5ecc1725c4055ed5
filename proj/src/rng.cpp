#include "lsmimo/rng.hpp"

namespace lsmimo {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv_byte(std::uint64_t h, std::uint8_t b) { return (h ^ b) * kFnvPrime; }

std::uint64_t fnv_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) h = fnv_byte(h, static_cast<std::uint8_t>(v >> (8 * i)));
  return h;
}

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t seed_substream(std::uint64_t master, std::string_view domain_tag, std::uint64_t index) {
  std::uint64_t h = kFnvOffset;
  for (char c : domain_tag) h = fnv_byte(h, static_cast<std::uint8_t>(c));
  h = fnv_byte(h, 0);
  h = fnv_u64(h, index);
  h = fnv_u64(h, master);
  return splitmix64_finalize(h);
}

}  // namespace lsmimo
