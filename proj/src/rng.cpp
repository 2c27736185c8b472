#include "fpcocoa/rng.hpp"

namespace fpcocoa {

// SplitMix64 finalizer.
std::uint64_t SeedStream::mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SeedStream SeedStream::child(std::uint64_t index) const {
  return SeedStream(mix(seed_ ^ mix(index + 0x632be59bd9b4e019ULL)));
}

SeedStream SeedStream::child(const char* label) const {
  // FNV-1a over the label.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* c = label; *c != '\0'; ++c) {
    h ^= static_cast<unsigned char>(*c);
    h *= 0x100000001b3ULL;
  }
  return SeedStream(mix(seed_ + h));
}

}  // namespace fpcocoa
