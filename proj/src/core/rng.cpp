#include "edgefed/rng.hpp"

#include <stdexcept>

namespace edgefed {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// FNV-1a over the stream label.
std::uint64_t label_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::string_view stream_id, std::uint64_t run)
    : derived_(splitmix64(splitmix64(seed) ^ label_hash(stream_id) ^ splitmix64(run + 0x5851f42d4c957f2dULL))),
      engine_(derived_) {}

double SeededRng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t SeededRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below(0)");
  // Rejection sampling keeps the result unbiased and platform independent.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

}  // namespace edgefed
