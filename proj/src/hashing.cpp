#include "sketchrec/hashing.hpp"

#include <string>

#include "sketchrec/error.hpp"

namespace skr {
namespace {

uint64_t fmix64(uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

uint64_t reduce61(uint64_t x) {
  x = (x & kMersenne61) + (x >> 61);
  return x >= kMersenne61 ? x - kMersenne61 : x;
}

uint64_t mulmod61(uint64_t a, uint64_t b) {
  __uint128_t prod = static_cast<__uint128_t>(a) * b;
  uint64_t lo = static_cast<uint64_t>(prod) & kMersenne61;
  uint64_t hi = static_cast<uint64_t>(prod >> 61);
  return reduce61(lo + hi);
}

}  // namespace

uint64_t key64(uint64_t x) { return fmix64(x); }

uint64_t key64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmix64(h);
}

HashFunction HashFunction::from_seeds(uint64_t a, uint64_t b, uint32_t J) {
  if (J == 0) fail(Errc::invalid_argument, "hash width J must be >= 1");
  if (a == 0 || a >= kMersenne61) fail(Errc::invalid_argument, "seed_a must lie in [1, 2^61-1)");
  if (b >= kMersenne61) fail(Errc::invalid_argument, "seed_b must lie in [0, 2^61-1)");
  return HashFunction{a, b, J};
}

uint32_t HashFunction::operator()(uint64_t k) const {
  uint64_t x = reduce61(mulmod61(seed_a, reduce61(k)) + seed_b);
  return static_cast<uint32_t>(x % width);
}

HashFunction draw_hash(Rng& rng, uint32_t J) {
  if (J == 0) fail(Errc::invalid_argument, "hash width J must be >= 1");
  std::uniform_int_distribution<uint64_t> da(1, kMersenne61 - 1);
  std::uniform_int_distribution<uint64_t> db(0, kMersenne61 - 1);
  uint64_t a = da(rng);
  uint64_t b = db(rng);
  return HashFunction{a, b, J};
}

uint32_t evaluate(const HashFunction& h, uint64_t k) { return h(k); }

}  // namespace skr
