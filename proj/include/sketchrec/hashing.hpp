#pragma once

#include <cstdint>
#include <string_view>

#include "sketchrec/rng.hpp"

namespace skr {

inline constexpr uint64_t kMersenne61 = (uint64_t{1} << 61) - 1;

// Seedless reduction of a symbol to 64 bits. Integers go through the
// murmur3 finalizer (a bijection), strings through FNV-1a then the finalizer.
uint64_t key64(uint64_t x);
uint64_t key64(std::string_view s);

// h(x) = ((a * x + b) mod p) mod J, p = 2^61 - 1. Operates on key64 values.
struct HashFunction {
  uint64_t seed_a = 1;
  uint64_t seed_b = 0;
  uint32_t width = 1;

  static HashFunction from_seeds(uint64_t a, uint64_t b, uint32_t J);
  uint32_t operator()(uint64_t k) const;
  bool operator==(const HashFunction&) const = default;
};

HashFunction draw_hash(Rng& rng, uint32_t J);
uint32_t evaluate(const HashFunction& h, uint64_t k);

}  // namespace skr
