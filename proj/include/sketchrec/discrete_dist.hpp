#pragma once

#include <cstdint>
#include <vector>

#include "sketchrec/hashing.hpp"

namespace skr {

struct DiscreteDist {
  std::vector<uint64_t> symbols;
  std::vector<double> probs;

  void validate() const;
  size_t size() const { return probs.size(); }
  static DiscreteDist uniform(size_t k);
};

// Bucket of each symbol under h, i.e. h(key64(symbol)).
std::vector<uint32_t> assign_buckets(const DiscreteDist& P, const HashFunction& h);
// q_j = sum of p_s over symbols with bucket j.
std::vector<double> bucket_masses(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J);

}  // namespace skr
