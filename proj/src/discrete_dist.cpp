#include "sketchrec/discrete_dist.hpp"

#include <cmath>

#include "sketchrec/error.hpp"

namespace skr {

void DiscreteDist::validate() const {
  if (probs.empty()) fail(Errc::invalid_argument, "distribution has no support");
  if (symbols.size() != probs.size()) fail(Errc::invalid_argument, "symbols and probs differ in length");
  double s = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) fail(Errc::invalid_argument, "probabilities must be non-negative");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12) fail(Errc::invalid_argument, "probabilities must sum to 1");
}

DiscreteDist DiscreteDist::uniform(size_t k) {
  DiscreteDist P;
  for (size_t i = 0; i < k; ++i) {
    P.symbols.push_back(i);
    P.probs.push_back(1.0 / static_cast<double>(k));
  }
  return P;
}

std::vector<uint32_t> assign_buckets(const DiscreteDist& P, const HashFunction& h) {
  std::vector<uint32_t> b(P.size());
  for (size_t i = 0; i < P.size(); ++i) b[i] = h(key64(P.symbols[i]));
  return b;
}

std::vector<double> bucket_masses(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J) {
  if (buckets.size() != P.size()) fail(Errc::invalid_argument, "bucket assignment length differs from support");
  std::vector<double> q(J, 0.0);
  for (size_t i = 0; i < P.size(); ++i) {
    if (buckets[i] >= J) fail(Errc::invalid_argument, "bucket index out of range");
    q[buckets[i]] += P.probs[i];
  }
  return q;
}

}  // namespace skr
