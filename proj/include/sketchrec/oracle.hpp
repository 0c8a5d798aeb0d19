#pragma once

#include <cstdint>
#include <vector>

#include "sketchrec/discrete_dist.hpp"
#include "sketchrec/freq_estimators.hpp"

namespace skr {

// Bucket assignment of every support point, one vector per hash row.
using BucketMap = std::vector<std::vector<uint32_t>>;

// pi_j(r; P) = C(c, r) sum_{s in S_j} (p_s/q_j)^{r+1} (1 - p_s/q_j)^{c-r}.
double pi_known_P(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint64_t c, uint32_t j,
                  uint64_t r);
FreqDistribution pi_known_P_dist(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint64_t c,
                                 uint32_t j);

inline constexpr double kEnumerationLimit = 1e7;

// Exact law of f_{X_{n+1}} given the sketch counts c[l][t] and h_l(X_{n+1}) = j[l], by
// enumeration of S^{n+1}. Work is split over the first symbol across threads.
FreqDistribution enumerate_conditional(const DiscreteDist& P, const BucketMap& buckets, uint32_t J,
                                       uint64_t n, const std::vector<std::vector<uint64_t>>& c,
                                       const std::vector<uint32_t>& j, unsigned threads = 0);

// Multi-hash conditional law in its general form: ratios of sums over bucket-tuple
// sequences with the observed marginals. Returned unnormalized so callers can check mass.
std::vector<double> multihash_conditional_general(const DiscreteDist& P, const BucketMap& buckets, uint32_t J,
                                                  uint64_t n, const std::vector<std::vector<uint64_t>>& c,
                                                  const std::vector<uint32_t>& j);

// Multinomial(n, q) probability of the bucket-count vector c.
double sketch_pmf(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J, uint64_t n,
                  const std::vector<uint64_t>& c);

// Quadratic risk of f_beta = beta * C_{h(X_{n+1})}.
double risk_freq_exact(double beta, const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J,
                       uint64_t n);
// Minimizer of the quadratic above.
double risk_freq_vertex(const DiscreteDist& P, const std::vector<uint32_t>& buckets, uint32_t J, uint64_t n);

struct MinimaxConfig {
  int beta_grid = 201;
  int random_candidates = 2000;
  uint64_t seed = 1;
};

struct MinimaxResult {
  double beta_star = 0.0;
  double worst_risk = 0.0;
  std::vector<double> worst_P;
  // Total variation from the uniform law on K*J points.
  double tv_to_uniform = 0.0;
  size_t worst_support = 0;
  // Risk of (1/K, uniform) and the risk-minimizing beta under uniform P.
  double risk_uniform_at_inv_k = 0.0;
  double uniform_vertex = 0.0;
};

// Nested grid: for every beta on [0, 1], maximize risk over a structured family of P supported on
// K symbols per bucket (uniform laws over k points in round-robin and bucket-packed layouts,
// plus random simplex draws); return the beta minimizing that maximum.
MinimaxResult minimax_grid_check(uint64_t n, uint32_t J, uint32_t K, const MinimaxConfig& cfg = {});

// Upper bound U(q, beta) on the risk of the linear estimator of M_{r+1,n}.
double card_worstcase_bound(const std::vector<double>& q, const std::vector<double>& beta, uint64_t n,
                            uint64_t r);

}  // namespace skr
