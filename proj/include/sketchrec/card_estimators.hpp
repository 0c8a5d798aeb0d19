#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sketchrec/discrete_dist.hpp"
#include "sketchrec/freq_estimators.hpp"
#include "sketchrec/sketch.hpp"

namespace skr {

struct CardinalityEstimate {
  double value = 0.0;
  Kind method = Kind::DP;
  std::optional<uint64_t> mc_seed;
  double mc_stderr = 0.0;
  SmoothingParams params;
  // Set when the raw value fell outside [0, n] and was clamped.
  bool clamped = false;
};

// K = a sum_j c_j / (1 + c_j) (psi(1 + c_j + a) - psi(a)), a = theta / J, q_j = c_j / n.
CardinalityEstimate estimate_card_dp(std::span<const uint64_t> counts, double theta);
CardinalityEstimate estimate_card_dp(const Sketch& sketch, double theta);

// (1 - (1 - v)^{c+1}) / v, with the v -> 0 limit c + 1.
double card_integrand(double v, uint64_t c);

// Monte Carlo over shared draws of V; DP-aliased params fall back to the closed form.
CardinalityEstimate estimate_card_nggp(std::span<const uint64_t> counts, const SmoothingParams& params,
                                       const MonteCarloConfig& mc);
CardinalityEstimate estimate_card_nggp(const Sketch& sketch, const SmoothingParams& params,
                                       const MonteCarloConfig& mc);

// Conditional expectation of K_n given the sketch under a known P.
double eps_k_known_P(const DiscreteDist& P, const std::vector<uint32_t>& buckets,
                     std::span<const uint64_t> counts);
double eps_k_known_P(const DiscreteDist& P, const HashFunction& h, const Sketch& sketch);
// Same quantity through n sum_j q_j sum_r pi_j(r; P) / (r + 1).
double eps_k_known_P_series(const DiscreteDist& P, const std::vector<uint32_t>& buckets,
                            std::span<const uint64_t> counts);

// (r + 1) m_{r+1} / n, with m[i] holding the number of symbols seen exactly i + 1 times.
double good_turing(std::span<const uint64_t> m, uint64_t n, uint64_t r);

}  // namespace skr
