#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sketchrec/freq_estimators.hpp"
#include "sketchrec/sketch.hpp"

namespace skr {

enum class Rule { PoE, Min, CMS };

// Product of experts on the common support {0..min_l c_l}, renormalized in log space.
FreqDistribution aggregate_poe(std::span<const FreqDistribution> experts);
// Law of the minimum of independent draws, one per expert.
FreqDistribution aggregate_min(std::span<const FreqDistribution> experts);
// Product of Beta-Binomial(c_l, 1, theta/J) experts, evaluated in log space.
FreqDistribution dp_multihash_pmf(std::span<const uint64_t> counts, double theta, uint32_t J);
// Same with a separate theta per view.
FreqDistribution dp_multihash_pmf(std::span<const uint64_t> counts, std::span<const double> thetas, uint32_t J);

// One expert per view: pi_dp, or pi_nggp with a per-view seed derived from mc.seed.
std::vector<FreqDistribution> build_experts(std::span<const uint64_t> counts, std::span<const SmoothingParams> params,
                                            uint32_t J, const MonteCarloConfig& mc);

struct MultiviewEstimate {
  double point = 0.0;
  std::optional<FreqDistribution> dist;
};

// Aggregates the bucket counts c_{l, h_l(key)}; params holds one entry per view or a single shared entry.
MultiviewEstimate estimate_freq_multiview(std::span<const uint64_t> counts, std::span<const SmoothingParams> params,
                                          uint32_t J, Rule rule, const MonteCarloConfig& mc = {});
MultiviewEstimate estimate_freq_multiview(const MultiSketch& ms, uint64_t key, std::span<const SmoothingParams> params,
                                          Rule rule, const MonteCarloConfig& mc = {});

}  // namespace skr
