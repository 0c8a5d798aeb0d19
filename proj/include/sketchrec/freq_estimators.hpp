#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skr {

enum class Kind { DP, NGGP };

struct SmoothingParams {
  Kind kind = Kind::DP;
  double theta = 1.0;
  double alpha = 0.0;
  double tau = 1.0;
  std::string provenance = "fixed";

  static SmoothingParams dp(double theta);
  static SmoothingParams nggp(double theta, double alpha, double tau);
  void validate() const;
  // NGGP with alpha = 0 is the DP with the same theta.
  bool is_dp() const { return kind == Kind::DP || alpha == 0.0; }
};

struct MonteCarloConfig {
  uint64_t samples = 10000;
  uint64_t seed = 0;
};

// Probability mass over {0, ..., c}.
class FreqDistribution {
 public:
  FreqDistribution() : pmf_{1.0} {}
  explicit FreqDistribution(std::vector<double> pmf);
  static FreqDistribution point_mass(uint64_t r);

  uint64_t support_max() const { return pmf_.size() - 1; }
  double pmf(uint64_t r) const { return r < pmf_.size() ? pmf_[r] : 0.0; }
  std::span<const double> masses() const { return pmf_; }
  double mean() const;
  double cdf(uint64_t r) const;
  // Smallest r with cdf(r) >= p.
  uint64_t quantile(double p) const;

 private:
  std::vector<double> pmf_;
};

FreqDistribution pi_dp(uint64_t c, double theta, uint32_t J);

// Draws of the mixing variable V for the given params (Beta(1, theta/J) when DP).
std::vector<double> draw_V(const SmoothingParams& params, uint32_t J, const MonteCarloConfig& mc);
// Mixture of Binomial(c, v) rows over the supplied draws.
FreqDistribution binomial_mixture(uint64_t c, std::span<const double> v);
FreqDistribution pi_nggp(uint64_t c, const SmoothingParams& params, uint32_t J, const MonteCarloConfig& mc);

double estimate_freq_dp(uint64_t c, double theta, uint32_t J);
double estimate_freq_nggp(uint64_t c, const SmoothingParams& params, uint32_t J);
uint64_t estimate_freq_cms(uint64_t c);
// Dispatches on params.kind; DP-aliased NGGP goes to the DP formula.
double estimate_freq(uint64_t c, const SmoothingParams& params, uint32_t J);

}  // namespace skr
