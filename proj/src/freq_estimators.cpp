#include "sketchrec/freq_estimators.hpp"

#include <algorithm>
#include <cmath>

#include "sketchrec/error.hpp"
#include "sketchrec/specfun.hpp"

namespace skr {

SmoothingParams SmoothingParams::dp(double theta) {
  SmoothingParams p;
  p.kind = Kind::DP;
  p.theta = theta;
  p.validate();
  return p;
}

SmoothingParams SmoothingParams::nggp(double theta, double alpha, double tau) {
  SmoothingParams p;
  p.kind = Kind::NGGP;
  p.theta = theta;
  p.alpha = alpha;
  p.tau = tau;
  p.validate();
  return p;
}

void SmoothingParams::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) fail(Errc::domain, "theta must be positive and finite");
  if (kind == Kind::NGGP) {
    if (!(alpha >= 0.0 && alpha < 1.0)) fail(Errc::domain, "alpha must lie in [0, 1)");
    if (!(tau > 0.0) || !std::isfinite(tau)) fail(Errc::domain, "tau must be positive and finite");
  }
}

FreqDistribution::FreqDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) fail(Errc::invalid_argument, "empty pmf");
  double s = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0)) fail(Errc::invalid_argument, "pmf entries must be non-negative");
    s += p;
  }
  if (!(s > 0.0) || !std::isfinite(s)) fail(Errc::degenerate, "pmf has zero total mass");
  for (double& p : pmf_) p /= s;
}

FreqDistribution FreqDistribution::point_mass(uint64_t r) {
  std::vector<double> v(r + 1, 0.0);
  v[r] = 1.0;
  return FreqDistribution(std::move(v));
}

double FreqDistribution::mean() const {
  double m = 0.0;
  for (size_t r = 0; r < pmf_.size(); ++r) m += r * pmf_[r];
  return m;
}

double FreqDistribution::cdf(uint64_t r) const {
  double s = 0.0;
  for (size_t i = 0; i <= r && i < pmf_.size(); ++i) s += pmf_[i];
  return std::min(1.0, s);
}

uint64_t FreqDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) fail(Errc::invalid_argument, "quantile level must lie in [0, 1]");
  // Slack absorbs rounding in the running sum.
  const double target = p - 1e-12;
  double s = 0.0;
  for (size_t r = 0; r < pmf_.size(); ++r) {
    s += pmf_[r];
    if (s >= target) return r;
  }
  return pmf_.size() - 1;
}

FreqDistribution pi_dp(uint64_t c, double theta, uint32_t J) {
  if (!(theta > 0.0) || J == 0) fail(Errc::domain, "pi_dp requires theta > 0, J >= 1");
  const double a = theta / J;
  // Beta-Binomial(c, 1, a): pmf(0) = a / (a + c), pmf(r+1) / pmf(r) = (c - r) / (a + c - r - 1).
  std::vector<double> pmf(c + 1);
  double logp = std::log(a) - std::log(a + static_cast<double>(c));
  pmf[0] = std::exp(logp);
  for (uint64_t r = 0; r < c; ++r) {
    logp += std::log(static_cast<double>(c - r)) - std::log(a + static_cast<double>(c - r) - 1.0);
    pmf[r + 1] = std::exp(logp);
  }
  return FreqDistribution(std::move(pmf));
}

std::vector<double> draw_V(const SmoothingParams& params, uint32_t J, const MonteCarloConfig& mc) {
  params.validate();
  if (mc.samples == 0) fail(Errc::invalid_argument, "Monte Carlo sample size must be >= 1");
  Rng rng(mc.seed);
  std::vector<double> v(mc.samples);
  if (params.is_dp()) {
    for (auto& x : v) x = sample_V_dp(rng, params.theta, J);
  } else {
    for (auto& x : v) x = sample_V_nggp(rng, params.theta, params.alpha, params.tau, J);
  }
  return v;
}

FreqDistribution binomial_mixture(uint64_t c, std::span<const double> v) {
  if (v.empty()) fail(Errc::invalid_argument, "Monte Carlo sample size must be >= 1");
  std::vector<double> acc(c + 1, 0.0);
  const double cd = static_cast<double>(c);
  const double lgc = std::lgamma(cd + 1.0);
  for (double p : v) {
    if (p <= 0.0 || c == 0) {
      acc[0] += 1.0;
      continue;
    }
    if (p >= 1.0) {
      acc[c] += 1.0;
      continue;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const uint64_t mode = std::min<uint64_t>(c, static_cast<uint64_t>(std::floor((cd + 1.0) * p)));
    const double md = static_cast<double>(mode);
    const double lmode = lgc - std::lgamma(md + 1.0) - std::lgamma(cd - md + 1.0) + md * lp + (cd - md) * lq;
    const double pmode = std::exp(lmode);
    const double odds = p / (1.0 - p);
    const double cut = pmode * 1e-18;
    acc[mode] += pmode;
    double t = pmode;
    for (uint64_t r = mode; r < c; ++r) {
      t *= static_cast<double>(c - r) / static_cast<double>(r + 1) * odds;
      if (t < cut) break;
      acc[r + 1] += t;
    }
    t = pmode;
    for (uint64_t r = mode; r > 0; --r) {
      t *= static_cast<double>(r) / static_cast<double>(c - r + 1) / odds;
      if (t < cut) break;
      acc[r - 1] += t;
    }
  }
  return FreqDistribution(std::move(acc));
}

FreqDistribution pi_nggp(uint64_t c, const SmoothingParams& params, uint32_t J, const MonteCarloConfig& mc) {
  if (mc.samples == 0) fail(Errc::invalid_argument, "Monte Carlo sample size must be >= 1");
  if (params.is_dp()) return pi_dp(c, params.theta, J);
  if (c == 0) return FreqDistribution::point_mass(0);
  auto v = draw_V(params, J, mc);
  return binomial_mixture(c, v);
}

double estimate_freq_dp(uint64_t c, double theta, uint32_t J) {
  if (!(theta >= 0.0) || J == 0) fail(Errc::domain, "estimate_freq_dp requires theta >= 0, J >= 1");
  return static_cast<double>(c) * J / (theta + J);
}

double estimate_freq_nggp(uint64_t c, const SmoothingParams& params, uint32_t J) {
  params.validate();
  if (params.is_dp()) return estimate_freq_dp(c, params.theta, J);
  const double cd = static_cast<double>(c);
  return std::clamp(cd * mean_V_nggp(params.theta, params.alpha, params.tau, J), 0.0, cd);
}

uint64_t estimate_freq_cms(uint64_t c) { return c; }

double estimate_freq(uint64_t c, const SmoothingParams& params, uint32_t J) {
  if (params.is_dp()) return estimate_freq_dp(c, params.theta, J);
  return estimate_freq_nggp(c, params, J);
}

}  // namespace skr
