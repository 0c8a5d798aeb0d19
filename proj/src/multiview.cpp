#include "sketchrec/multiview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sketchrec/error.hpp"
#include "sketchrec/rng.hpp"

namespace skr {
namespace {

FreqDistribution normalize_log(std::vector<double> logw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : logw) mx = std::max(mx, x);
  if (!std::isfinite(mx)) fail(Errc::degenerate, "product of experts has zero mass on the common support");
  for (double& x : logw) x = std::exp(x - mx);
  return FreqDistribution(std::move(logw));
}

}  // namespace

FreqDistribution aggregate_poe(std::span<const FreqDistribution> experts) {
  if (experts.empty()) fail(Errc::invalid_argument, "at least one expert is required");
  uint64_t top = std::numeric_limits<uint64_t>::max();
  for (const auto& e : experts) top = std::min(top, e.support_max());
  std::vector<double> logw(top + 1, 0.0);
  for (const auto& e : experts)
    for (uint64_t r = 0; r <= top; ++r) logw[r] += std::log(e.pmf(r));
  return normalize_log(std::move(logw));
}

FreqDistribution aggregate_min(std::span<const FreqDistribution> experts) {
  if (experts.empty()) fail(Errc::invalid_argument, "at least one expert is required");
  uint64_t top = std::numeric_limits<uint64_t>::max();
  for (const auto& e : experts) top = std::min(top, e.support_max());
  // surv[r] = prod_l Pr[X_l > r].
  std::vector<double> surv(top + 1, 1.0);
  for (const auto& e : experts) {
    auto m = e.masses();
    double tail = 0.0;
    for (size_t r = m.size(); r-- > 0;) {
      if (r <= top) surv[r] *= tail;
      tail += m[r];
    }
  }
  std::vector<double> pmf(top + 1);
  double prev = 1.0;
  for (uint64_t r = 0; r <= top; ++r) {
    pmf[r] = std::max(0.0, prev - surv[r]);
    prev = surv[r];
  }
  return FreqDistribution(std::move(pmf));
}

FreqDistribution dp_multihash_pmf(std::span<const uint64_t> counts, double theta, uint32_t J) {
  std::vector<double> thetas(counts.size(), theta);
  return dp_multihash_pmf(counts, thetas, J);
}

FreqDistribution dp_multihash_pmf(std::span<const uint64_t> counts, std::span<const double> thetas, uint32_t J) {
  if (counts.empty()) fail(Errc::invalid_argument, "at least one view is required");
  if (thetas.size() != counts.size()) fail(Errc::invalid_argument, "need one theta per view");
  if (J == 0) fail(Errc::domain, "dp_multihash_pmf requires J >= 1");
  const uint64_t top = *std::min_element(counts.begin(), counts.end());
  std::vector<double> logw(top + 1, 0.0);
  for (size_t l = 0; l < counts.size(); ++l) {
    if (!(thetas[l] > 0.0)) fail(Errc::domain, "dp_multihash_pmf requires theta > 0");
    const double a = thetas[l] / J;
    const double cd = static_cast<double>(counts[l]);
    double lp = std::log(a) - std::log(a + cd);
    logw[0] += lp;
    for (uint64_t r = 0; r < top; ++r) {
      lp += std::log(cd - static_cast<double>(r)) - std::log(a + cd - static_cast<double>(r) - 1.0);
      logw[r + 1] += lp;
    }
  }
  return normalize_log(std::move(logw));
}

std::vector<FreqDistribution> build_experts(std::span<const uint64_t> counts, std::span<const SmoothingParams> params,
                                            uint32_t J, const MonteCarloConfig& mc) {
  if (params.size() != 1 && params.size() != counts.size())
    fail(Errc::invalid_argument, "need one shared parameter set or one per view");
  std::vector<FreqDistribution> out;
  out.reserve(counts.size());
  for (size_t l = 0; l < counts.size(); ++l) {
    const SmoothingParams& p = params.size() == 1 ? params[0] : params[l];
    if (p.is_dp()) {
      out.push_back(pi_dp(counts[l], p.theta, J));
    } else {
      MonteCarloConfig view_mc = mc;
      view_mc.seed = derive_seed(mc.seed, l);
      out.push_back(pi_nggp(counts[l], p, J, view_mc));
    }
  }
  return out;
}

MultiviewEstimate estimate_freq_multiview(std::span<const uint64_t> counts, std::span<const SmoothingParams> params,
                                          uint32_t J, Rule rule, const MonteCarloConfig& mc) {
  if (counts.empty()) fail(Errc::invalid_argument, "at least one view is required");
  MultiviewEstimate out;
  if (rule == Rule::CMS) {
    out.point = static_cast<double>(*std::min_element(counts.begin(), counts.end()));
    return out;
  }
  if (params.empty()) fail(Errc::invalid_argument, "smoothing parameters are required");
  const bool shared_dp = params.size() == 1 && params[0].is_dp();
  if (rule == Rule::PoE && shared_dp) {
    out.dist = dp_multihash_pmf(counts, params[0].theta, J);
  } else {
    auto experts = build_experts(counts, params, J, mc);
    out.dist = rule == Rule::PoE ? aggregate_poe(experts) : aggregate_min(experts);
  }
  out.point = out.dist->mean();
  return out;
}

MultiviewEstimate estimate_freq_multiview(const MultiSketch& ms, uint64_t key, std::span<const SmoothingParams> params,
                                          Rule rule, const MonteCarloConfig& mc) {
  auto counts = ms.query(key);
  return estimate_freq_multiview(counts, params, ms.width(), rule, mc);
}

}  // namespace skr
