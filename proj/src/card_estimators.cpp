#include "sketchrec/card_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sketchrec/error.hpp"
#include "sketchrec/oracle.hpp"
#include "sketchrec/specfun.hpp"

namespace skr {
namespace {

uint64_t total(std::span<const uint64_t> counts) {
  uint64_t n = 0;
  for (uint64_t c : counts) n += c;
  return n;
}

// psi(1 + c + a) - psi(a) = sum_{i=0}^{c} 1 / (a + i).
double digamma_span(double a, uint64_t c) {
  if (c < 64) {
    double s = 0.0;
    for (uint64_t i = 0; i <= c; ++i) s += 1.0 / (a + static_cast<double>(i));
    return s;
  }
  return 1.0 / a + digamma(1.0 + static_cast<double>(c) + a) - digamma(1.0 + a);
}

void clamp_to_n(CardinalityEstimate& est, uint64_t n) {
  const double hi = static_cast<double>(n);
  if (est.value < 0.0 || est.value > hi) {
    est.value = std::clamp(est.value, 0.0, hi);
    est.clamped = true;
  }
}

}  // namespace

CardinalityEstimate estimate_card_dp(std::span<const uint64_t> counts, double theta) {
  const uint64_t n = total(counts);
  if (n == 0) fail(Errc::invalid_argument, "cardinality estimation requires n >= 1");
  if (!(theta > 0.0)) fail(Errc::domain, "theta must be positive");
  const double a = theta / static_cast<double>(counts.size());
  double k = 0.0;
  for (uint64_t c : counts) {
    if (c == 0) continue;
    const double cd = static_cast<double>(c);
    k += cd / (1.0 + cd) * digamma_span(a, c);
  }
  CardinalityEstimate est;
  est.value = a * k;
  est.method = Kind::DP;
  est.params = SmoothingParams::dp(theta);
  clamp_to_n(est, n);
  return est;
}

CardinalityEstimate estimate_card_dp(const Sketch& sketch, double theta) {
  return estimate_card_dp(sketch.counts(), theta);
}

double card_integrand(double v, uint64_t c) {
  const double e = static_cast<double>(c) + 1.0;
  if (v <= 0.0) return e;
  if (v >= 1.0) return 1.0;
  if (v < 1e-300) return e;
  return -std::expm1(e * std::log1p(-v)) / v;
}

CardinalityEstimate estimate_card_nggp(std::span<const uint64_t> counts, const SmoothingParams& params,
                                       const MonteCarloConfig& mc) {
  params.validate();
  if (params.is_dp()) return estimate_card_dp(counts, params.theta);
  const uint64_t n = total(counts);
  if (n == 0) fail(Errc::invalid_argument, "cardinality estimation requires n >= 1");
  const auto J = static_cast<uint32_t>(counts.size());
  const auto v = draw_V(params, J, mc);

  std::map<uint64_t, uint64_t> groups;
  for (uint64_t c : counts)
    if (c > 0) ++groups[c];
  // Y_k = sum_j c_j / (1 + c_j) g(v_k, c_j); the estimate is the mean of Y.
  double sum = 0.0, sum2 = 0.0;
  for (double vk : v) {
    double y = 0.0;
    for (auto [c, mult] : groups) {
      const double cd = static_cast<double>(c);
      y += static_cast<double>(mult) * cd / (1.0 + cd) * card_integrand(vk, c);
    }
    sum += y;
    sum2 += y * y;
  }
  const double N = static_cast<double>(v.size());
  const double mean = sum / N;
  const double var = N > 1 ? std::max(0.0, (sum2 - N * mean * mean) / (N - 1.0)) : 0.0;

  CardinalityEstimate est;
  est.value = mean;
  est.mc_stderr = std::sqrt(var / N);
  est.method = Kind::NGGP;
  est.mc_seed = mc.seed;
  est.params = params;
  clamp_to_n(est, n);
  return est;
}

CardinalityEstimate estimate_card_nggp(const Sketch& sketch, const SmoothingParams& params,
                                       const MonteCarloConfig& mc) {
  return estimate_card_nggp(sketch.counts(), params, mc);
}

double eps_k_known_P(const DiscreteDist& P, const std::vector<uint32_t>& buckets,
                     std::span<const uint64_t> counts) {
  P.validate();
  const auto J = static_cast<uint32_t>(counts.size());
  const auto q = bucket_masses(P, buckets, J);
  const double n = static_cast<double>(total(counts));
  double out = 0.0;
  for (uint32_t j = 0; j < J; ++j) {
    if (!(q[j] > 0.0)) {
      if (counts[j] > 0) fail(Errc::invalid_argument, "inconsistent inputs: nonzero count in a zero-mass bucket");
      continue;
    }
    const double e = static_cast<double>(counts[j]) + 1.0;
    double inner = 0.0;
    for (size_t s = 0; s < P.size(); ++s) {
      if (buckets[s] != j || P.probs[s] == 0.0) continue;
      const double x = std::min(1.0, P.probs[s] / q[j]);
      inner += x >= 1.0 ? 1.0 : -std::expm1(e * std::log1p(-x));
    }
    out += q[j] / e * inner;
  }
  return n * out;
}

double eps_k_known_P(const DiscreteDist& P, const HashFunction& h, const Sketch& sketch) {
  if (!(h == sketch.hash())) fail(Errc::incompatible, "hash function differs from the sketch's");
  return eps_k_known_P(P, assign_buckets(P, h), sketch.counts());
}

double eps_k_known_P_series(const DiscreteDist& P, const std::vector<uint32_t>& buckets,
                            std::span<const uint64_t> counts) {
  P.validate();
  const auto J = static_cast<uint32_t>(counts.size());
  const auto q = bucket_masses(P, buckets, J);
  const double n = static_cast<double>(total(counts));
  double out = 0.0;
  for (uint32_t j = 0; j < J; ++j) {
    if (!(q[j] > 0.0)) {
      if (counts[j] > 0) fail(Errc::invalid_argument, "inconsistent inputs: nonzero count in a zero-mass bucket");
      continue;
    }
    double inner = 0.0;
    for (uint64_t r = 0; r <= counts[j]; ++r)
      inner += pi_known_P(P, buckets, counts[j], j, r) / static_cast<double>(r + 1);
    out += q[j] * inner;
  }
  return n * out;
}

double good_turing(std::span<const uint64_t> m, uint64_t n, uint64_t r) {
  uint64_t s = 0;
  for (size_t i = 0; i < m.size(); ++i) s += (i + 1) * m[i];
  if (s != n || n == 0) fail(Errc::invalid_argument, "frequency-of-frequencies must satisfy sum r m_r = n >= 1");
  // m_{r+1} sits at index r.
  const uint64_t next = r < m.size() ? m[r] : 0;
  return static_cast<double>(r + 1) * static_cast<double>(next) / static_cast<double>(n);
}

}  // namespace skr
