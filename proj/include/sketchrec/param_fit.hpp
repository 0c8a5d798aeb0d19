#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sketchrec/freq_estimators.hpp"
#include "sketchrec/rng.hpp"
#include "sketchrec/sketch.hpp"

namespace skr {

struct FitResult {
  SmoothingParams params;
  double objective = 0.0;
  std::string method;
  int iterations = 0;
  bool converged = false;
  uint64_t seed = 0;
};

std::string fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const std::string& text);

struct PrefixSample {
  std::vector<uint64_t> counts;  // n_1..n_k
  uint64_t m = 0;

  static PrefixSample from_symbols(std::span<const uint64_t> symbols);
  size_t k() const { return counts.size(); }
};

// Dirichlet-multinomial log-likelihood of the sketch, up to a theta-free constant.
double dp_loglik_sketch(double theta, std::span<const uint64_t> counts);
double dp_loglik_grad(double theta, std::span<const uint64_t> counts);
FitResult fit_dp(std::span<const uint64_t> counts);
FitResult fit_dp(const Sketch& sketch);

// Prefix log-likelihood: k log theta + sum_j log (1 - alpha)_{(n_j - 1)} - log Gamma(m) + log I,
// I = int u^{m-1} (tau + u)^{k alpha - m} exp(-(theta/alpha)((tau + u)^alpha - tau^alpha)) du.
double nggp_loglik_prefix(double theta, double alpha, double tau, const PrefixSample& prefix);

struct PrefixFitConfig {
  double tau = 0.5;
  int restarts = 5;
  double xtol = 1e-4;
  int max_iter = 400;
};

FitResult fit_nggp_prefix(const PrefixSample& prefix, const PrefixFitConfig& cfg = {});

// log density (up to a constant) of W = log U for the urn latent after i draws with k distinct:
// i w - (i - alpha k) log(tau + e^w) - (theta/alpha)((tau + e^w)^alpha - tau^alpha).
struct UrnLatent {
  double theta, alpha, tau;
  double i, k;

  double h(double w) const;
  double dh(double w) const;
  double d2h(double w) const;
  double mode(double hint = 0.0) const;
};

// Adaptive rejection sampling from a log-concave density exp(h); falls back to a 2048-point
// grid inverse CDF when the envelope cannot be built.
double sample_urn_latent(Rng& rng, const UrnLatent& lat, double* mode_hint = nullptr);
double sample_grid_inverse_cdf(Rng& rng, const UrnLatent& lat, double mode);

// Symbols are dense ids in order of first appearance.
PrefixSample nggp_urn_sample(Rng& rng, double theta, double alpha, double tau, uint64_t m,
                             std::vector<uint64_t>* stream = nullptr);

double wasserstein1(std::span<const double> a, std::span<const double> b);
double wasserstein1_counts(std::span<const uint64_t> a, std::span<const uint64_t> b);

struct MinWassConfig {
  uint32_t num_mc = 10;
  uint64_t seed = 0;
  double tau = 0.5;
  std::vector<double> grid_log_theta = {0.0, 1.5, 3.0, 4.5, 6.0, 7.5, 9.0};
  std::vector<double> grid_alpha = {0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
  double xtol = 1e-3;
  int max_iter = 200;
};

// Mean W1 between the sketch and num_mc synthetic sketches of size m scaled by n/m.
double minwass_objective(std::span<const uint64_t> counts, double theta, double alpha, uint64_t m,
                         const MinWassConfig& cfg);
FitResult fit_nggp_minwass(std::span<const uint64_t> counts, uint64_t m, const MinWassConfig& cfg = {});
FitResult fit_nggp_minwass(const Sketch& sketch, uint64_t m, const MinWassConfig& cfg = {});

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const std::vector<double>& step, double xtol, int max_iter);

}  // namespace skr
