#pragma once

#include <cstdint>
#include <functional>

#include "sketchrec/rng.hpp"

namespace skr {

double log_gamma(double x);
double digamma(double x);

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_subdivisions = 200;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 7/15 on [a, b]. The throwing form raises a numeric
// error when tolerances are not met within max_subdivisions.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureConfig& cfg = {});
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& cfg = {});

// E_nu(z) = int_1^inf x^-nu e^{-z x} dx, and the scaled form e^z E_nu(z).
double exp_integral(double nu, double z);
double exp_integral_scaled(double nu, double z);

double sample_exponential(Rng& rng);
// log of a Gamma(shape, 1) draw; stable for small shapes.
double sample_log_gamma(Rng& rng, double shape);
double sample_beta(Rng& rng, double a, double b);

// V ~ Beta(1, theta / J).
double sample_V_dp(Rng& rng, double theta, uint32_t J);
// V = B(1-alpha, alpha) * (1 - (b / (b + E))^{1/alpha}), b = theta tau^alpha / (J alpha).
double sample_V_nggp(Rng& rng, double theta, double alpha, double tau, uint32_t J);
// E[V] = (1 - alpha)(1 - b e^b E_{1/alpha}(b)).
double mean_V_nggp(double theta, double alpha, double tau, uint32_t J);

}  // namespace skr
