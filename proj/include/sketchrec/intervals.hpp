#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sketchrec/freq_estimators.hpp"

namespace skr {

struct Interval {
  uint64_t lo = 0;
  uint64_t hi = 0;
};

// [quantile((1 - level) / 2), quantile(1 - (1 - level) / 2)].
Interval smoothed_interval(const FreqDistribution& dist, double level);

struct CalibrationSet {
  std::vector<uint64_t> keys;  // key64 values
  std::vector<uint64_t> truth;
  double level = 0.9;

  void save_csv(std::ostream& out) const;
  void save_csv(const std::string& path) const;
  static CalibrationSet load_csv(std::istream& in, double level);
  static CalibrationSet load_csv(const std::string& path, double level);
};

// Split-conformal quantiles of the signed residuals e_i = estimate_i - truth_i. With sorted
// residuals e_(1) <= ... <= e_(m) and delta = 1 - level:
//   q_hi = e_(k_hi), k_hi = ceil((m + 1)(1 - delta / 2)),
//   q_lo = e_(k_lo), k_lo = floor((m + 1) delta / 2),
// with both ranks clamped to [1, m].
struct ConformalAdjuster {
  double q_lo = 0.0;
  double q_hi = 0.0;
  double level = 0.9;
  size_t m = 0;
};

ConformalAdjuster conformal_calibrate(std::span<const double> estimates, std::span<const uint64_t> truth, double level);
ConformalAdjuster conformal_calibrate(const CalibrationSet& cal, const std::function<double(uint64_t)>& estimator);

// [max(0, floor(point - q_hi)), min(cms_cap, ceil(point - q_lo))].
Interval conformal_interval(const ConformalAdjuster& adj, double point, uint64_t cms_cap);

}  // namespace skr
