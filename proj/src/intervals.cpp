#include "sketchrec/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sketchrec/error.hpp"

namespace skr {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(Errc::invalid_argument, "level must lie in (0, 1)");
}

}  // namespace

Interval smoothed_interval(const FreqDistribution& dist, double level) {
  check_level(level);
  const double tail = (1.0 - level) / 2.0;
  return {dist.quantile(tail), dist.quantile(1.0 - tail)};
}

void CalibrationSet::save_csv(std::ostream& out) const {
  out << "key_hash64,true_count\n";
  for (size_t i = 0; i < keys.size(); ++i) out << keys[i] << ',' << truth[i] << '\n';
}

void CalibrationSet::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot open " + path + " for writing");
  save_csv(out);
}

CalibrationSet CalibrationSet::load_csv(std::istream& in, double level) {
  CalibrationSet cal;
  cal.level = level;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find_first_not_of("0123456789,\r") != std::string::npos) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream ss(line);
    uint64_t k = 0, t = 0;
    char comma = 0;
    if (!(ss >> k >> comma >> t) || comma != ',') fail(Errc::io, "malformed calibration row: " + line);
    cal.keys.push_back(k);
    cal.truth.push_back(t);
  }
  return cal;
}

CalibrationSet CalibrationSet::load_csv(const std::string& path, double level) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path);
  return load_csv(in, level);
}

ConformalAdjuster conformal_calibrate(std::span<const double> estimates, std::span<const uint64_t> truth,
                                      double level) {
  check_level(level);
  if (estimates.size() != truth.size()) fail(Errc::invalid_argument, "estimates and truths differ in length");
  const size_t m = estimates.size();
  if (m == 0 || static_cast<double>(m) < 1.0 / (1.0 - level) - 1.0 - 1e-9)
    fail(Errc::invalid_argument, "not enough calibration points for the requested level");
  std::vector<double> e(m);
  for (size_t i = 0; i < m; ++i) e[i] = estimates[i] - static_cast<double>(truth[i]);
  std::sort(e.begin(), e.end());
  const double delta = 1.0 - level;
  const double md = static_cast<double>(m);
  auto rank = [&](double x) { return static_cast<size_t>(std::clamp(x, 1.0, md)); };
  const size_t k_hi = rank(std::ceil((md + 1.0) * (1.0 - delta / 2.0) - 1e-9));
  const size_t k_lo = rank(std::floor((md + 1.0) * delta / 2.0 + 1e-9));
  return {e[k_lo - 1], e[k_hi - 1], level, m};
}

ConformalAdjuster conformal_calibrate(const CalibrationSet& cal, const std::function<double(uint64_t)>& estimator) {
  if (cal.keys.size() != cal.truth.size()) fail(Errc::invalid_argument, "calibration keys and truths differ in length");
  std::vector<double> est(cal.keys.size());
  for (size_t i = 0; i < cal.keys.size(); ++i) est[i] = estimator(cal.keys[i]);
  return conformal_calibrate(est, cal.truth, cal.level);
}

Interval conformal_interval(const ConformalAdjuster& adj, double point, uint64_t cms_cap) {
  const double cap = static_cast<double>(cms_cap);
  const double lo = std::clamp(std::floor(point - adj.q_hi), 0.0, cap);
  const double hi = std::clamp(std::ceil(point - adj.q_lo), 0.0, cap);
  return {static_cast<uint64_t>(std::min(lo, hi)), static_cast<uint64_t>(hi)};
}

}  // namespace skr
