#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skr {

struct Bin {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double f) const { return f > lo && f <= hi; }
  std::string label() const;
};

inline const std::vector<double> kDefaultBinEdges = {0, 1, 4, 16, 64, 256};

// Edges e_0 < e_1 < ... give bins (e_0, e_1], ..., (e_last, inf).
std::vector<Bin> bins_from_edges(const std::vector<double>& edges);
std::vector<double> parse_bin_edges(const std::string& text);

struct BinMae {
  double mae = 0.0;
  uint64_t count = 0;
};

// Mean |f_s - fhat_s| per bin over symbols with f_s >= 1; empty bins are nullopt.
std::vector<std::optional<BinMae>> mae_by_bin(std::span<const uint64_t> truth, std::span<const double> estimates,
                                              const std::vector<Bin>& bins);

struct GeneratorSpec {
  std::string kind = "pyp";  // pyp | zipf | nggp
  double gamma = 1.0;
  double sigma = 0.75;
  double zipf_c = 1.3;
  uint64_t vocab = 1000000;
  double theta = 100.0;
  double alpha = 0.5;
  double tau = 0.5;
};

struct ExperimentConfig {
  GeneratorSpec generator;
  uint64_t n = 100000;
  uint32_t J = 128;
  uint32_t M = 1;
  std::vector<std::string> smoothing = {"dp", "nggp"};
  std::vector<std::string> rules = {"poe", "min"};
  std::string nggp_fit = "prefix";  // prefix | wass
  uint64_t prefix_m = 0;            // 0 means n / 20
  uint32_t repetitions = 1;
  uint64_t seed = 1;
  std::vector<double> bin_edges = kDefaultBinEdges;
  uint64_t mc_samples = 10000;
  uint32_t wass_num_mc = 10;
  bool cardinality = true;
  unsigned threads = 0;

  void validate() const;
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct MaeRow {
  uint32_t rep;
  std::string estimator, rule, bin;
  double mae;
};

struct CardRow {
  uint32_t rep;
  std::string estimator;
  uint64_t k_true;
  double k_hat;
};

struct FitRow {
  uint32_t rep;
  uint32_t view;
  std::string estimator, method;
  double theta, alpha, tau, objective;
};

struct ExperimentReport {
  std::vector<MaeRow> mae;
  std::vector<CardRow> card;
  std::vector<FitRow> fits;
  std::vector<std::string> errors;

  void write_mae_csv(std::ostream& out) const;
  void write_card_csv(std::ostream& out) const;
  void write_fits_csv(std::ostream& out) const;
  // freq_mae.csv, cardinality.csv and fits.csv under dir.
  void write_all(const std::string& dir) const;
};

// Per repetition: generate, replay into an M x J sketch, fit, estimate every symbol with
// CMS and the requested smoothings and rules, then tabulate MAE by bin and cardinality.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace skr
