#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sketchrec/rng.hpp"
#include "sketchrec/sketch.hpp"

namespace skr {

// Exact per-symbol counts; symbols are dense ids in order of first appearance.
struct GroundTruth {
  std::vector<uint64_t> counts;
  uint64_t n = 0;

  static GroundTruth from_stream(std::span<const uint64_t> stream);
  size_t K() const { return counts.size(); }
  // m[i] = number of symbols seen exactly i + 1 times.
  std::vector<uint64_t> freq_of_freq() const;
  void save_csv(std::ostream& out) const;
};

struct Stream {
  std::vector<uint64_t> symbols;
  GroundTruth truth;
};

// Pitman-Yor urn: existing symbol h w.p. (n_h - sigma) / (gamma + i), new w.p. (gamma + k sigma) / (gamma + i).
Stream gen_pyp(Rng& rng, double gamma, double sigma, uint64_t n);

// Alias-method sampler for p_k proportional to k^-c, k = 1..vocab.
class ZipfSampler {
 public:
  ZipfSampler(double c, uint64_t vocab);
  // Rank in [0, vocab).
  uint64_t operator()(Rng& rng) const;
  double prob(uint64_t rank) const { return probs_[rank]; }
  uint64_t vocab() const { return probs_.size(); }

 private:
  std::vector<double> probs_;
  std::vector<double> cut_;
  std::vector<uint64_t> alias_;
};

inline constexpr uint64_t kDefaultZipfVocab = 1000000;

Stream gen_zipf(Rng& rng, double c, uint64_t vocab, uint64_t n);
Stream gen_zipf(Rng& rng, const ZipfSampler& sampler, uint64_t n);

// NGGP generalized Polya urn, see nggp_urn_sample.
Stream gen_nggp(Rng& rng, double theta, double alpha, double tau, uint64_t n);

struct ReplayResult {
  std::vector<uint64_t> prefix;        // first min(m, n) symbols
  std::vector<uint64_t> prefix_truth;  // full-stream count of each retained symbol
  uint64_t n = 0;
};

// One pass over the stream: sketches key64(symbol) when sketch is non-null, retains the first
// retain_m symbols, and counts those symbols over the whole stream.
ReplayResult replay(std::span<const uint64_t> stream, MultiSketch* sketch, uint64_t retain_m);

void write_stream(std::ostream& out, std::span<const uint64_t> stream);
std::vector<uint64_t> read_stream(std::istream& in);

}  // namespace skr
