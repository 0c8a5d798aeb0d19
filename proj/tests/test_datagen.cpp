#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "sketchrec/datagen.hpp"
#include "sketchrec/error.hpp"
#include "sketchrec/param_fit.hpp"

using namespace skr;

namespace {

void check_truth(const Stream& st) {
  uint64_t total = 0;
  for (auto c : st.truth.counts) {
    EXPECT_GE(c, 1u);
    total += c;
  }
  EXPECT_EQ(total, st.symbols.size());
  EXPECT_EQ(st.truth.n, st.symbols.size());
  auto m = st.truth.freq_of_freq();
  uint64_t weighted = 0, distinct = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    weighted += (i + 1) * m[i];
    distinct += m[i];
  }
  EXPECT_EQ(weighted, st.truth.n);
  EXPECT_EQ(distinct, st.truth.K());
}

// Least-squares slope of log y on log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size(), my /= y.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Pitman-Yor probability of the partition pattern of a sequence, e.g. (0, 0, 1).
double pyp_sequence_prob(const std::vector<uint64_t>& seq, double gamma, double sigma) {
  std::map<uint64_t, double> counts;
  double p = 1.0;
  for (size_t i = 0; i < seq.size(); ++i) {
    const double k = counts.size();
    auto it = counts.find(seq[i]);
    p *= it == counts.end() ? (gamma + k * sigma) / (gamma + i) : (it->second - sigma) / (gamma + i);
    counts[seq[i]] += 1;
  }
  return p;
}

}  // namespace

TEST(Pyp, SingleDrawAndIdentities) {
  Rng rng(1);
  EXPECT_EQ(gen_pyp(rng, 1.0, 0.5, 1).truth.K(), 1u);
  check_truth(gen_pyp(rng, 5.0, 0.75, 20000));
  EXPECT_THROW(gen_pyp(rng, 1.0, 1.0, 10), Error);
  EXPECT_THROW(gen_pyp(rng, -0.6, 0.5, 10), Error);
}

TEST(Pyp, SequenceLawMatchesUrn) {
  for (double sigma : {0.0, 0.5}) {
    Rng rng(2);
    const int N = 200000;
    std::map<std::vector<uint64_t>, int> freq;
    for (int i = 0; i < N; ++i) ++freq[gen_pyp(rng, 1.5, sigma, 4).symbols];
    double mass = 0;
    for (const auto& [seq, k] : freq) {
      const double p = pyp_sequence_prob(seq, 1.5, sigma);
      mass += p;
      EXPECT_NEAR(static_cast<double>(k) / N, p, 4 * std::sqrt(p * (1 - p) / N)) << sigma;
    }
    EXPECT_NEAR(mass, 1.0, 1e-12);  // all 15 set partitions of 4 items were observed
  }
}

TEST(Pyp, DirichletExpectation) {
  Rng rng(3);
  const double gamma = 10;
  const uint64_t n = 1000;
  double mean = 0;
  for (int r = 0; r < 200; ++r) mean += gen_pyp(rng, gamma, 0.0, n).truth.K();
  mean /= 200;
  double expect = 0;
  for (uint64_t i = 0; i < n; ++i) expect += gamma / (gamma + i);
  EXPECT_NEAR(mean, expect, 0.1 * expect);
}

TEST(Pyp, PowerLawGrowth) {
  Rng rng(4);
  std::vector<double> ns{1e3, 3e3, 1e4, 3e4, 1e5}, ks(ns.size(), 0.0);
  for (int r = 0; r < 20; ++r) {
    auto st = gen_pyp(rng, 1.0, 0.75, 100000);
    std::vector<bool> seen(st.truth.K(), false);
    uint64_t k = 0;
    size_t next = 0;
    for (size_t i = 0; i < st.symbols.size(); ++i) {
      if (!seen[st.symbols[i]]) seen[st.symbols[i]] = true, ++k;
      if (next < ns.size() && i + 1 == static_cast<size_t>(ns[next])) ks[next++] += k;
    }
  }
  const double slope = loglog_slope(ns, ks);
  EXPECT_GE(slope, 0.6);
  EXPECT_LE(slope, 0.9);
}

TEST(Zipf, DegenerateAndIdentities) {
  Rng rng(5);
  auto st = gen_zipf(rng, 1.5, 1, 1000);
  EXPECT_EQ(st.truth.K(), 1u);
  check_truth(gen_zipf(rng, 1.3, 10000, 50000));
  EXPECT_THROW(ZipfSampler(1.0, 10), Error);
  EXPECT_THROW(ZipfSampler(2.0, 0), Error);
}

TEST(Zipf, HeadRatioAndSlope) {
  const double c = 1.3;
  ZipfSampler z(c, kDefaultZipfVocab);
  Rng rng(6);
  const int N = 1000000;
  std::vector<double> counts(200, 0.0);
  for (int i = 0; i < N; ++i) {
    const uint64_t k = z(rng);
    if (k < counts.size()) ++counts[k];
  }
  // Ratio estimator: delta-method standard error of c1/c2.
  const double ratio = counts[0] / counts[1];
  const double se = ratio * std::sqrt(1 / counts[0] + 1 / counts[1]);
  EXPECT_NEAR(ratio, std::pow(2.0, c), 3 * se);
  std::vector<double> ranks, freq;
  for (int k = 0; k < 100; ++k) ranks.push_back(k + 1), freq.push_back(counts[k]);
  const double slope = loglog_slope(ranks, freq);
  EXPECT_NEAR(slope, -c, 0.1);
}

TEST(Nggp, FirstDrawIsNew) {
  Rng rng(7);
  for (int r = 0; r < 20; ++r) {
    auto ps = nggp_urn_sample(rng, 5.0, 0.5, 0.5, 1);
    EXPECT_EQ(ps.k(), 1u);
    EXPECT_EQ(ps.m, 1u);
  }
  check_truth(gen_nggp(rng, 100, 0.5, 0.5, 5000));
}

TEST(Nggp, PowerLawGrowth) {
  Rng rng(8);
  std::vector<double> ms{300, 1000, 3000, 10000}, ks(ms.size(), 0.0);
  for (int r = 0; r < 200; ++r) {
    std::vector<uint64_t> stream;
    nggp_urn_sample(rng, 10, 0.7, 0.5, 10000, &stream);
    uint64_t k = 0;
    size_t next = 0;
    for (size_t i = 0; i < stream.size(); ++i) {
      if (stream[i] == k) ++k;  // dense ids in order of first appearance
      if (next < ms.size() && i + 1 == static_cast<size_t>(ms[next])) ks[next++] += k;
    }
  }
  const double slope = loglog_slope(ms, ks);
  EXPECT_GE(slope, 0.55);
  EXPECT_LE(slope, 0.85);
}

TEST(Nggp, DirichletLimit) {
  Rng rng(9);
  const double theta = 10;
  const uint64_t m = 1000;
  double mean = 0;
  for (int r = 0; r < 200; ++r) mean += nggp_urn_sample(rng, theta, 0.01, 1.0, m).k();
  mean /= 200;
  double expect = 0;
  for (uint64_t i = 0; i < m; ++i) expect += theta / (theta + i);
  EXPECT_NEAR(mean, expect, 0.15 * expect);
}

TEST(Replay, PrefixTruthAndSketch) {
  Rng rng(10);
  auto st = gen_pyp(rng, 20, 0.5, 5000);
  auto ms = MultiSketch::create(3, 64, 11);
  auto rr = replay(st.symbols, &ms, 700);
  EXPECT_EQ(rr.prefix.size(), 700u);
  EXPECT_EQ(rr.n, 5000u);
  for (size_t i = 0; i < rr.prefix.size(); ++i) {
    EXPECT_EQ(rr.prefix[i], st.symbols[i]);
    EXPECT_EQ(rr.prefix_truth[i], st.truth.counts[rr.prefix[i]]);
  }
  auto direct = MultiSketch::create(3, 64, 11);
  for (auto s : st.symbols) direct.update(key64(s));
  for (uint32_t l = 0; l < 3; ++l)
    EXPECT_TRUE(std::equal(direct.row(l).counts().begin(), direct.row(l).counts().end(), ms.row(l).counts().begin()));
  EXPECT_EQ(replay(st.symbols, nullptr, 10000).prefix.size(), 5000u);
}

TEST(Replay, StreamAndTruthSerialization) {
  Rng rng(12);
  auto st = gen_pyp(rng, 3, 0.3, 500);
  std::stringstream buf;
  write_stream(buf, st.symbols);
  EXPECT_EQ(read_stream(buf), st.symbols);
  std::stringstream csv;
  st.truth.save_csv(csv);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "symbol,count");
}
