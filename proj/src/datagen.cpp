#include "sketchrec/datagen.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "sketchrec/error.hpp"
#include "sketchrec/param_fit.hpp"

namespace skr {

GroundTruth GroundTruth::from_stream(std::span<const uint64_t> stream) {
  GroundTruth t;
  std::unordered_map<uint64_t, uint64_t> id;
  for (uint64_t s : stream) {
    auto [it, inserted] = id.try_emplace(s, t.counts.size());
    if (inserted) t.counts.push_back(0);
    ++t.counts[it->second];
  }
  t.n = stream.size();
  return t;
}

std::vector<uint64_t> GroundTruth::freq_of_freq() const {
  uint64_t top = 0;
  for (uint64_t c : counts) top = std::max(top, c);
  std::vector<uint64_t> m(top, 0);
  for (uint64_t c : counts)
    if (c > 0) ++m[c - 1];
  return m;
}

void GroundTruth::save_csv(std::ostream& out) const {
  out << "symbol,count\n";
  for (size_t s = 0; s < counts.size(); ++s) out << s << ',' << counts[s] << '\n';
}

Stream gen_pyp(Rng& rng, double gamma, double sigma, uint64_t n) {
  if (!(sigma >= 0.0 && sigma < 1.0)) fail(Errc::domain, "Pitman-Yor discount must lie in [0, 1)");
  if (!(gamma > -sigma)) fail(Errc::domain, "Pitman-Yor strength must exceed -sigma");
  Stream out;
  out.symbols.reserve(n);
  auto& counts = out.truth.counts;
  // Symbols of every draw that repeated an earlier symbol; a uniform pick from it selects h w.p. (n_h - 1) / (i - k).
  std::vector<uint64_t> repeats;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (uint64_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(counts.size());
    const double id = static_cast<double>(i);
    uint64_t s;
    const double u = unif(rng) * (gamma + id);
    if (i == 0 || u < gamma + k * sigma) {
      s = counts.size();
      counts.push_back(0);
    } else {
      // Existing weight n_h - sigma split as (n_h - 1) + (1 - sigma).
      const double v = u - (gamma + k * sigma);
      if (v < id - k && !repeats.empty()) {
        s = repeats[std::min<uint64_t>(repeats.size() - 1, static_cast<uint64_t>(unif(rng) * repeats.size()))];
      } else {
        s = std::min<uint64_t>(counts.size() - 1, static_cast<uint64_t>(unif(rng) * k));
      }
      repeats.push_back(s);
    }
    ++counts[s];
    out.symbols.push_back(s);
  }
  out.truth.n = n;
  return out;
}

ZipfSampler::ZipfSampler(double c, uint64_t vocab) {
  if (!(c > 1.0)) fail(Errc::invalid_argument, "Zipf exponent must exceed 1");
  if (vocab == 0) fail(Errc::invalid_argument, "Zipf vocabulary must be >= 1");
  probs_.resize(vocab);
  double z = 0.0;
  for (uint64_t k = 0; k < vocab; ++k) z += probs_[k] = std::pow(static_cast<double>(k + 1), -c);
  for (double& p : probs_) p /= z;
  // Vose alias tables.
  cut_.assign(vocab, 0.0);
  alias_.assign(vocab, 0);
  std::vector<double> scaled(vocab);
  std::vector<uint64_t> small, large;
  for (uint64_t k = 0; k < vocab; ++k) {
    scaled[k] = probs_[k] * static_cast<double>(vocab);
    (scaled[k] < 1.0 ? small : large).push_back(k);
  }
  while (!small.empty() && !large.empty()) {
    const uint64_t s = small.back(), l = large.back();
    small.pop_back();
    cut_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = scaled[l] + scaled[s] - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (uint64_t k : large) cut_[k] = 1.0;
  for (uint64_t k : small) cut_[k] = 1.0;
}

uint64_t ZipfSampler::operator()(Rng& rng) const {
  const double u = uniform01(rng) * static_cast<double>(probs_.size());
  const uint64_t k = std::min<uint64_t>(probs_.size() - 1, static_cast<uint64_t>(u));
  return (u - static_cast<double>(k)) < cut_[k] ? k : alias_[k];
}

Stream gen_zipf(Rng& rng, const ZipfSampler& sampler, uint64_t n) {
  Stream out;
  out.symbols.reserve(n);
  std::unordered_map<uint64_t, uint64_t> id;
  for (uint64_t i = 0; i < n; ++i) {
    auto [it, inserted] = id.try_emplace(sampler(rng), out.truth.counts.size());
    if (inserted) out.truth.counts.push_back(0);
    ++out.truth.counts[it->second];
    out.symbols.push_back(it->second);
  }
  out.truth.n = n;
  return out;
}

Stream gen_zipf(Rng& rng, double c, uint64_t vocab, uint64_t n) {
  ZipfSampler sampler(c, vocab);
  return gen_zipf(rng, sampler, n);
}

Stream gen_nggp(Rng& rng, double theta, double alpha, double tau, uint64_t n) {
  Stream out;
  if (n == 0) return out;
  PrefixSample ps = nggp_urn_sample(rng, theta, alpha, tau, n, &out.symbols);
  out.truth.counts = std::move(ps.counts);
  out.truth.n = n;
  return out;
}

ReplayResult replay(std::span<const uint64_t> stream, MultiSketch* sketch, uint64_t retain_m) {
  ReplayResult res;
  res.n = stream.size();
  std::unordered_map<uint64_t, uint64_t> tracked;
  const uint64_t keep = std::min<uint64_t>(retain_m, stream.size());
  for (uint64_t i = 0; i < stream.size(); ++i) {
    const uint64_t s = stream[i];
    if (sketch) sketch->update(key64(s));
    if (i < keep) {
      res.prefix.push_back(s);
      ++tracked[s];
    } else if (auto it = tracked.find(s); it != tracked.end()) {
      ++it->second;
    }
  }
  res.prefix_truth.reserve(keep);
  for (uint64_t s : res.prefix) res.prefix_truth.push_back(tracked[s]);
  return res;
}

void write_stream(std::ostream& out, std::span<const uint64_t> stream) {
  for (uint64_t s : stream) out << s << '\n';
}

std::vector<uint64_t> read_stream(std::istream& in) {
  std::vector<uint64_t> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t pos = 0;
    uint64_t v = 0;
    try {
      v = std::stoull(line, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != line.size() || line[0] == '-') fail(Errc::io, "stream line is not a u64: " + line);
    out.push_back(v);
  }
  return out;
}

}  // namespace skr
