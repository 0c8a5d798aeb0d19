#include "sketchrec/sketch.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>
#include <istream>

#include "sketchrec/error.hpp"

namespace skr {
namespace {

constexpr std::array<char, 5> kMagic = {'S', 'K', 'R', 'V', '1'};
constexpr uint64_t kMax = std::numeric_limits<uint64_t>::max();

void add_checked(uint64_t& slot, uint64_t w) {
  if (slot > kMax - w) fail(Errc::overflow, "sketch counter overflow");
  slot += w;
}

template <class T>
void put_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) fail(Errc::io, "truncated sketch file");
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

Sketch::Sketch(HashFunction h) : hash_(h), counts_(h.width, 0) {
  if (h.width == 0) fail(Errc::invalid_argument, "hash width J must be >= 1");
}

Sketch::Sketch(HashFunction h, std::vector<uint64_t> counts) : hash_(h), counts_(std::move(counts)) {
  if (counts_.size() != h.width) fail(Errc::invalid_argument, "counts length differs from J");
  for (uint64_t c : counts_) add_checked(n_, c);
}

void Sketch::update(uint64_t k, uint64_t weight) {
  uint64_t& slot = counts_[hash_(k)];
  if (slot > kMax - weight || n_ > kMax - weight) fail(Errc::overflow, "sketch counter overflow");
  slot += weight;
  n_ += weight;
}

void Sketch::merge(const Sketch& other) {
  if (!(hash_ == other.hash_)) fail(Errc::incompatible, "sketches differ in width or hash seeds");
  if (n_ > kMax - other.n_) fail(Errc::overflow, "sketch counter overflow");
  for (size_t j = 0; j < counts_.size(); ++j) add_checked(counts_[j], other.counts_[j]);
  n_ += other.n_;
}

Sketch merge(const Sketch& a, const Sketch& b) {
  Sketch out = a;
  out.merge(b);
  return out;
}

MultiSketch MultiSketch::create(uint32_t M, uint32_t J, uint64_t master_seed) {
  if (M == 0) fail(Errc::invalid_argument, "number of hash rows M must be >= 1");
  if (J == 0) fail(Errc::invalid_argument, "hash width J must be >= 1");
  std::vector<Sketch> rows;
  rows.reserve(M);
  uint64_t state = master_seed;
  for (uint32_t l = 0; l < M; ++l) {
    Rng rng(splitmix64(state));
    rows.emplace_back(draw_hash(rng, J));
  }
  return MultiSketch(std::move(rows));
}

MultiSketch::MultiSketch(std::vector<Sketch> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) fail(Errc::invalid_argument, "number of hash rows M must be >= 1");
  for (const auto& r : rows_) {
    if (r.width() != rows_.front().width() || r.n() != rows_.front().n())
      fail(Errc::incompatible, "multi-view rows must share J and n");
  }
}

void MultiSketch::update(uint64_t k, uint64_t weight) {
  for (auto& r : rows_) r.update(k, weight);
}

std::vector<uint64_t> MultiSketch::query(uint64_t k) const {
  std::vector<uint64_t> out(rows_.size());
  for (size_t l = 0; l < rows_.size(); ++l) out[l] = rows_[l].query(k);
  return out;
}

uint64_t MultiSketch::query_min(uint64_t k) const {
  uint64_t m = kMax;
  for (const auto& r : rows_) m = std::min(m, r.query(k));
  return m;
}

void MultiSketch::merge(const MultiSketch& other) {
  if (other.rows_.size() != rows_.size()) fail(Errc::incompatible, "sketches differ in number of rows");
  for (size_t l = 0; l < rows_.size(); ++l) {
    if (!(rows_[l].hash() == other.rows_[l].hash()))
      fail(Errc::incompatible, "sketches differ in width or hash seeds");
  }
  for (size_t l = 0; l < rows_.size(); ++l) rows_[l].merge(other.rows_[l]);
}

void MultiSketch::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_le<uint32_t>(out, rows());
  put_le<uint32_t>(out, width());
  put_le<uint64_t>(out, n());
  for (const auto& r : rows_) {
    put_le<uint64_t>(out, r.hash().seed_a);
    put_le<uint64_t>(out, r.hash().seed_b);
  }
  for (const auto& r : rows_)
    for (uint64_t c : r.counts()) put_le<uint64_t>(out, c);
  if (!out) fail(Errc::io, "failed writing sketch");
}

void MultiSketch::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open " + path + " for writing");
  save(out);
}

MultiSketch MultiSketch::load(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) fail(Errc::io, "not a SKRV1 sketch file");
  uint32_t M = get_le<uint32_t>(in);
  uint32_t J = get_le<uint32_t>(in);
  uint64_t n = get_le<uint64_t>(in);
  if (M == 0 || J == 0) fail(Errc::io, "sketch header has zero M or J");
  std::vector<HashFunction> hashes;
  for (uint32_t l = 0; l < M; ++l) {
    uint64_t a = get_le<uint64_t>(in);
    uint64_t b = get_le<uint64_t>(in);
    hashes.push_back(HashFunction::from_seeds(a, b, J));
  }
  std::vector<Sketch> rows;
  for (uint32_t l = 0; l < M; ++l) {
    std::vector<uint64_t> counts(J);
    for (auto& c : counts) c = get_le<uint64_t>(in);
    rows.emplace_back(hashes[l], std::move(counts));
    if (rows.back().n() != n) fail(Errc::io, "sketch row counts do not sum to n");
  }
  return MultiSketch(std::move(rows));
}

MultiSketch MultiSketch::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  return load(in);
}

void MultiSketch::export_csv(std::ostream& out) const {
  out << "l,j,count\n";
  for (uint32_t l = 0; l < rows(); ++l) {
    auto c = rows_[l].counts();
    for (uint32_t j = 0; j < c.size(); ++j) out << l << ',' << j << ',' << c[j] << '\n';
  }
}

}  // namespace skr
