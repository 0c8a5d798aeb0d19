#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sketchrec/hashing.hpp"

namespace skr {

class Sketch {
 public:
  explicit Sketch(HashFunction h);
  Sketch(HashFunction h, std::vector<uint64_t> counts);

  void update(uint64_t k, uint64_t weight = 1);
  uint64_t query(uint64_t k) const { return counts_[hash_(k)]; }
  void merge(const Sketch& other);

  const HashFunction& hash() const { return hash_; }
  uint32_t width() const { return hash_.width; }
  uint64_t n() const { return n_; }
  std::span<const uint64_t> counts() const { return counts_; }

 private:
  HashFunction hash_;
  std::vector<uint64_t> counts_;
  uint64_t n_ = 0;
};

Sketch merge(const Sketch& a, const Sketch& b);

class MultiSketch {
 public:
  // Row seeds expanded from master_seed with splitmix64.
  static MultiSketch create(uint32_t M, uint32_t J, uint64_t master_seed);
  explicit MultiSketch(std::vector<Sketch> rows);

  void update(uint64_t k, uint64_t weight = 1);
  std::vector<uint64_t> query(uint64_t k) const;
  uint64_t query_min(uint64_t k) const;
  void merge(const MultiSketch& other);

  uint32_t rows() const { return static_cast<uint32_t>(rows_.size()); }
  uint32_t width() const { return rows_.front().width(); }
  uint64_t n() const { return rows_.front().n(); }
  const Sketch& row(uint32_t l) const { return rows_.at(l); }

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static MultiSketch load(std::istream& in);
  static MultiSketch load(const std::string& path);
  void export_csv(std::ostream& out) const;

 private:
  std::vector<Sketch> rows_;
};

}  // namespace skr
