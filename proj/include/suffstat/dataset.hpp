#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "suffstat/error.hpp"

namespace suffstat {

// n binary samples of length p, stored row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t p, std::vector<std::uint8_t> bits, std::uint64_t seed = 0,
          std::string sampler = "manual")
      : p_(p), bits_(std::move(bits)), seed_(seed), sampler_(std::move(sampler)) {
    require(p >= 1, "dataset: p must be positive");
    require(!bits_.empty() && bits_.size() % p == 0, "dataset: need n >= 1 full samples");
    for (auto b : bits_) require(b <= 1, "dataset: entries must be 0 or 1");
  }

  static Dataset from_rows(const std::vector<std::vector<std::uint8_t>>& rows) {
    require(!rows.empty(), "dataset: need n >= 1 samples");
    std::vector<std::uint8_t> bits;
    for (const auto& r : rows) {
      require(r.size() == rows.front().size(), "dataset: ragged samples");
      bits.insert(bits.end(), r.begin(), r.end());
    }
    return Dataset(rows.front().size(), std::move(bits));
  }

  std::size_t dimension() const noexcept { return p_; }
  std::size_t size() const noexcept { return p_ == 0 ? 0 : bits_.size() / p_; }
  std::span<const std::uint8_t> sample(std::size_t l) const {
    return std::span<const std::uint8_t>(bits_).subspan(l * p_, p_);
  }
  std::uint8_t at(std::size_t l, std::size_t i) const { return bits_[l * p_ + i]; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& sampler() const noexcept { return sampler_; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.p_ == b.p_ && a.bits_ == b.bits_;
  }

 private:
  std::size_t p_ = 0;
  std::vector<std::uint8_t> bits_;
  std::uint64_t seed_ = 0;
  std::string sampler_ = "manual";
};

// Header "p n", then n lines of p space-separated bits.
inline void write_dataset(std::ostream& out, const Dataset& d) {
  out << d.dimension() << ' ' << d.size() << '\n';
  for (std::size_t l = 0; l < d.size(); ++l) {
    auto row = d.sample(l);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      out << static_cast<int>(row[i]);
    }
    out << '\n';
  }
}

inline Dataset read_dataset(std::istream& in) {
  std::size_t p = 0;
  std::size_t n = 0;
  require(static_cast<bool>(in >> p >> n), "dataset file: bad header");
  require(p >= 1 && n >= 1, "dataset file: p and n must be positive");
  std::vector<std::uint8_t> bits;
  bits.reserve(p * n);
  for (std::size_t c = 0; c < p * n; ++c) {
    int b = 0;
    require(static_cast<bool>(in >> b), "dataset file: truncated");
    require(b == 0 || b == 1, "dataset file: entries must be 0 or 1");
    bits.push_back(static_cast<std::uint8_t>(b));
  }
  std::string extra;
  require(!(in >> extra), "dataset file: trailing data");
  return Dataset(p, std::move(bits), 0, "file");
}

}  // namespace suffstat
