#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "suffstat/error.hpp"

namespace suffstat {

using Vector = std::vector<double>;

// Natural parameters theta in R^p.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Vector values) : values_(std::move(values)) {
    for (double v : values_) require(std::isfinite(v), "ParamVector: non-finite entry");
  }

  static ParamVector zeros(std::size_t p) { return ParamVector(Vector(p, 0.0)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const Vector& values() const noexcept { return values_; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  Vector values_;
};

// Mean parameters tau, every entry strictly inside (0,1).
class MomentVector {
 public:
  MomentVector() = default;
  explicit MomentVector(Vector values) : values_(std::move(values)) {
    for (double v : values_) {
      require(std::isfinite(v) && v > 0.0 && v < 1.0,
              "MomentVector: entry outside (0,1)");
    }
  }

  // For values produced by enumeration, which may round to 0 or 1 at extreme theta.
  static MomentVector computed(Vector values) {
    MomentVector m;
    m.values_ = std::move(values);
    return m;
  }

  static MomentVector constant(std::size_t p, double value) {
    return MomentVector(Vector(p, value));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const Vector& values() const noexcept { return values_; }

  bool is_interior() const noexcept {
    for (double v : values_) {
      if (!(v > 0.0 && v < 1.0)) return false;
    }
    return true;
  }

  friend bool operator==(const MomentVector&, const MomentVector&) = default;

 private:
  Vector values_;
};

// Dense row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  Vector data;

  Matrix() = default;
  explicit Matrix(std::size_t dim) : n(dim), data(dim * dim, 0.0) {}

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Binary entropy in nats; s(0) = s(1) = 0.
inline double binary_entropy(double x) {
  double s = 0.0;
  if (x > 0.0) s -= x * std::log(x);
  if (x < 1.0) s -= (1.0 - x) * std::log1p(-x);
  return s;
}

inline double logit(double t) { return std::log(t) - std::log1p(-t); }

}  // namespace suffstat
