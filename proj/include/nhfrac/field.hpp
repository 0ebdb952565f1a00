#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nhfrac/errors.hpp"

namespace nhfrac {

/// Real-valued function on the points of a space, one finite value per point.
class FieldFunction {
 public:
  FieldFunction() = default;
  explicit FieldFunction(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i]))
        throw Error(ErrorCode::InvalidInput, "field value at point " + std::to_string(i) + " is not finite");
  }

  static FieldFunction zeros(std::size_t n) { return FieldFunction(std::vector<double>(n, 0.0)); }
  static FieldFunction constant(std::size_t n, double c) { return FieldFunction(std::vector<double>(n, c)); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  friend bool operator==(const FieldFunction&, const FieldFunction&) = default;

 private:
  std::vector<double> values_;
};

inline FieldFunction operator*(double t, const FieldFunction& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (auto& x : v) x *= t;
  return FieldFunction(std::move(v));
}

inline FieldFunction operator+(const FieldFunction& f, const FieldFunction& g) {
  require(f.size() == g.size(), ErrorCode::InvalidInput, "field sizes differ");
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] + g[i];
  return FieldFunction(std::move(v));
}

inline FieldFunction operator-(const FieldFunction& f, const FieldFunction& g) { return f + (-1.0) * g; }

inline FieldFunction operator+(const FieldFunction& f, double c) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (auto& x : v) x += c;
  return FieldFunction(std::move(v));
}

/// Pointwise product.
inline FieldFunction hadamard(const FieldFunction& f, const FieldFunction& g) {
  require(f.size() == g.size(), ErrorCode::InvalidInput, "field sizes differ");
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] * g[i];
  return FieldFunction(std::move(v));
}

inline FieldFunction abs(const FieldFunction& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (auto& x : v) x = std::abs(x);
  return FieldFunction(std::move(v));
}

}  // namespace nhfrac
