#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace doubt {

/// A real number extended with a single, unsigned point at infinity.
/// Finite values carry their sign as usual; NaN and -infinity are rejected
/// (the reciprocal of an exact zero gap is the one point at infinity, so a
/// signed infinity never arises from valid inputs).
class ExtendedReal {
 public:
  ExtendedReal() = default;

  ExtendedReal(double value) : value_(value) {
    if (std::isnan(value_) || (std::isinf(value_) && value_ < 0.0)) {
      throw std::invalid_argument("ExtendedReal: value must be finite or +infinity");
    }
  }

  static ExtendedReal infinity() noexcept {
    ExtendedReal e;
    e.value_ = std::numeric_limits<double>::infinity();
    return e;
  }

  bool is_infinite() const noexcept { return std::isinf(value_); }
  bool is_finite() const noexcept { return !is_infinite(); }

  /// Carrier double: the finite value, or +inf for the point at infinity.
  double value() const noexcept { return value_; }

  /// 1/0 = infinity and 1/infinity = 0; a finite reciprocal that overflows
  /// collapses to the point at infinity as well.
  ExtendedReal reciprocal() const noexcept {
    if (is_infinite()) return ExtendedReal(0.0);
    if (value_ == 0.0) return infinity();
    const double r = 1.0 / value_;
    return std::isinf(r) ? infinity() : ExtendedReal(r);
  }

  ExtendedReal abs() const noexcept {
    ExtendedReal e;
    e.value_ = std::fabs(value_);
    return e;
  }

  friend bool operator==(const ExtendedReal& x, const ExtendedReal& y) noexcept {
    return x.value_ == y.value_;
  }
  friend bool operator<(const ExtendedReal& x, const ExtendedReal& y) noexcept {
    return x.value_ < y.value_;
  }

 private:
  double value_ = 0.0;
};

/// Reciprocal of a raw gap with the 1/0 = infinity convention.
inline ExtendedReal reciprocal(double gap) {
  if (std::isnan(gap)) throw std::invalid_argument("reciprocal: NaN gap");
  if (gap == 0.0) return ExtendedReal::infinity();
  const double r = 1.0 / gap;
  return std::isinf(r) ? ExtendedReal::infinity() : ExtendedReal(r);
}

}  // namespace doubt
