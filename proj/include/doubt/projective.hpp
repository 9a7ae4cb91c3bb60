#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doubt/score_core.hpp"

namespace doubt {

inline constexpr double kProjectiveEqualityTolerance = 1e-12;
inline constexpr double kHalfPi = 1.5707963267948966;

/// Point [a : b] on the real projective line, stored as the canonical
/// representative: unit Euclidean norm, first nonzero coordinate positive.
class RP1Point {
 public:
  RP1Point(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw std::invalid_argument("RP1Point: coordinates must be finite");
    }
    if (a == 0.0 && b == 0.0) {
      throw std::invalid_argument("RP1Point: [0:0] is not a projective point");
    }
    // Scale by the larger magnitude first so the squares cannot overflow.
    const double m = std::max(std::fabs(a), std::fabs(b));
    a /= m;
    b /= m;
    const double n = std::sqrt(a * a + b * b);
    a /= n;
    b /= n;
    if (a == 0.0) {
      a = 0.0;
      if (b < 0.0) b = -b;
    } else if (a < 0.0) {
      a = -a;
      b = -b;
    }
    if (b == 0.0) b = 0.0;
    a_ = a;
    b_ = b;
  }

  static RP1Point point_at_infinity() { return RP1Point(0.0, 1.0); }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  bool is_point_at_infinity() const noexcept { return a_ == 0.0; }

  /// Projective equality: vanishing cross product of the canonical
  /// representatives, within kProjectiveEqualityTolerance.
  friend bool operator==(const RP1Point& p, const RP1Point& q) noexcept {
    return std::fabs(p.a_ * q.b_ - q.a_ * p.b_) <= kProjectiveEqualityTolerance;
  }

 private:
  double a_ = 1.0;
  double b_ = 0.0;
};

/// Stereographic chart S^1 -> RP^1: theta -> [1 - sin t : cos t], switching
/// to the complementary chart [cos t : 1 + sin t] where the first one
/// degenerates (t = pi/2 mod 2pi).
inline RP1Point angle_to_rp1(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("angle_to_rp1: non-finite angle");
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  if (1.0 - s == 0.0) return RP1Point(c, 1.0 + s);
  return RP1Point(1.0 - s, c);
}

/// Inverse chart RP^1 -> [-pi/2, pi/2]: arcsin((b^2 - a^2)/(a^2 + b^2)),
/// with the point at infinity mapped to pi/2.
inline double rp1_to_angle(const RP1Point& pt) noexcept {
  const double a = pt.a();
  const double b = pt.b();
  if (a == 0.0) return kHalfPi;
  return std::asin((b * b - a * a) / (a * a + b * b));
}

struct CertaintyProjection {
  std::vector<RP1Point> points;
};

/// Coordinate-wise projection of an ordered simplex point: [1:0] for the
/// leading coordinate and [p_1 - p_i : 1] after it, hitting the point at
/// infinity exactly where p_i ties the top coordinate.
inline CertaintyProjection certainty_projection(const ProbabilityVector& ordered) {
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i - 1] < ordered[i]) {
      throw std::invalid_argument("certainty_projection: input must be sorted descending");
    }
  }
  CertaintyProjection f;
  f.points.reserve(ordered.size());
  f.points.emplace_back(1.0, 0.0);
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    f.points.emplace_back(ordered[0] - ordered[i], 1.0);
  }
  return f;
}

}  // namespace doubt
