#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "doubt/projective.hpp"
#include "doubt/score_core.hpp"

namespace doubt {

/// Product of the off-argmax margins v_j - v_i; zero iff some margin is
/// exactly zero (the projection has a point at infinity).
inline double certainty_product(std::span<const double> values, std::size_t j) {
  if (values.size() < 2) throw std::invalid_argument("certainty_product: need at least 2 entries");
  detail::check_index(j, values.size(), "certainty_product");
  double product = 1.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != j) product *= values[j] - values[i];
  }
  return product;
}

inline double certainty_product(const ProbabilityVector& p, std::size_t j) {
  return certainty_product(p.span(), j);
}
inline double certainty_product(const ProbabilityVector& p) {
  return certainty_product(p.span(), argmax_index(p));
}

/// Doubt angle of a margin product: G applied to [product : 1], which equals
/// arcsin((1 - u)/(1 + u)) with u the squared product. 0 when the product is
/// 1, exactly pi/2 when it vanishes, -pi/2 in the infinite-product limit.
inline double theta_from_product(double product) {
  if (std::isnan(product)) throw std::invalid_argument("theta_from_product: NaN product");
  if (std::isinf(product)) return -kHalfPi;
  return rp1_to_angle(RP1Point(product, 1.0));
}

/// Doubt angle of an arbitrary score vector with a fixed argmax index.
inline double theta_cost(std::span<const double> values, std::size_t j) {
  return theta_from_product(certainty_product(values, j));
}

inline double doubt_cost(const ProbabilityVector& p, std::size_t j) {
  return theta_cost(p.span(), j);
}
inline double doubt_cost(const ProbabilityVector& p) {
  return theta_cost(p.span(), argmax_index(p));
}

inline double raw_doubt_cost(const LogitVector& y, std::size_t j) {
  return theta_cost(y.span(), j);
}
inline double raw_doubt_cost(const LogitVector& y) {
  return theta_cost(y.span(), argmax_index(y));
}

struct Gradient {
  std::vector<double> entries;
  bool degenerate = false;  // some margin was exactly zero; entries are all zero
};

// arcsin'(x) diverges at +-1; the gradient path clamps the arcsin argument
// this far inside the open interval. Cost values themselves are never clamped.
inline constexpr double kArcsinArgumentClamp = 1e-12;

/// d theta / d values with the argmax index held fixed. With u = prod of
/// squared margins and g = (1 - u)/(1 + u):
///   d theta/du   = -2 / ((1 + u)^2 sqrt(1 - g^2))
///   du/dv_k      = -2 u / margin_k          (k != j)
/// and the argmax component is minus the sum of the others, which is the
/// shift invariance of the margins.
inline Gradient theta_cost_gradient(std::span<const double> values, std::size_t j) {
  if (values.size() < 2) throw std::invalid_argument("theta_cost_gradient: need at least 2 entries");
  detail::check_index(j, values.size(), "theta_cost_gradient");
  Gradient grad{std::vector<double>(values.size(), 0.0), false};
  double u = 1.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == j) continue;
    const double margin = values[j] - values[i];
    if (margin == 0.0) {
      grad.degenerate = true;
      return grad;
    }
    u *= margin * margin;
  }
  if (!std::isfinite(u)) return grad;  // true derivative underflows to zero here
  const double g = (1.0 - u) / (1.0 + u);
  const double gc = std::clamp(g, -1.0 + kArcsinArgumentClamp, 1.0 - kArcsinArgumentClamp);
  const double dtheta_du = -2.0 / ((1.0 + u) * (1.0 + u) * std::sqrt(1.0 - gc * gc));
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k == j) continue;
    const double entry = dtheta_du * (-2.0 * u / (values[j] - values[k]));
    grad.entries[k] = entry;
    sum += entry;
  }
  grad.entries[j] = -sum;
  return grad;
}

inline Gradient doubt_cost_gradient(const ProbabilityVector& p, std::size_t j) {
  return theta_cost_gradient(p.span(), j);
}
inline Gradient doubt_cost_gradient(const ProbabilityVector& p) {
  return theta_cost_gradient(p.span(), argmax_index(p));
}

inline Gradient raw_doubt_cost_gradient(const LogitVector& y, std::size_t j) {
  return theta_cost_gradient(y.span(), j);
}
inline Gradient raw_doubt_cost_gradient(const LogitVector& y) {
  return theta_cost_gradient(y.span(), argmax_index(y));
}

struct CompositeLossResult {
  double loss = 0.0;
  Gradient gradient;
};

/// Cross entropy of softmax(y) against the target plus lambda times the
/// raw doubt cost, with the summed gradient. At lambda = 0 this is exactly
/// the cross-entropy loss and gradient.
inline CompositeLossResult composite_loss(const LogitVector& y, std::size_t target, double lambda) {
  if (target >= y.size()) throw std::invalid_argument("composite_loss: target out of range");
  if (!(lambda >= 0.0) || std::isinf(lambda)) {
    throw std::invalid_argument("composite_loss: lambda must be finite and non-negative");
  }
  const std::size_t j = argmax_index(y);
  const double m = y[j];
  double sum = 0.0;
  std::vector<double> p(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    p[i] = std::exp(y[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;

  CompositeLossResult result;
  result.loss = std::log(sum) + (m - y[target]);
  result.gradient.entries.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    result.gradient.entries[i] = p[i] - (i == target ? 1.0 : 0.0);
  }
  if (lambda > 0.0) {
    result.loss += lambda * theta_cost(y.span(), j);
    const Gradient penalty = theta_cost_gradient(y.span(), j);
    for (std::size_t i = 0; i < y.size(); ++i) {
      result.gradient.entries[i] += lambda * penalty.entries[i];
    }
    result.gradient.degenerate = penalty.degenerate;
  }
  return result;
}

}  // namespace doubt
