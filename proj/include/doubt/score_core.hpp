#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doubt/extended_real.hpp"

namespace doubt {

inline constexpr double kProbabilitySumTolerance = 1e-9;
inline constexpr double kProbabilityNegativeSlack = 1e-12;

/// Smallest index attaining the maximum entry.
inline std::size_t argmax_index(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("argmax_index: need at least 2 entries");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/// Point on the probability simplex: non-negative entries summing to 1
/// within kProbabilitySumTolerance. Entries within kProbabilityNegativeSlack
/// below zero (32-bit softmax residue) are clamped to zero.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) {
      throw std::invalid_argument("ProbabilityVector: need at least 2 entries");
    }
    double sum = 0.0;
    for (double& v : entries_) {
      if (!std::isfinite(v) || v < -kProbabilityNegativeSlack) {
        throw std::invalid_argument("ProbabilityVector: entries must be non-negative and finite");
      }
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kProbabilitySumTolerance) {
      throw std::invalid_argument("ProbabilityVector: entries sum to " + std::to_string(sum) +
                                  ", expected 1");
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const noexcept { return entries_[i]; }
  const std::vector<double>& entries() const noexcept { return entries_; }
  std::span<const double> span() const noexcept { return entries_; }

  /// p-hat, the largest coordinate.
  double max_entry() const noexcept { return *std::max_element(entries_.begin(), entries_.end()); }

 private:
  std::vector<double> entries_;
};

/// Unnormalized model scores; every entry must be finite.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) {
      throw std::invalid_argument("LogitVector: need at least 2 entries");
    }
    for (double v : entries_) {
      if (!std::isfinite(v)) throw std::invalid_argument("LogitVector: entries must be finite");
    }
  }

  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const noexcept { return entries_[i]; }
  const std::vector<double>& entries() const noexcept { return entries_; }
  std::span<const double> span() const noexcept { return entries_; }

 private:
  std::vector<double> entries_;
};

inline std::size_t argmax_index(const ProbabilityVector& p) { return argmax_index(p.span()); }
inline std::size_t argmax_index(const LogitVector& y) { return argmax_index(y.span()); }

struct CertaintyVector {
  std::vector<double> scores;  // 1 at the argmax, top-score margins elsewhere
  std::size_t argmax_index = 0;
};

struct DoubtVector {
  std::vector<ExtendedReal> scores;  // 0 at the argmax, reciprocal margins elsewhere
  std::size_t argmax_index = 0;
};

struct SortedProbabilities {
  ProbabilityVector probabilities;
  std::vector<std::size_t> permutation;  // output index -> input index
};

/// Stable descending sort onto the ordered simplex; equal entries keep
/// their input order.
inline SortedProbabilities sort_descending(const ProbabilityVector& p) {
  std::vector<std::size_t> perm(p.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  std::vector<double> sorted(p.size());
  for (std::size_t i = 0; i < perm.size(); ++i) sorted[i] = p[perm[i]];
  return {ProbabilityVector(std::move(sorted)), std::move(perm)};
}

namespace detail {

inline void check_index(std::size_t j, std::size_t n, const char* who) {
  if (j >= n) throw std::invalid_argument(std::string(who) + ": index out of range");
}

inline std::vector<double> margin_scores(std::span<const double> v, std::size_t j) {
  std::vector<double> scores(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    scores[i] = (i == j) ? 1.0 : v[j] - v[i];
  }
  return scores;
}

inline std::vector<ExtendedReal> reciprocal_margin_scores(std::span<const double> v, std::size_t j) {
  std::vector<ExtendedReal> scores(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    scores[i] = (i == j) ? ExtendedReal(0.0) : reciprocal(v[j] - v[i]);
  }
  return scores;
}

}  // namespace detail

/// chi: 1 at the argmax, p_j - p_i elsewhere. With an explicit j (batch
/// re-scoring) negative margins are allowed and pass through unchanged.
inline CertaintyVector pairwise_certainty(const ProbabilityVector& p, std::size_t j) {
  detail::check_index(j, p.size(), "pairwise_certainty");
  return {detail::margin_scores(p.span(), j), j};
}
inline CertaintyVector pairwise_certainty(const ProbabilityVector& p) {
  return pairwise_certainty(p, argmax_index(p));
}

/// delta: 0 at the argmax, 1/(p_j - p_i) elsewhere; the point at infinity
/// exactly where p_j equals p_i.
inline DoubtVector pairwise_doubt(const ProbabilityVector& p, std::size_t j) {
  detail::check_index(j, p.size(), "pairwise_doubt");
  return {detail::reciprocal_margin_scores(p.span(), j), j};
}
inline DoubtVector pairwise_doubt(const ProbabilityVector& p) {
  return pairwise_doubt(p, argmax_index(p));
}

/// Same margins on raw logits (equal to log-probability differences).
inline CertaintyVector raw_certainty(const LogitVector& y, std::size_t j) {
  detail::check_index(j, y.size(), "raw_certainty");
  return {detail::margin_scores(y.span(), j), j};
}
inline CertaintyVector raw_certainty(const LogitVector& y) {
  return raw_certainty(y, argmax_index(y));
}

inline DoubtVector raw_doubt(const LogitVector& y, std::size_t j) {
  detail::check_index(j, y.size(), "raw_doubt");
  return {detail::reciprocal_margin_scores(y.span(), j), j};
}
inline DoubtVector raw_doubt(const LogitVector& y) { return raw_doubt(y, argmax_index(y)); }

/// -ln composed with the pairwise certainty scores (natural log); infinite
/// exactly where the certainty is zero.
inline DoubtVector neg_log_certainty(const ProbabilityVector& p, std::size_t j) {
  detail::check_index(j, p.size(), "neg_log_certainty");
  std::vector<ExtendedReal> scores(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i == j) {
      scores[i] = ExtendedReal(0.0);
    } else {
      const double gap = p[j] - p[i];
      // + 0.0 turns -log(1) = -0.0 into +0.0
      scores[i] = (gap == 0.0) ? ExtendedReal::infinity() : ExtendedReal(-std::log(gap) + 0.0);
    }
  }
  return {std::move(scores), j};
}
inline DoubtVector neg_log_certainty(const ProbabilityVector& p) {
  return neg_log_certainty(p, argmax_index(p));
}

/// Numerically stable softmax.
inline ProbabilityVector softmax(const LogitVector& y) {
  const double m = y[argmax_index(y)];
  std::vector<double> e(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) e[i] = std::exp(y[i] - m);
  double sum = 0.0;
  for (double v : e) sum += v;
  for (double& v : e) v /= sum;
  return ProbabilityVector(std::move(e));
}

}  // namespace doubt
