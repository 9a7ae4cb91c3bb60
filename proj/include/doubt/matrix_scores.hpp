#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "doubt/extended_real.hpp"
#include "doubt/score_core.hpp"

namespace doubt {

/// Dense row-major square matrix.
template <typename T>
class SquareMatrix {
 public:
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), cells_(n * n, fill) {
    if (n == 0) throw std::invalid_argument("SquareMatrix: size must be positive");
  }

  std::size_t size() const noexcept { return n_; }
  T& operator()(std::size_t i, std::size_t k) noexcept { return cells_[i * n_ + k]; }
  const T& operator()(std::size_t i, std::size_t k) const noexcept { return cells_[i * n_ + k]; }
  const std::vector<T>& cells() const noexcept { return cells_; }

 private:
  std::size_t n_;
  std::vector<T> cells_;
};

using CertaintyMatrix = SquareMatrix<double>;
using DoubtMatrix = SquareMatrix<ExtendedReal>;

/// C°(p) = p 1ᵀ - 1 pᵀ. Exactly skew-symmetric: entry (i,k) and entry (k,i)
/// are the two signed differences of the same operands.
inline CertaintyMatrix certainty_offset_matrix(const ProbabilityVector& p) {
  CertaintyMatrix m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m(i, k) = p[i] - p[k];
    }
  }
  return m;
}

/// C(p) = I + C°(p).
inline CertaintyMatrix certainty_matrix(const ProbabilityVector& p) {
  CertaintyMatrix m = certainty_offset_matrix(p);
  for (std::size_t i = 0; i < p.size(); ++i) m(i, i) = 1.0;
  return m;
}

/// D(p) = Inv(C(p)) - I with Inv the elementwise reciprocal: zero diagonal,
/// 1/(p_i - p_k) off it, the point at infinity exactly on equal coordinates.
inline DoubtMatrix doubt_matrix(const ProbabilityVector& p) {
  DoubtMatrix m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m(i, k) = (i == k) ? ExtendedReal(0.0) : reciprocal(p[i] - p[k]);
    }
  }
  return m;
}

namespace detail {

struct LuFactors {
  std::size_t n = 0;
  std::vector<double> lu;     // L below the diagonal (unit), U on and above
  std::vector<std::size_t> perm;
  bool singular = false;
};

inline LuFactors lu_factor(const SquareMatrix<double>& m) {
  const std::size_t n = m.size();
  LuFactors f;
  f.n = n;
  f.lu = m.cells();
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
  auto at = [&](std::size_t i, std::size_t k) -> double& { return f.lu[i * n + k]; };
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(at(r, col)) > std::fabs(at(pivot, col))) pivot = r;
    }
    if (at(pivot, col) == 0.0) {
      f.singular = true;
      return f;
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(at(pivot, k), at(col, k));
      std::swap(f.perm[pivot], f.perm[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = at(r, col) / at(col, col);
      at(r, col) = factor;
      for (std::size_t k = col + 1; k < n; ++k) at(r, k) -= factor * at(col, k);
    }
  }
  return f;
}

inline std::vector<double> lu_solve(const LuFactors& f, std::span<const double> rhs) {
  const std::size_t n = f.n;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= f.lu[i * n + k] * x[k];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= f.lu[ii * n + k] * x[k];
    x[ii] /= f.lu[ii * n + ii];
  }
  return x;
}

inline double norm_inf(const SquareMatrix<double>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) row += std::fabs(m(i, k));
    if (row > best) best = row;
  }
  return best;
}

}  // namespace detail

/// Linear-algebra inverse via the dense partial-pivot LU factorization.
inline SquareMatrix<double> matrix_inverse(const SquareMatrix<double>& m) {
  const detail::LuFactors f = detail::lu_factor(m);
  if (f.singular) throw std::domain_error("matrix_inverse: singular matrix");
  const std::size_t n = m.size();
  SquareMatrix<double> inv(n);
  std::vector<double> e(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    e[col] = 1.0;
    const std::vector<double> x = detail::lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, col) = x[i];
    e[col] = 0.0;
  }
  return inv;
}

struct InvertibilityResult {
  bool invertible = false;
  double condition_estimate = std::numeric_limits<double>::infinity();
};

/// True, with the infinity-norm condition estimate, when the factorization
/// completes without a zero pivot.
inline InvertibilityResult is_invertible(const CertaintyMatrix& c) {
  const detail::LuFactors f = detail::lu_factor(c);
  if (f.singular) return {};
  return {true, detail::norm_inf(c) * detail::norm_inf(matrix_inverse(c))};
}

/// ‖D(p)‖'∞: the largest doubt magnitude over all pairs, equal to the
/// reciprocal of the smallest pairwise coordinate gap; the point at infinity
/// exactly when two coordinates tie.
inline ExtendedReal max_doubt_score(const ProbabilityVector& p) {
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t k = i + 1; k < p.size(); ++k) {
      const double d = std::fabs(p[i] - p[k]);
      if (d < min_gap) min_gap = d;
    }
  }
  return reciprocal(min_gap);
}

/// Largest row 1-norm of C(p); secondary summary statistic.
inline double row_l1_max(const CertaintyMatrix& c) {
  return detail::norm_inf(c);
}

}  // namespace doubt
