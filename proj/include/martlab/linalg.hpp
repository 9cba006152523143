#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "martlab/rational.hpp"

namespace martlab {

template <class T>
using Matrix = std::vector<std::vector<T>>;

namespace detail {

inline bool is_zero(const Rational& x, const Rational&) { return x == 0; }
inline bool is_zero(double x, double scale) { return std::fabs(x) <= 1e-13 * scale; }

inline double magnitude(double x) { return std::fabs(x); }
inline Rational magnitude(const Rational& x) { return abs(x); }

}  // namespace detail

// Gauss-Jordan with partial pivoting (largest magnitude; for Rational any
// nonzero pivot works but the same rule keeps the code shared).
// Returns nullopt when the matrix is singular.
template <class T>
std::optional<std::vector<T>> solve_linear(Matrix<T> a, std::vector<T> b) {
  const std::size_t n = b.size();
  T scale = T(0);
  for (const auto& row : a)
    for (const auto& v : row)
      if (scale < detail::magnitude(v)) scale = detail::magnitude(v);
  if (scale == T(0)) scale = T(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (detail::magnitude(a[piv][col]) < detail::magnitude(a[r][col])) piv = r;
    if (detail::is_zero(a[piv][col], scale)) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    T inv = T(1) / a[col][col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == T(0)) continue;
      T factor = a[r][col] * inv;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

}  // namespace martlab
