#pragma once

// Small dense solves over double or Jet. Pivoting is by |value|; for jets the
// whole Taylor expansion is carried through the elimination, which yields the
// jet of A^{-1} b exactly to the stored order.

#include <pke/error.hpp>
#include <pke/tensor.hpp>

#include <cmath>
#include <string>
#include <utility>

namespace pke {

inline bool is_exact_zero(double x) { return x == 0.0; }
inline bool is_exact_zero(const Jet& j) {
  for (double c : j.coeffs()) {
    if (c != 0.0) return false;
  }
  return true;
}

/// Solves A X = B for X (A: n×n, B: n×r). Throws ErrorKind::singular when a
/// pivot's value falls below `pivot_floor` times the largest |A_ij|.
template <class T>
Tensor<T> solve(Tensor<T> a, Tensor<T> b, double pivot_floor = 1e-13) {
  const std::size_t n = a.extent(0);
  if (a.rank() != 2 || a.extent(1) != n || b.extent(0) != n) {
    throw Error(ErrorKind::dimension_mismatch, "solve: shape mismatch");
  }
  const std::size_t r = b.extent(1);
  double scale = 0.0;
  for (const auto& x : a.flat()) scale = std::max(scale, std::abs(value_of(x)));
  if (scale == 0.0) throw Error(ErrorKind::singular, "solve: zero matrix");

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(value_of(a(row, col))) > std::abs(value_of(a(piv, col)))) piv = row;
    }
    if (std::abs(value_of(a(piv, col))) <= pivot_floor * scale) {
      throw Error(ErrorKind::singular, "solve: matrix is singular (column " + std::to_string(col) + ")");
    }
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      for (std::size_t j = 0; j < r; ++j) std::swap(b(col, j), b(piv, j));
    }
    const T inv = reciprocal(a(col, col));
    for (std::size_t row = col + 1; row < n; ++row) {
      if (value_of(a(row, col)) == 0.0 && is_exact_zero(a(row, col))) continue;
      const T f = a(row, col) * inv;
      for (std::size_t j = col; j < n; ++j) a(row, j) -= f * a(col, j);
      for (std::size_t j = 0; j < r; ++j) b(row, j) -= f * b(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    const T inv = reciprocal(a(col, col));
    for (std::size_t j = 0; j < r; ++j) {
      T acc = b(col, j);
      for (std::size_t k = col + 1; k < n; ++k) acc -= a(col, k) * b(k, j);
      b(col, j) = acc * inv;
    }
  }
  return b;
}

template <class T>
Tensor<T> inverse(const Tensor<T>& a, double pivot_floor = 1e-13) {
  return solve(a, identity<T>(a.extent(0)), pivot_floor);
}

}  // namespace pke
