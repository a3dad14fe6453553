#pragma once

// Point-wise bilinear algebra and the shared index conventions.
//
// Conventions (fixed everywhere):
//   * cotangent coordinates are ordered (x^0..x^{n-1}, xi_0..xi_{n-1}); xi_i is
//     dual to x^i, so the tautological form is sum_i xi_i dx^i.
//   * Grassmannian charts: TM = Hom(E, F), rank E = m, rank F = n. The base
//     coordinate x^{pq} (p in F, q in E) lives at slot p*m + q. A tangent vector
//     is the n×m matrix X_{pq}; a covector is the m×n matrix alpha_{qp} with
//     alpha_{qp} stored at slot p*m + q, so alpha(X) = tr(alpha X).
//   * The user-facing fiber matrix view lists xi_{qp} row-major in q then p;
//     fiber_from_matrix_view / fiber_to_matrix_view convert.

#include <pke/error.hpp>
#include <pke/tensor.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace pke {

template <class T>
struct SymAlt {
  Tensor<T> sym;
  Tensor<T> alt;
};

template <class T>
SymAlt<T> split_sym_alt(const Tensor<T>& t) {
  if (t.rank() != 2 || t.extent(0) != t.extent(1)) {
    throw Error(ErrorKind::dimension_mismatch, "split_sym_alt: matrix is not square");
  }
  const std::size_t n = t.extent(0);
  SymAlt<T> out{Tensor<T>({n, n}), Tensor<T>({n, n})};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.sym(i, j) = (t(i, j) + t(j, i)) * 0.5;
      out.alt(i, j) = (t(i, j) - t(j, i)) * 0.5;
    }
  }
  return out;
}

template <class T>
T trace(const Tensor<T>& a) {
  T s(0.0);
  for (std::size_t i = 0; i < a.extent(0); ++i) s += a(i, i);
  return s;
}

/// tr_g B = g^{ij} B_ij.
template <class T>
T trace_with(const Tensor<T>& g_inv, const Tensor<T>& b) {
  T s(0.0);
  for (std::size_t i = 0; i < b.extent(0); ++i) {
    for (std::size_t j = 0; j < b.extent(1); ++j) s += g_inv(i, j) * b(i, j);
  }
  return s;
}

// ---- Grassmannian flattening -------------------------------------------------

inline std::size_t grass_index(std::size_t p, std::size_t q, std::size_t m) { return p * m + q; }

inline void check_grass_dims(int m, int n) {
  if (m < 1 || n < 1) throw Error(ErrorKind::invalid_argument, "grassmannian ranks must be positive");
}

/// xi_{qp} listed row-major (q, then p) -> internal slots p*m + q.
inline std::vector<double> fiber_from_matrix_view(std::span<const double> view, int m, int n) {
  check_grass_dims(m, n);
  if (view.size() != static_cast<std::size_t>(m * n)) {
    throw Error(ErrorKind::dimension_mismatch, "fiber matrix view must have m*n entries");
  }
  std::vector<double> out(view.size());
  for (int q = 0; q < m; ++q) {
    for (int p = 0; p < n; ++p) out[grass_index(p, q, m)] = view[static_cast<std::size_t>(q * n + p)];
  }
  return out;
}

inline std::vector<double> fiber_to_matrix_view(std::span<const double> slots, int m, int n) {
  check_grass_dims(m, n);
  if (slots.size() != static_cast<std::size_t>(m * n)) {
    throw Error(ErrorKind::dimension_mismatch, "fiber vector must have m*n entries");
  }
  std::vector<double> out(slots.size());
  for (int q = 0; q < m; ++q) {
    for (int p = 0; p < n; ++p) out[static_cast<std::size_t>(q * n + p)] = slots[grass_index(p, q, m)];
  }
  return out;
}

/// Bilinear form on Hom(E, F) viewed as a map F⊗F -> E⊗E.
///
/// Entry P_{(a alpha)(b beta)} (a, b in E; alpha, beta in F) is stored at row
/// alpha*m + a, column beta*m + b, i.e. in the base coordinate flattening.
template <class T>
class GrassBilinear {
 public:
  GrassBilinear(int m, int n) : m_(m), n_(n), mat_(square<T>(static_cast<std::size_t>(m * n), T(0.0))) {
    check_grass_dims(m, n);
  }

  GrassBilinear(int m, int n, Tensor<T> matrix) : m_(m), n_(n), mat_(std::move(matrix)) {
    check_grass_dims(m, n);
    const auto d = static_cast<std::size_t>(m * n);
    if (mat_.rank() != 2 || mat_.extent(0) != d || mat_.extent(1) != d) {
      throw Error(ErrorKind::dimension_mismatch, "grassmannian bilinear must be (mn)x(mn)");
    }
  }

  [[nodiscard]] int m() const noexcept { return m_; }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] const Tensor<T>& matrix() const noexcept { return mat_; }

  T& at(int a, int alpha, int b, int beta) { return mat_(row(a, alpha), row(b, beta)); }
  const T& at(int a, int alpha, int b, int beta) const { return mat_(row(a, alpha), row(b, beta)); }

  /// Swaps the E indices a <-> b.
  [[nodiscard]] GrassBilinear t_E() const {
    GrassBilinear out(m_, n_);
    for_each([&](int a, int al, int b, int be) { out.at(a, al, b, be) = at(b, al, a, be); });
    return out;
  }

  /// Swaps the F indices alpha <-> beta.
  [[nodiscard]] GrassBilinear t_F() const {
    GrassBilinear out(m_, n_);
    for_each([&](int a, int al, int b, int be) { out.at(a, al, b, be) = at(a, be, b, al); });
    return out;
  }

  friend GrassBilinear operator+(const GrassBilinear& x, const GrassBilinear& y) {
    return x.combine(y, 1.0);
  }
  friend GrassBilinear operator-(const GrassBilinear& x, const GrassBilinear& y) {
    return x.combine(y, -1.0);
  }
  friend GrassBilinear operator*(const GrassBilinear& x, double s) {
    GrassBilinear out = x;
    for (auto& v : out.mat_.flat()) v = v * s;
    return out;
  }

 private:
  [[nodiscard]] std::size_t row(int e, int f) const {
    return static_cast<std::size_t>(f) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(e);
  }

  template <class F>
  void for_each(F&& f) const {
    for (int a = 0; a < m_; ++a)
      for (int al = 0; al < n_; ++al)
        for (int b = 0; b < m_; ++b)
          for (int be = 0; be < n_; ++be) f(a, al, b, be);
  }

  [[nodiscard]] GrassBilinear combine(const GrassBilinear& y, double s) const {
    if (m_ != y.m_ || n_ != y.n_) throw Error(ErrorKind::dimension_mismatch, "grassmannian shape mismatch");
    GrassBilinear out = *this;
    for (std::size_t i = 0; i < mat_.size(); ++i) out.mat_.flat()[i] = mat_.flat()[i] + y.mat_.flat()[i] * s;
    return out;
  }

  int m_;
  int n_;
  Tensor<T> mat_;
};

/// The four twisted parts; first superscript is the E side, second the F side.
template <class T>
struct GrassParts {
  GrassBilinear<T> ss;
  GrassBilinear<T> aa;
  GrassBilinear<T> sa;
  GrassBilinear<T> as;
};

template <class T>
GrassParts<T> grassmann_projections(const GrassBilinear<T>& p) {
  const auto e = p.t_E();
  const auto f = p.t_F();
  const auto ef = e.t_F();
  // Sym_E P Sym_F = (P + tE P + tF P + tE tF P) / 4, and sign flips for Alt.
  auto mix = [&](double se, double sf) { return (p + e * se + f * sf + ef * (se * sf)) * 0.25; };
  return {mix(1, 1), mix(-1, -1), mix(1, -1), mix(-1, 1)};
}

}  // namespace pke
