#pragma once

// Structure descriptors and the structure-specific algebraic bracket.
//
// The bracket {X, alpha} is returned as the endomorphism matrix E(k, l), so
// that ({X, alpha} Y)^k = E(k, l) Y^l:
//   projective    alpha(X) Y + alpha(Y) X
//   conformal     alpha(X) Y + alpha(Y) X - g(X, Y) g^#alpha
//   grassmannian  X alpha Y + Y alpha X      (matrix products, see base_geometry)
// Endomorphisms act on covectors by minus the transpose.

#include <pke/base_geometry.hpp>
#include <pke/error.hpp>
#include <pke/linalg.hpp>
#include <pke/poly_field.hpp>
#include <pke/tensor.hpp>

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pke {

enum class StructureKind { projective, conformal, grassmannian };

inline const char* to_string(StructureKind k) {
  switch (k) {
    case StructureKind::projective: return "projective";
    case StructureKind::conformal: return "conformal";
    case StructureKind::grassmannian: return "grassmannian";
  }
  return "?";
}

/// Symmetric matrix of polynomials over a common polynomial denominator:
/// g_ij = entries(i, j) / denominator.
class MetricField {
 public:
  MetricField() = default;

  MetricField(Tensor<PolyField> entries, PolyField denominator)
      : entries_(std::move(entries)), denominator_(std::move(denominator)) {
    if (entries_.rank() != 2 || entries_.extent(0) != entries_.extent(1) || entries_.extent(0) == 0) {
      throw Error(ErrorKind::dimension_mismatch, "metric entries must form a non-empty square matrix");
    }
    const int n = dim();
    if (denominator_.is_zero()) throw Error(ErrorKind::invalid_argument, "metric denominator is zero");
    if (denominator_.dim() != n) throw Error(ErrorKind::dimension_mismatch, "metric denominator dimension");
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        auto& e = entries_(i, j);
        if (e.is_zero()) e = PolyField(n);
        if (e.dim() != n) throw Error(ErrorKind::dimension_mismatch, "metric entry dimension");
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!(entries_(i, j) == entries_(j, i))) {
          throw Error(ErrorKind::invalid_argument, "metric entries are not symmetric");
        }
      }
    }
  }

  explicit MetricField(const Tensor<PolyField>& entries)
      : MetricField(entries, PolyField::constant(entries.rank() == 2 ? static_cast<int>(entries.extent(0)) : 1, 1.0)) {}

  /// Constant diagonal metric diag(signs).
  static MetricField diagonal(std::span<const double> diag) {
    const int n = static_cast<int>(diag.size());
    Tensor<PolyField> e({diag.size(), diag.size()}, PolyField(n));
    for (int i = 0; i < n; ++i) e(i, i) = PolyField::constant(n, diag[static_cast<std::size_t>(i)]);
    return MetricField(std::move(e));
  }

  static MetricField euclidean(int n) {
    std::vector<double> d(static_cast<std::size_t>(n), 1.0);
    return diagonal(d);
  }

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(entries_.extent(0)); }
  [[nodiscard]] const Tensor<PolyField>& entries() const noexcept { return entries_; }
  [[nodiscard]] const PolyField& denominator() const noexcept { return denominator_; }

  [[nodiscard]] Tensor<Jet> evaluate(std::span<const double> x, int order) const {
    const std::size_t n = entries_.extent(0);
    const Jet inv = reciprocal(jet_eval(denominator_, x, order));
    Tensor<Jet> out({n, n});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        out(i, j) = jet_eval(entries_(i, j), x, order) * inv;
        out(j, i) = out(i, j);
      }
    }
    return out;
  }

  [[nodiscard]] Tensor<double> value(std::span<const double> x) const { return values(evaluate(x, 0)); }

 private:
  Tensor<PolyField> entries_;
  PolyField denominator_;
};

class StructureSpec {
 public:
  static StructureSpec projective(int n) {
    if (n < 2) {
      throw Error(ErrorKind::unsupported_dimension,
                  "projective requires n >= 2 (the Rho normalization divides by n - 1)");
    }
    StructureSpec s;
    s.kind_ = StructureKind::projective;
    s.n_ = n;
    s.dim_ = n;
    return s;
  }

  static StructureSpec conformal(MetricField g) {
    const int n = g.dim();
    if (n < 3) {
      throw Error(ErrorKind::unsupported_dimension,
                  "conformal requires n >= 3 (the Rho normalization divides by n - 2)");
    }
    StructureSpec s;
    s.kind_ = StructureKind::conformal;
    s.n_ = n;
    s.dim_ = n;
    s.metric_ = std::move(g);
    return s;
  }

  static StructureSpec grassmannian(int m, int n) {
    check_grass_dims(m, n);
    if (m == 1 && n == 1) {
      throw Error(ErrorKind::unsupported_dimension,
                  "grassmannian requires (m, n) != (1, 1) (the Rho normalization divides by m + n - 2)");
    }
    if (m * n > max_jet_dim / 2) {
      throw Error(ErrorKind::unsupported_dimension, "grassmannian chart dimension m*n exceeds 8");
    }
    StructureSpec s;
    s.kind_ = StructureKind::grassmannian;
    s.m_ = m;
    s.n_ = n;
    s.dim_ = m * n;
    return s;
  }

  [[nodiscard]] StructureKind kind() const noexcept { return kind_; }
  /// Chart dimension (m*n for Grassmannian).
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int m() const noexcept { return m_; }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] const MetricField& metric() const {
    if (!metric_) throw Error(ErrorKind::invalid_argument, "structure has no metric");
    return *metric_;
  }
  [[nodiscard]] bool has_metric() const noexcept { return metric_.has_value(); }

  [[nodiscard]] std::string describe() const {
    std::string s = to_string(kind_);
    if (kind_ == StructureKind::grassmannian) return s + "(m=" + std::to_string(m_) + ", n=" + std::to_string(n_) + ")";
    return s + "(n=" + std::to_string(n_) + ")";
  }

 private:
  StructureSpec() = default;

  StructureKind kind_ = StructureKind::projective;
  int m_ = 1;
  int n_ = 0;
  int dim_ = 0;
  std::optional<MetricField> metric_;
};

/// Structure data frozen at one point: everything the bracket needs.
template <class T>
struct LocalStructure {
  StructureKind kind;
  int dim;
  int m;
  int n;
  Tensor<T> g;      // conformal only
  Tensor<T> g_inv;  // conformal only

  /// {X, alpha} as E(k, l).
  [[nodiscard]] Tensor<T> bracket(std::span<const T> x, std::span<const T> alpha) const {
    const auto d = static_cast<std::size_t>(dim);
    if (x.size() != d || alpha.size() != d) throw Error(ErrorKind::dimension_mismatch, "bracket argument size");
    Tensor<T> e = square<T>(d, T(0.0));
    if (kind == StructureKind::grassmannian) {
      grass_bracket(x, alpha, e);
      return e;
    }
    T ax(0.0);
    for (std::size_t k = 0; k < d; ++k) ax += alpha[k] * x[k];
    for (std::size_t k = 0; k < d; ++k) {
      e(k, k) += ax;
      for (std::size_t l = 0; l < d; ++l) e(k, l) += alpha[l] * x[k];
    }
    if (kind == StructureKind::conformal) {
      std::vector<T> gx(d, T(0.0));
      std::vector<T> sharp(d, T(0.0));
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
          gx[a] += g(a, b) * x[b];
          sharp[a] += g_inv(a, b) * alpha[b];
        }
      }
      for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t l = 0; l < d; ++l) e(k, l) -= gx[l] * sharp[k];
      }
    }
    return e;
  }

  /// {e_i, alpha}.
  [[nodiscard]] Tensor<T> bracket_basis(std::size_t i, std::span<const T> alpha) const {
    std::vector<T> x(static_cast<std::size_t>(dim), T(0.0));
    x[i] = T(1.0);
    return bracket(x, alpha);
  }

 private:
  void grass_bracket(std::span<const T> x, std::span<const T> alpha, Tensor<T>& e) const {
    const auto mm = static_cast<std::size_t>(m);
    const auto nn = static_cast<std::size_t>(n);
    // X alpha is n×n (F side), alpha X is m×m (E side).
    Tensor<T> xa({nn, nn}, T(0.0));
    Tensor<T> ax({mm, mm}, T(0.0));
    for (std::size_t p = 0; p < nn; ++p)
      for (std::size_t p2 = 0; p2 < nn; ++p2)
        for (std::size_t r = 0; r < mm; ++r) xa(p, p2) += x[grass_index(p, r, mm)] * alpha[grass_index(p2, r, mm)];
    for (std::size_t q = 0; q < mm; ++q)
      for (std::size_t q2 = 0; q2 < mm; ++q2)
        for (std::size_t p = 0; p < nn; ++p) ax(q, q2) += alpha[grass_index(p, q, mm)] * x[grass_index(p, q2, mm)];
    // (X alpha E_{p'q'})_{pq} = (X alpha)_{pp'} d_{qq'};  (E_{p'q'} alpha X)_{pq} = d_{pp'} (alpha X)_{q'q}.
    for (std::size_t p = 0; p < nn; ++p)
      for (std::size_t q = 0; q < mm; ++q)
        for (std::size_t p2 = 0; p2 < nn; ++p2)
          for (std::size_t q2 = 0; q2 < mm; ++q2) {
            T v(0.0);
            if (q == q2) v += xa(p, p2);
            if (p == p2) v += ax(q2, q);
            e(grass_index(p, q, mm), grass_index(p2, q2, mm)) = v;
          }
  }
};

/// (E . beta)_l = -beta_k E(k, l).
template <class T>
std::vector<T> act_on_covector(const Tensor<T>& e, std::span<const T> beta) {
  const std::size_t d = e.extent(0);
  std::vector<T> out(d, T(0.0));
  for (std::size_t l = 0; l < d; ++l) {
    for (std::size_t k = 0; k < d; ++k) out[l] -= beta[k] * e(k, l);
  }
  return out;
}

/// Freezes the structure at x; metric data carried as order-`order` jets.
inline LocalStructure<Jet> make_local_structure(const StructureSpec& spec, std::span<const double> x, int order) {
  if (static_cast<int>(x.size()) != spec.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "point has " + std::to_string(x.size()) + " coordinates, chart has " +
                                                   std::to_string(spec.dim()));
  }
  LocalStructure<Jet> ls{spec.kind(), spec.dim(), spec.m(), spec.n(), {}, {}};
  if (spec.kind() == StructureKind::conformal) {
    ls.g = spec.metric().evaluate(x, order);
    try {
      ls.g_inv = inverse(ls.g, 1e-12);
    } catch (const Error&) {
      throw Error(ErrorKind::degenerate_metric, "conformal metric is singular at the evaluation point");
    }
  }
  return ls;
}

inline LocalStructure<double> local_values(const LocalStructure<Jet>& ls) {
  LocalStructure<double> out{ls.kind, ls.dim, ls.m, ls.n, {}, {}};
  if (!ls.g.empty()) {
    out.g = values(ls.g);
    out.g_inv = values(ls.g_inv);
  }
  return out;
}

inline LocalStructure<double> make_local_structure_values(const StructureSpec& spec, std::span<const double> x) {
  return local_values(make_local_structure(spec, x, 0));
}

}  // namespace pke
