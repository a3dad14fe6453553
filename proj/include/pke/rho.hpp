#pragma once

// Rho (Schouten) tensor of a Weyl connection, two ways:
//   generic      solve contraction(∂P) = Ric as an n²×n² linear system
//   closed form  per-structure projection formulas
// ∂P(X, Y) = {X, P(Y)} - {Y, P(X)} with P(Y) = P(Y, ·).

#include <pke/base_geometry.hpp>
#include <pke/connection.hpp>
#include <pke/error.hpp>
#include <pke/linalg.hpp>
#include <pke/structure.hpp>
#include <pke/tensor.hpp>

#include <span>
#include <string>
#include <vector>

namespace pke {

/// D(k, l, i, j) = (∂P(e_i, e_j) e_l)^k.
template <class T>
Tensor<T> partial_rho(const LocalStructure<T>& ls, const Tensor<T>& p) {
  const auto n = static_cast<std::size_t>(ls.dim);
  if (p.rank() != 2 || p.extent(0) != n || p.extent(1) != n) {
    throw Error(ErrorKind::dimension_mismatch, "partial_rho: P must be n×n");
  }
  std::vector<Tensor<T>> br;  // br[i*n + j] = {e_i, P(e_j)}
  br.reserve(n * n);
  std::vector<T> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t a = 0; a < n; ++a) row[a] = p(j, a);
      br.push_back(ls.bracket_basis(i, row));
    }
  }
  Tensor<T> d({n, n, n, n}, T(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& a = br[i * n + j];
      const auto& b = br[j * n + i];
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) d(k, l, i, j) = a(k, l) - b(k, l);
    }
  return d;
}

/// C_ij = T^k_{jki}, the same trace as the Ricci convention.
template <class T>
Tensor<T> ricci_type_contraction(const Tensor<T>& t) {
  if (t.rank() != 4) throw Error(ErrorKind::dimension_mismatch, "contraction needs a 4-index array");
  const std::size_t n = t.extent(0);
  Tensor<T> c({n, n}, T(0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) c(i, j) += t(k, j, k, i);
  return c;
}

/// Matrix of P ↦ contraction(∂P) on the basis bilinears, rows/cols flattened i*n + j.
template <class T>
Tensor<T> rho_system(const LocalStructure<T>& ls) {
  const auto n = static_cast<std::size_t>(ls.dim);
  const std::size_t nn = n * n;
  Tensor<T> a({nn, nn}, T(0.0));
  for (std::size_t b = 0; b < nn; ++b) {
    Tensor<T> basis({n, n}, T(0.0));
    basis.flat()[b] = T(1.0);
    const auto c = ricci_type_contraction(partial_rho(ls, basis));
    for (std::size_t r = 0; r < nn; ++r) a(r, b) = c.flat()[r];
  }
  return a;
}

template <class T>
Tensor<T> rho_generic(const LocalStructure<T>& ls, const Tensor<T>& ric) {
  const auto n = static_cast<std::size_t>(ls.dim);
  const std::size_t nn = n * n;
  Tensor<T> rhs({nn, std::size_t{1}});
  for (std::size_t r = 0; r < nn; ++r) rhs(r, 0) = ric.flat()[r];
  Tensor<T> sol;
  try {
    sol = solve(rho_system(ls), rhs, 1e-12);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::singular) throw;
    throw Error(ErrorKind::unsupported_dimension,
                "Rho normalization system is singular for chart dimension " + std::to_string(n));
  }
  Tensor<T> p({n, n});
  for (std::size_t r = 0; r < nn; ++r) p.flat()[r] = sol(r, 0);
  return p;
}

template <class T>
Tensor<T> rho_closed_form(const LocalStructure<T>& ls, const Tensor<T>& ric) {
  const auto n = static_cast<std::size_t>(ls.dim);
  const double dn = static_cast<double>(n);
  switch (ls.kind) {
    case StructureKind::projective: {
      if (n < 2) throw Error(ErrorKind::unsupported_dimension, "projective Rho requires n >= 2 (divides by n - 1)");
      const auto sa = split_sym_alt(ric);
      Tensor<T> p({n, n});
      for (std::size_t i = 0; i < p.size(); ++i) {
        p.flat()[i] = sa.sym.flat()[i] * (1.0 / (dn - 1.0)) + sa.alt.flat()[i] * (1.0 / (dn + 1.0));
      }
      return p;
    }
    case StructureKind::conformal: {
      if (n < 3) throw Error(ErrorKind::unsupported_dimension, "conformal Rho requires n >= 3 (divides by n - 2)");
      const auto sa = split_sym_alt(ric);
      const T tr = trace_with(ls.g_inv, ric);
      Tensor<T> p({n, n});
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const T sym0 = sa.sym(i, j) - ls.g(i, j) * tr * (1.0 / dn);
          p(i, j) = sym0 * (1.0 / (dn - 2.0)) + sa.alt(i, j) * (1.0 / dn) +
                    ls.g(i, j) * tr * (1.0 / (dn * (2.0 * dn - 2.0)));
        }
      return p;
    }
    case StructureKind::grassmannian: {
      const double s = static_cast<double>(ls.m + ls.n);
      if (ls.m == 1 && ls.n == 1) {
        throw Error(ErrorKind::unsupported_dimension, "grassmannian Rho requires (m, n) != (1, 1) (divides by m + n - 2)");
      }
      const auto parts = grassmann_projections(GrassBilinear<T>(ls.m, ls.n, ric));
      const auto p = parts.ss * (1.0 / (s - 2.0)) + parts.aa * (1.0 / (s + 2.0)) + (parts.sa + parts.as) * (1.0 / s);
      return p.matrix();
    }
  }
  throw Error(ErrorKind::invalid_argument, "unknown structure kind");
}

enum class RhoMethod { closed_form, generic };

/// P at x as jets of `order` (computes Ric from curvature, then solves).
inline Tensor<Jet> rho(const StructureSpec& spec, const Connection& c, std::span<const double> x, int order,
                       RhoMethod method = RhoMethod::closed_form,
                       RicciConvention conv = RicciConvention::first_slot) {
  if (spec.dim() != c.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "structure chart dimension does not match the connection");
  }
  const auto ric = ricci(c, x, order, conv);
  const auto ls = make_local_structure(spec, x, order);
  return method == RhoMethod::closed_form ? rho_closed_form(ls, ric) : rho_generic(ls, ric);
}

}  // namespace pke
