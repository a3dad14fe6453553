#pragma once

// Cotangent-bundle objects in canonical coordinates (x^i, xi_i).
//
// Normalizations: a⊙b = ½(a⊗b + b⊗a) and a∧b = ½(a⊗b - b⊗a). Then
//   h0 = (dxi_i - Γ^k_ij xi_k dx^j) ⊙ dx^i
//   h  = h0 - Sym P + q                (P, q pulled back from the base)
//   Ω  = -dτ + s·Alt P,  τ = xi_i dx^i
// so h0(∂x^i, ∂xi_j) = Ω(∂x^i, ∂xi_j) = ½δ and I = h^{-1} Ωᵀ squares to Id.

#include <pke/base_geometry.hpp>
#include <pke/connection.hpp>
#include <pke/error.hpp>
#include <pke/jet.hpp>
#include <pke/linalg.hpp>
#include <pke/rho.hpp>
#include <pke/structure.hpp>
#include <pke/tensor.hpp>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace pke {

struct CotangentPoint {
  std::vector<double> x;
  std::vector<double> xi;

  [[nodiscard]] std::size_t dim() const noexcept { return x.size(); }

  /// (x, xi) as one 2n-vector.
  [[nodiscard]] std::vector<double> coordinates() const {
    std::vector<double> out = x;
    out.insert(out.end(), xi.begin(), xi.end());
    return out;
  }
};

inline void check_point(const StructureSpec& spec, const CotangentPoint& p) {
  const auto n = static_cast<std::size_t>(spec.dim());
  if (p.x.size() != n || p.xi.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "cotangent point must have " + std::to_string(n) +
                                                   " base and fiber coordinates");
  }
  for (double v : p.x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite base coordinate");
  }
  for (double v : p.xi) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "non-finite fiber coordinate");
  }
}

/// Components of τ = xi_i dx^i on the 2n coordinate directions.
inline std::vector<double> tautological(const CotangentPoint& p) {
  std::vector<double> out(2 * p.xi.size(), 0.0);
  std::copy(p.xi.begin(), p.xi.end(), out.begin());
  return out;
}

/// Refined form τᴳ: tau(d, a, b) = (τᴳ(∂_d))_{ab}, an m×m matrix per coordinate
/// direction d of T*M. On ∂x^{pq}: (alpha E_pq)_{ab} = alpha_{ap} δ_{bq}.
inline Tensor<double> tau_refined(const StructureSpec& spec, const CotangentPoint& p) {
  if (spec.kind() != StructureKind::grassmannian) {
    throw Error(ErrorKind::invalid_argument, "tau_refined is defined for grassmannian structures only");
  }
  check_point(spec, p);
  const auto m = static_cast<std::size_t>(spec.m());
  const auto n = static_cast<std::size_t>(spec.n());
  Tensor<double> t({2 * m * n, m, m}, 0.0);
  for (std::size_t pp = 0; pp < n; ++pp)
    for (std::size_t q = 0; q < m; ++q)
      for (std::size_t a = 0; a < m; ++a) t(grass_index(pp, q, m), a, q) = p.xi[grass_index(pp, a, m)];
  return t;
}

/// Closed-form q on the base block.
template <class T>
Tensor<T> q_closed_form(const LocalStructure<T>& ls, std::span<const T> xi) {
  const auto n = static_cast<std::size_t>(ls.dim);
  Tensor<T> q({n, n}, T(0.0));
  switch (ls.kind) {
    case StructureKind::projective:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q(i, j) = -(xi[i] * xi[j]);
      break;
    case StructureKind::conformal: {
      T norm(0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) norm += ls.g_inv(i, j) * xi[i] * xi[j];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q(i, j) = ls.g(i, j) * norm * 0.5 - xi[i] * xi[j];
      break;
    }
    case StructureKind::grassmannian: {
      // q((p0 q0), (p1 q1)) = -alpha_{q1 p0} alpha_{q0 p1}.
      const auto m = static_cast<std::size_t>(ls.m);
      const auto nf = static_cast<std::size_t>(ls.n);
      for (std::size_t p0 = 0; p0 < nf; ++p0)
        for (std::size_t q0 = 0; q0 < m; ++q0)
          for (std::size_t p1 = 0; p1 < nf; ++p1)
            for (std::size_t q1 = 0; q1 < m; ++q1)
              q(grass_index(p0, q0, m), grass_index(p1, q1, m)) =
                  -(xi[grass_index(p0, q1, m)] * xi[grass_index(p1, q0, m)]);
      break;
    }
  }
  return q;
}

/// q(X, Y) = ½ ({X, alpha}·alpha)(Y) = -½ alpha({X, alpha} Y).
template <class T>
Tensor<T> q_generic(const LocalStructure<T>& ls, std::span<const T> xi, double half = 0.5) {
  const auto n = static_cast<std::size_t>(ls.dim);
  Tensor<T> q({n, n}, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = ls.bracket_basis(i, xi);
    const auto acted = act_on_covector(e, xi);
    for (std::size_t j = 0; j < n; ++j) q(i, j) = acted[j] * half;
  }
  return q;
}

/// q as a 2n×2n matrix (zero off the base block). Both routes are evaluated
/// and must agree; a disagreement is a convention error.
inline Tensor<double> q_tensor(const StructureSpec& spec, const CotangentPoint& p, double tol = 1e-12) {
  check_point(spec, p);
  const auto ls = make_local_structure_values(spec, p.x);
  const auto qc = q_closed_form<double>(ls, p.xi);
  const auto qg = q_generic<double>(ls, p.xi);
  const double scale = 1.0 + max_abs(qc);
  const double diff = max_abs_diff(qc, qg);
  if (!(diff <= tol * scale)) {
    throw Error(ErrorKind::convention,
                "generic and closed-form q disagree by " + std::to_string(diff) + " for " + spec.describe());
  }
  const auto n = static_cast<std::size_t>(spec.dim());
  Tensor<double> out({2 * n, 2 * n}, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = qc(i, j);
  return out;
}

enum class QRoute { closed_form, generic };

/// Knobs for building h and Ω. Non-default values exist for negative controls.
struct ConstructionOptions {
  double q_factor = 1.0;      // multiplies q in h
  double q_half = 0.5;        // the ½ in q(X, Y) = ½({X, α}·α)(Y), generic route only
  double sym_rho_sign = 1.0;  // h = h0 - sym_rho_sign·Sym P + q
  int omega_sign = 1;         // Ω = -dτ + omega_sign·Alt P
  RicciConvention ricci = RicciConvention::first_slot;
  RhoMethod rho = RhoMethod::closed_form;
  QRoute q_route = QRoute::closed_form;
};

/// Everything at one cotangent point, as jets in the 2n variables (x, xi).
struct CotangentFields {
  Tensor<Jet> gamma;  // Γ^k_ij, base variables only, embedded in 2n
  Tensor<Jet> rho;    // P_ij, embedded in 2n
  Tensor<Jet> q;      // base block n×n
  Tensor<Jet> h0;     // 2n×2n
  Tensor<Jet> h;      // 2n×2n
  Tensor<Jet> omega;  // 2n×2n
};

inline LocalStructure<Jet> embed_local(const LocalStructure<Jet>& ls, const JetLayout* target) {
  LocalStructure<Jet> out{ls.kind, ls.dim, ls.m, ls.n, {}, {}};
  if (!ls.g.empty()) {
    out.g = embedded(ls.g, target);
    out.g_inv = embedded(ls.g_inv, target);
  }
  return out;
}

inline CotangentFields evaluate_cotangent(const StructureSpec& spec, const Connection& c, const CotangentPoint& p,
                                          int order, const ConstructionOptions& opts = {}) {
  check_point(spec, p);
  if (c.dim() != spec.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "connection dimension does not match the structure");
  }
  if (opts.omega_sign != 1 && opts.omega_sign != -1) {
    throw Error(ErrorKind::invalid_argument, "omega sign must be +1 or -1");
  }
  const auto n = static_cast<std::size_t>(spec.dim());
  const auto* lay = JetLayout::get(static_cast<int>(2 * n), order);

  const Tensor<Jet> gamma1 = c.evaluate(p.x, order + 1);
  const Tensor<Jet> ric = ricci_from_curvature(curvature_from_christoffel(gamma1), opts.ricci);
  const auto ls = make_local_structure(spec, p.x, order);
  const Tensor<Jet> rho_n = opts.rho == RhoMethod::closed_form ? rho_closed_form(ls, ric) : rho_generic(ls, ric);

  CotangentFields f;
  f.gamma = embedded(truncated(gamma1, order), lay);
  f.rho = embedded(rho_n, lay);
  std::vector<Jet> xi(n);
  for (std::size_t k = 0; k < n; ++k) xi[k] = Jet::variable(lay, static_cast<int>(n + k), p.xi[k]);
  const auto ls2 = embed_local(ls, lay);
  f.q = opts.q_route == QRoute::closed_form ? q_closed_form<Jet>(ls2, xi) : q_generic<Jet>(ls2, xi, opts.q_half);

  const Jet zero(lay);
  const Jet half = Jet::constant(lay, 0.5);
  f.h0 = Tensor<Jet>({2 * n, 2 * n}, zero);
  f.omega = Tensor<Jet>({2 * n, 2 * n}, zero);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Jet s = zero;
      for (std::size_t k = 0; k < n; ++k) s -= f.gamma(k, i, j) * xi[k];
      f.h0(i, j) = s;
      f.omega(i, j) = (f.rho(i, j) - f.rho(j, i)) * (0.5 * opts.omega_sign);
    }
    f.h0(i, n + i) = half;
    f.h0(n + i, i) = half;
    f.omega(i, n + i) = half;
    f.omega(n + i, i) = -half;
  }
  f.h = f.h0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      f.h(i, j) += f.q(i, j) * opts.q_factor - (f.rho(i, j) + f.rho(j, i)) * (0.5 * opts.sym_rho_sign);
    }
  return f;
}

inline Tensor<Jet> patterson_walker(const Connection& c, const CotangentPoint& p, int order) {
  const auto n = static_cast<std::size_t>(c.dim());
  if (p.x.size() != n || p.xi.size() != n) throw Error(ErrorKind::dimension_mismatch, "cotangent point size");
  const auto* lay = JetLayout::get(static_cast<int>(2 * n), order);
  const auto gamma = embedded(c.evaluate(p.x, order), lay);
  const Jet zero(lay);
  Tensor<Jet> h({2 * n, 2 * n}, zero);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Jet s = zero;
      for (std::size_t k = 0; k < n; ++k) s -= gamma(k, i, j) * Jet::variable(lay, static_cast<int>(n + k), p.xi[k]);
      h(i, j) = s;
    }
    h(i, n + i) = Jet::constant(lay, 0.5);
    h(n + i, i) = Jet::constant(lay, 0.5);
  }
  return h;
}

inline Tensor<Jet> modified_metric(const StructureSpec& spec, const Connection& c, const CotangentPoint& p, int order,
                                   const ConstructionOptions& opts = {}) {
  return evaluate_cotangent(spec, c, p, order, opts).h;
}

inline Tensor<Jet> symplectic_form(const StructureSpec& spec, const Connection& c, const CotangentPoint& p,
                                   int order, int sign = 1) {
  ConstructionOptions opts;
  opts.omega_sign = sign;
  return evaluate_cotangent(spec, c, p, order, opts).omega;
}

/// I with h(I X, Y) = Ω(X, Y), i.e. I = h^{-1} Ωᵀ.
inline Tensor<double> para_complex(const Tensor<double>& h, const Tensor<double>& omega) {
  try {
    return solve(h, transpose(omega), 1e-14);
  } catch (const Error&) {
    throw Error(ErrorKind::degenerate_metric, "metric is degenerate; para-complex structure undefined");
  }
}

}  // namespace pke
