#pragma once

// Torsion-free connections on a chart, evaluated as Christoffel jets.
//
// Christoffel arrays are indexed gamma(k, i, j) = Γ^k_ij, with
// ∇_{∂i} ∂j = Γ^k_ij ∂k. Curvature arrays are indexed R(k, l, i, j) = R^k_{lij},
// R(∂i, ∂j) ∂l = R^k_{lij} ∂k.

#include <pke/error.hpp>
#include <pke/jet.hpp>
#include <pke/linalg.hpp>
#include <pke/poly_field.hpp>
#include <pke/structure.hpp>
#include <pke/tensor.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pke {

class Connection {
 public:
  enum class Kind { table, levi_civita, weyl, gauge };

  /// Γ ≡ 0 on an n-chart.
  static Connection flat(int n) {
    if (n < 1) throw Error(ErrorKind::invalid_argument, "connection dimension must be positive");
    const auto d = static_cast<std::size_t>(n);
    return from_table(Tensor<PolyField>({d, d, d}, PolyField(n)));
  }

  /// Explicit polynomial table gamma(k, i, j). Rejects Γ^k_ij != Γ^k_ji.
  static Connection from_table(Tensor<PolyField> gamma) {
    if (gamma.rank() != 3 || gamma.extent(0) == 0 || gamma.extent(1) != gamma.extent(0) ||
        gamma.extent(2) != gamma.extent(0)) {
      throw Error(ErrorKind::dimension_mismatch, "christoffel table must be n×n×n");
    }
    const int n = static_cast<int>(gamma.extent(0));
    for (auto& f : gamma.flat()) {
      if (f.is_zero()) f = PolyField(n);
      if (f.dim() != n) throw Error(ErrorKind::dimension_mismatch, "christoffel entry has wrong dimension");
    }
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (!(gamma(k, i, j) == gamma(k, j, i))) {
            throw Error(ErrorKind::torsion, "christoffel table has torsion: Γ^" + std::to_string(k) + "_" +
                                                std::to_string(i) + std::to_string(j) + " != Γ^" +
                                                std::to_string(k) + "_" + std::to_string(j) + std::to_string(i));
          }
        }
      }
    }
    return Connection(n, Table{std::move(gamma)});
  }

  static Connection levi_civita(MetricField g) {
    const int n = g.dim();
    return Connection(n, LeviCivita{std::move(g)});
  }

  /// Weyl connection with ∇g = β⊗g: Γ = LC(g) + W,
  /// W^k_ij = -½(β_i δ^k_j + β_j δ^k_i - g_ij β^k).
  static Connection weyl(MetricField g, std::vector<PolyField> beta) {
    const int n = g.dim();
    check_form(beta, n, "beta");
    return Connection(n, Weyl{std::move(g), std::move(beta)});
  }

  /// Γ̂^k_ij = Γ^k_ij + ({∂i, Υ} ∂j)^k.
  static Connection gauge(const Connection& base, std::vector<PolyField> upsilon, const StructureSpec& spec);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] Kind kind() const noexcept { return static_cast<Kind>(node_->index()); }
  [[nodiscard]] bool is_table() const noexcept { return kind() == Kind::table; }
  [[nodiscard]] const Tensor<PolyField>& table() const {
    if (!is_table()) throw Error(ErrorKind::invalid_argument, "connection is not a polynomial table");
    return std::get<Table>(*node_).gamma;
  }

  /// Christoffel jets in dim() variables at x.
  [[nodiscard]] Tensor<Jet> evaluate(std::span<const double> x, int order) const {
    if (static_cast<int>(x.size()) != dim_) {
      throw Error(ErrorKind::dimension_mismatch, "point has " + std::to_string(x.size()) +
                                                     " coordinates, connection expects " + std::to_string(dim_));
    }
    return std::visit([&](const auto& node) { return eval(node, x, order); }, *node_);
  }

 private:
  struct Table {
    Tensor<PolyField> gamma;
  };
  struct LeviCivita {
    MetricField g;
  };
  struct Weyl {
    MetricField g;
    std::vector<PolyField> beta;
  };
  struct Gauge {
    std::shared_ptr<const Connection> base;
    std::vector<PolyField> upsilon;
    std::shared_ptr<const StructureSpec> spec;
  };
  using Node = std::variant<Table, LeviCivita, Weyl, Gauge>;

  template <class N>
  Connection(int n, N node) : dim_(n), node_(std::make_shared<const Node>(std::move(node))) {}

  static void check_form(std::vector<PolyField>& form, int n, const char* what) {
    if (static_cast<int>(form.size()) != n) {
      throw Error(ErrorKind::dimension_mismatch, std::string(what) + " must have " + std::to_string(n) + " components");
    }
    for (auto& f : form) {
      if (f.is_zero()) f = PolyField(n);
      if (f.dim() != n) throw Error(ErrorKind::dimension_mismatch, std::string(what) + " component dimension");
    }
  }

  static Tensor<Jet> eval(const Table& t, std::span<const double> x, int order) {
    return t.gamma.map([&](const PolyField& f) { return jet_eval(f, x, order); });
  }

  static Tensor<Jet> levi_civita_jets(const MetricField& g, std::span<const double> x, int order,
                                      Tensor<Jet>* g_out = nullptr, Tensor<Jet>* g_inv_out = nullptr) {
    const auto n = static_cast<std::size_t>(g.dim());
    const Tensor<Jet> gj = g.evaluate(x, order + 1);
    Tensor<Jet> dg({n, n, n});  // dg(c, a, b) = ∂c g_ab
    for (std::size_t c = 0; c < n; ++c)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) dg(c, a, b) = gj(a, b).derivative(static_cast<int>(c));
    const Tensor<Jet> g0 = truncated(gj, order);
    Tensor<Jet> gi;
    try {
      gi = inverse(g0, 1e-12);
    } catch (const Error&) {
      throw Error(ErrorKind::degenerate_metric, "metric is singular at the evaluation point");
    }
    Tensor<Jet> out({n, n, n});
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
          Jet s(0.0);
          for (std::size_t l = 0; l < n; ++l) s += gi(k, l) * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j));
          out(k, i, j) = s * 0.5;
          out(k, j, i) = out(k, i, j);
        }
    if (g_out) *g_out = g0;
    if (g_inv_out) *g_inv_out = gi;
    return out;
  }

  static Tensor<Jet> eval(const LeviCivita& lc, std::span<const double> x, int order) {
    return levi_civita_jets(lc.g, x, order);
  }

  static Tensor<Jet> eval(const Weyl& w, std::span<const double> x, int order) {
    Tensor<Jet> g0, gi;
    Tensor<Jet> out = levi_civita_jets(w.g, x, order, &g0, &gi);
    const std::size_t n = out.extent(0);
    std::vector<Jet> beta(n), sharp(n, Jet(0.0));
    for (std::size_t i = 0; i < n; ++i) beta[i] = jet_eval(w.beta[i], x, order);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l) sharp[k] += gi(k, l) * beta[l];
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          Jet w_kij = g0(i, j) * sharp[k];
          if (k == j) w_kij -= beta[i];
          if (k == i) w_kij -= beta[j];
          out(k, i, j) += w_kij * 0.5;
        }
    return out;
  }

  static Tensor<Jet> eval(const Gauge& gt, std::span<const double> x, int order) {
    Tensor<Jet> out = gt.base->evaluate(x, order);
    const auto ls = make_local_structure(*gt.spec, x, order);
    const std::size_t n = out.extent(0);
    std::vector<Jet> ups(n);
    for (std::size_t a = 0; a < n; ++a) ups[a] = jet_eval(gt.upsilon[a], x, order);
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor<Jet> e = ls.bracket_basis(i, ups);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) out(k, i, j) += e(k, j);
    }
    return out;
  }

  int dim_ = 0;
  std::shared_ptr<const Node> node_;
};

inline Tensor<Jet> christoffel_eval(const Connection& c, std::span<const double> x, int order) {
  return c.evaluate(x, order);
}

/// T^k_ij = Γ^k_ij - Γ^k_ji at x.
inline Tensor<double> torsion(const Connection& c, std::span<const double> x) {
  const Tensor<double> g = values(c.evaluate(x, 0));
  const std::size_t n = g.extent(0);
  Tensor<double> t({n, n, n});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) t(k, i, j) = g(k, i, j) - g(k, j, i);
  return t;
}

inline void require_torsion_free(const Connection& c, std::span<const double> x, double tol = 1e-12) {
  const double t = max_abs(torsion(c, x));
  if (!(t <= tol)) {
    throw Error(ErrorKind::torsion, "connection has torsion " + std::to_string(t) + " at the evaluation point");
  }
}

inline Connection Connection::gauge(const Connection& base, std::vector<PolyField> upsilon, const StructureSpec& spec) {
  const int n = base.dim();
  if (spec.dim() != n) {
    throw Error(ErrorKind::dimension_mismatch, "gauge: structure chart dimension " + std::to_string(spec.dim()) +
                                                   " != connection dimension " + std::to_string(n));
  }
  check_form(upsilon, n, "upsilon");
  const bool zero = std::all_of(upsilon.begin(), upsilon.end(), [](const PolyField& f) { return f.is_zero(); });
  if (zero) return base;

  // Projective and Grassmannian brackets have constant coefficients, so the
  // gauge of a polynomial table is again a polynomial table.
  if (base.is_table() && spec.kind() != StructureKind::conformal) {
    const auto d = static_cast<std::size_t>(n);
    const std::vector<double> origin(d, 0.0);
    const auto ls = make_local_structure_values(spec, origin);
    Tensor<PolyField> gamma = base.table();
    std::vector<double> alpha(d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
      std::fill(alpha.begin(), alpha.end(), 0.0);
      alpha[a] = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const auto e = ls.bracket_basis(i, alpha);
        for (std::size_t k = 0; k < d; ++k)
          for (std::size_t j = 0; j < d; ++j) {
            if (e(k, j) != 0.0) gamma(k, i, j) += upsilon[a] * e(k, j);
          }
      }
    }
    return from_table(std::move(gamma));
  }

  Gauge node;
  node.base = std::make_shared<const Connection>(base);
  node.upsilon = std::move(upsilon);
  node.spec = std::make_shared<const StructureSpec>(spec);
  Connection out(n, std::move(node));
  const std::vector<double> origin(static_cast<std::size_t>(n), 0.0);
  require_torsion_free(out, origin);
  return out;
}

inline Connection gauge_transform(const Connection& c, std::vector<PolyField> upsilon, const StructureSpec& spec) {
  return Connection::gauge(c, std::move(upsilon), spec);
}

inline Connection levi_civita(MetricField g) { return Connection::levi_civita(std::move(g)); }

inline Connection weyl_conformal(MetricField g, std::vector<PolyField> beta) {
  if (g.dim() < 3) throw Error(ErrorKind::unsupported_dimension, "conformal requires n >= 3");
  return Connection::weyl(std::move(g), std::move(beta));
}

/// The flat model on the m*n Grassmannian chart.
inline Connection grassmannian_flat(int m, int n) {
  check_grass_dims(m, n);
  return Connection::flat(m * n);
}

/// R(k, l, i, j) = ∂iΓ^k_jl - ∂jΓ^k_il + Γ^k_im Γ^m_jl - Γ^k_jm Γ^m_il from
/// Christoffel jets of order o + 1; the result has order o.
inline Tensor<Jet> curvature_from_christoffel(const Tensor<Jet>& g1) {
  const std::size_t n = g1.extent(0);
  const Jet& probe = g1(0, 0, 0);
  if (!probe.has_layout() || probe.order() < 1) {
    throw Error(ErrorKind::invalid_argument, "curvature needs Christoffel jets of order >= 1");
  }
  const int order = probe.order() - 1;
  const Tensor<Jet> g = truncated(g1, order);
  Tensor<Jet> dg({n, n, n, n});  // dg(v, k, i, j) = ∂v Γ^k_ij
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dg(v, k, i, j) = g1(k, i, j).derivative(static_cast<int>(v));
  const Jet zero(JetLayout::get(probe.dim(), order));
  Tensor<Jet> r({n, n, n, n}, zero);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          Jet s = dg(i, k, j, l) - dg(j, k, i, l);
          for (std::size_t m = 0; m < n; ++m) s += g(k, i, m) * g(m, j, l) - g(k, j, m) * g(m, i, l);
          r(k, l, i, j) = s;
          r(k, l, j, i) = -s;
        }
  return r;
}

inline Tensor<Jet> curvature(const Connection& c, std::span<const double> x, int order) {
  return curvature_from_christoffel(c.evaluate(x, order + 1));
}

enum class RicciConvention {
  first_slot,   // Ric(X, Y) = tr(Z ↦ R(Z, X) Y)
  second_slot,  // tr(Z ↦ R(X, Z) Y) = -Ric; a deliberately wrong convention
};

/// Ric_ij = R^k_{jki} (or R^k_{jik} for the second-slot convention).
inline Tensor<Jet> ricci_from_curvature(const Tensor<Jet>& r, RicciConvention conv = RicciConvention::first_slot) {
  const std::size_t n = r.extent(0);
  Tensor<Jet> ric({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Jet s = conv == RicciConvention::first_slot ? r(0, j, 0, i) : r(0, j, i, 0);
      for (std::size_t k = 1; k < n; ++k) s += conv == RicciConvention::first_slot ? r(k, j, k, i) : r(k, j, i, k);
      ric(i, j) = s;
    }
  return ric;
}

inline Tensor<Jet> ricci(const Connection& c, std::span<const double> x, int order,
                         RicciConvention conv = RicciConvention::first_slot) {
  return ricci_from_curvature(curvature(c, x, order), conv);
}

/// max |∇_k g_ij - β_k g_ij| at x, the Weyl compatibility defect.
inline double weyl_defect(const Connection& c, const MetricField& g, std::span<const PolyField> beta,
                          std::span<const double> x) {
  const Tensor<Jet> gj = g.evaluate(x, 1);
  const Tensor<double> gam = values(c.evaluate(x, 0));
  const std::size_t n = gam.extent(0);
  if (beta.size() != n) throw Error(ErrorKind::dimension_mismatch, "beta size");
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double bk = beta[k].is_zero() ? 0.0 : beta[k](x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double v = gj(i, j).derivative(static_cast<int>(k)).value();
        for (std::size_t l = 0; l < n; ++l) v -= gam(l, k, i) * gj(l, j).value() + gam(l, k, j) * gj(i, l).value();
        worst = std::max(worst, std::abs(v - bk * gj(i, j).value()));
      }
  }
  return worst;
}

/// Recovers β̂ from ∇g = β̂⊗g via the trace β̂_k = (1/n) g^{ij} ∇_k g_ij, and
/// reports max |∇g - β̂⊗g| as `defect`.
struct ExtractedWeylForm {
  std::vector<double> beta;
  double defect = 0.0;
};

inline ExtractedWeylForm extract_weyl_form(const Connection& c, const MetricField& g, std::span<const double> x) {
  const Tensor<Jet> gj = g.evaluate(x, 1);
  const Tensor<double> g0 = values(gj);
  const Tensor<double> gi = inverse(g0);
  const Tensor<double> gam = values(c.evaluate(x, 0));
  const std::size_t n = gam.extent(0);
  Tensor<double> ng({n, n, n});
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double v = gj(i, j).derivative(static_cast<int>(k)).value();
        for (std::size_t l = 0; l < n; ++l) v -= gam(l, k, i) * g0(l, j) + gam(l, k, j) * g0(i, l);
        ng(k, i, j) = v;
      }
  ExtractedWeylForm out;
  out.beta.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.beta[k] += gi(i, j) * ng(k, i, j);
    out.beta[k] /= static_cast<double>(n);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out.defect = std::max(out.defect, std::abs(ng(k, i, j) - out.beta[k] * g0(i, j)));
  return out;
}

}  // namespace pke
