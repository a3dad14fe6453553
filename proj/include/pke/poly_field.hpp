#pragma once

#include <pke/error.hpp>
#include <pke/jet.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pke {

struct Monomial {
  std::vector<int> exponents;
  double coefficient = 0.0;

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Multivariate polynomial scalar field in chart coordinates.
///
/// Always kept canonical: monomials sorted by exponent tuple, no duplicates,
/// no zero coefficients. Equality is therefore structural.
class PolyField {
 public:
  PolyField() = default;
  explicit PolyField(int dim) : dim_(dim) { check_dim(); }

  PolyField(int dim, std::vector<Monomial> monomials) : dim_(dim) {
    check_dim();
    std::map<std::vector<int>, double> acc;
    for (auto& m : monomials) {
      if (static_cast<int>(m.exponents.size()) != dim) {
        throw Error(ErrorKind::dimension_mismatch, "monomial exponent tuple has length " +
                                                       std::to_string(m.exponents.size()) + ", expected " +
                                                       std::to_string(dim));
      }
      for (int e : m.exponents) {
        if (e < 0) throw Error(ErrorKind::invalid_argument, "negative exponent in monomial");
      }
      if (!std::isfinite(m.coefficient)) throw Error(ErrorKind::invalid_argument, "non-finite coefficient");
      acc[m.exponents] += m.coefficient;
    }
    for (auto& [e, c] : acc) {
      if (c != 0.0) monomials_.push_back({e, c});
    }
  }

  static PolyField constant(int dim, double c) {
    return PolyField(dim, {{std::vector<int>(static_cast<std::size_t>(dim), 0), c}});
  }

  static PolyField coordinate(int dim, int var) {
    if (var < 0 || var >= dim) throw Error(ErrorKind::dimension_mismatch, "coordinate index out of range");
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    e[static_cast<std::size_t>(var)] = 1;
    return PolyField(dim, {{e, 1.0}});
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const std::vector<Monomial>& monomials() const noexcept { return monomials_; }
  [[nodiscard]] bool is_zero() const noexcept { return monomials_.empty(); }

  [[nodiscard]] int degree() const {
    int d = 0;
    for (const auto& m : monomials_) {
      int s = 0;
      for (int e : m.exponents) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  [[nodiscard]] double operator()(std::span<const double> x) const {
    require_point(x.size());
    double sum = 0.0;
    for (const auto& m : monomials_) {
      double t = m.coefficient;
      for (std::size_t v = 0; v < x.size(); ++v) {
        for (int k = 0; k < m.exponents[v]; ++k) t *= x[v];
      }
      sum += t;
    }
    return sum;
  }

  /// Evaluates the polynomial on arbitrary ring elements (typically jets of
  /// the coordinate functions).
  template <class T>
  [[nodiscard]] T evaluate(std::span<const T> vars) const {
    require_point(vars.size());
    T sum{};
    if (monomials_.empty()) return sum;
    std::vector<std::vector<T>> powers(vars.size());
    for (std::size_t v = 0; v < vars.size(); ++v) {
      int top = 0;
      for (const auto& m : monomials_) top = std::max(top, m.exponents[v]);
      powers[v].reserve(static_cast<std::size_t>(top));
      if (top >= 1) powers[v].push_back(vars[v]);
      for (int k = 2; k <= top; ++k) powers[v].push_back(powers[v].back() * vars[v]);
    }
    for (const auto& m : monomials_) {
      T term(m.coefficient);
      for (std::size_t v = 0; v < vars.size(); ++v) {
        if (m.exponents[v] > 0) term = term * powers[v][static_cast<std::size_t>(m.exponents[v] - 1)];
      }
      sum += term;
    }
    return sum;
  }

  [[nodiscard]] PolyField derivative(int var) const {
    if (var < 0 || var >= dim_) throw Error(ErrorKind::dimension_mismatch, "derivative index out of range");
    std::vector<Monomial> out;
    for (const auto& m : monomials_) {
      const int e = m.exponents[static_cast<std::size_t>(var)];
      if (e == 0) continue;
      Monomial d = m;
      d.exponents[static_cast<std::size_t>(var)] -= 1;
      d.coefficient *= e;
      out.push_back(std::move(d));
    }
    return PolyField(dim_, std::move(out));
  }

  PolyField& operator+=(const PolyField& o) {
    *this = *this + o;
    return *this;
  }

  friend PolyField operator+(const PolyField& a, const PolyField& b) {
    const int d = common_dim(a, b);
    std::vector<Monomial> all = a.monomials_;
    all.insert(all.end(), b.monomials_.begin(), b.monomials_.end());
    return PolyField(d, std::move(all));
  }

  friend PolyField operator-(const PolyField& a) { return a * -1.0; }
  friend PolyField operator-(const PolyField& a, const PolyField& b) { return a + (-b); }

  friend PolyField operator*(const PolyField& a, double s) {
    std::vector<Monomial> out = a.monomials_;
    for (auto& m : out) m.coefficient *= s;
    return PolyField(a.dim_, std::move(out));
  }
  friend PolyField operator*(double s, const PolyField& a) { return a * s; }

  friend PolyField operator*(const PolyField& a, const PolyField& b) {
    const int d = common_dim(a, b);
    std::vector<Monomial> out;
    out.reserve(a.monomials_.size() * b.monomials_.size());
    for (const auto& x : a.monomials_) {
      for (const auto& y : b.monomials_) {
        Monomial m{std::vector<int>(static_cast<std::size_t>(d)), x.coefficient * y.coefficient};
        for (std::size_t v = 0; v < static_cast<std::size_t>(d); ++v) m.exponents[v] = x.exponents[v] + y.exponents[v];
        out.push_back(std::move(m));
      }
    }
    return PolyField(d, std::move(out));
  }

  friend bool operator==(const PolyField& a, const PolyField& b) {
    if (a.is_zero() && b.is_zero()) return true;
    return a.dim_ == b.dim_ && a.monomials_ == b.monomials_;
  }

 private:
  void check_dim() const {
    if (dim_ < 1) throw Error(ErrorKind::invalid_argument, "polynomial field dimension must be positive");
  }

  void require_point(std::size_t n) const {
    if (static_cast<int>(n) != dim_) {
      throw Error(ErrorKind::dimension_mismatch, "point has " + std::to_string(n) +
                                                     " coordinates, field expects " + std::to_string(dim_));
    }
  }

  // The default-constructed field is the zero of every dimension.
  static int common_dim(const PolyField& a, const PolyField& b) {
    if (a.dim_ == 0) return b.dim_ == 0 ? 0 : b.dim_;
    if (b.dim_ == 0 || a.dim_ == b.dim_) return a.dim_;
    throw Error(ErrorKind::dimension_mismatch, "polynomial fields of different dimensions");
  }

  int dim_ = 0;
  std::vector<Monomial> monomials_;
};

/// Identity coordinate jets x_v + t_v at `x`.
inline std::vector<Jet> coordinate_jets(std::span<const double> x, int order) {
  const auto* layout = JetLayout::get(static_cast<int>(x.size()), order);
  std::vector<Jet> vars;
  vars.reserve(x.size());
  for (std::size_t v = 0; v < x.size(); ++v) vars.push_back(Jet::variable(layout, static_cast<int>(v), x[v]));
  return vars;
}

/// Taylor jet of `field` at `x`: coefficient at κ equals ∂^κ field(x) / κ!.
inline Jet jet_eval(const PolyField& field, std::span<const double> x, int order) {
  if (static_cast<int>(x.size()) != field.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "jet_eval: point has " + std::to_string(x.size()) +
                                                   " coordinates, field expects " + std::to_string(field.dim()));
  }
  const auto vars = coordinate_jets(x, order);
  Jet out = field.evaluate<Jet>(vars);
  if (!out.has_layout()) out = Jet::constant(vars.front().layout(), out.value());
  return out;
}

}  // namespace pke
