#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet of order k in d variables stores, for every multi-index κ with
// |κ| <= k, the normalized coefficient ∂^κ f(x0) / κ!.  With that
// normalization multiplication is the plain degree-truncated convolution.
// Coefficients are stored densely in graded order (all degree-0 entries, then
// degree 1, ...), so a lower-order layout is a prefix of a higher-order one.

#include <pke/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pke {

inline constexpr int max_jet_order = 4;
inline constexpr int max_jet_dim = 16;

class JetLayout {
 public:
  struct ProductTerm {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Shared, immutable layout for (dim, order). Layouts live for the whole
  /// program, so jets keep plain pointers to them.
  static const JetLayout* get(int dim, int order) {
    if (dim < 1 || dim > max_jet_dim) {
      throw Error(ErrorKind::invalid_argument, "jet dimension out of range: " + std::to_string(dim));
    }
    if (order < 0 || order > max_jet_order) {
      throw Error(ErrorKind::invalid_argument, "jet order out of range: " + std::to_string(order));
    }
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<JetLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{dim, order}];
    if (!slot) slot.reset(new JetLayout(dim, order));
    return slot.get();
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] std::size_t size() const noexcept { return degrees_.size(); }

  [[nodiscard]] std::span<const std::uint8_t> exponents(std::size_t index) const {
    return {exponents_.data() + index * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  [[nodiscard]] int degree(std::size_t index) const { return degrees_[index]; }

  /// Number of coefficients of total degree <= `degree`.
  [[nodiscard]] std::size_t size_up_to(int degree) const {
    if (degree < 0) return 0;
    return prefix_[static_cast<std::size_t>(std::min(degree, order_))];
  }

  /// Position of a multi-index, or npos when its degree exceeds the order.
  [[nodiscard]] std::size_t index_of(std::span<const int> multi_index) const {
    if (static_cast<int>(multi_index.size()) != dim_) {
      throw Error(ErrorKind::dimension_mismatch, "multi-index length does not match jet dimension");
    }
    int deg = 0;
    for (int e : multi_index) {
      if (e < 0) throw Error(ErrorKind::invalid_argument, "negative multi-index entry");
      deg += e;
    }
    if (deg > order_) return npos;
    std::uint64_t key = 0;
    for (int v = dim_ - 1; v >= 0; --v) key = key * static_cast<std::uint64_t>(order_ + 1) + static_cast<std::uint64_t>(multi_index[static_cast<std::size_t>(v)]);
    return lookup_.at(key);
  }

  /// Index of κ + e_var, npos if that exceeds the order.
  [[nodiscard]] std::size_t raise(std::size_t index, int var) const {
    return raise_[index * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(var)];
  }

  [[nodiscard]] std::span<const ProductTerm> product_terms() const noexcept { return products_; }

  /// κ! for the multi-index at `index`.
  [[nodiscard]] double factorial(std::size_t index) const {
    double f = 1.0;
    for (auto e : exponents(index)) {
      for (int k = 2; k <= e; ++k) f *= k;
    }
    return f;
  }

 private:
  JetLayout(int dim, int order) : dim_(dim), order_(order) {
    std::vector<int> current(static_cast<std::size_t>(dim), 0);
    prefix_.assign(static_cast<std::size_t>(order) + 1, 0);
    for (int deg = 0; deg <= order; ++deg) {
      enumerate(deg, 0, deg, current);
      prefix_[static_cast<std::size_t>(deg)] = degrees_.size();
    }
    const std::size_t n = degrees_.size();
    raise_.assign(n * static_cast<std::size_t>(dim), npos);
    std::vector<int> mi(static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      auto e = exponents(i);
      for (int v = 0; v < dim; ++v) {
        std::copy(e.begin(), e.end(), mi.begin());
        mi[static_cast<std::size_t>(v)] += 1;
        raise_[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(v)] = index_of(mi);
      }
    }
    std::vector<int> sum(static_cast<std::size_t>(dim));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < size_up_to(order - degrees_[a]); ++b) {
        auto ea = exponents(a);
        auto eb = exponents(b);
        for (std::size_t v = 0; v < static_cast<std::size_t>(dim); ++v) sum[v] = ea[v] + eb[v];
        products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                             static_cast<std::uint32_t>(index_of(sum))});
      }
    }
  }

  void enumerate(int remaining, int var, int deg, std::vector<int>& current) {
    if (var == dim_ - 1) {
      current[static_cast<std::size_t>(var)] = remaining;
      std::uint64_t key = 0;
      for (int v = dim_ - 1; v >= 0; --v) key = key * static_cast<std::uint64_t>(order_ + 1) + static_cast<std::uint64_t>(current[static_cast<std::size_t>(v)]);
      lookup_.emplace(key, degrees_.size());
      for (int e : current) exponents_.push_back(static_cast<std::uint8_t>(e));
      degrees_.push_back(deg);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[static_cast<std::size_t>(var)] = e;
      enumerate(remaining - e, var + 1, deg, current);
    }
    current[static_cast<std::size_t>(var)] = 0;
  }

  int dim_;
  int order_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degrees_;
  std::vector<std::size_t> prefix_;
  std::vector<std::size_t> raise_;
  std::vector<ProductTerm> products_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
};

/// Truncated Taylor expansion of a scalar quantity at a point.
///
/// A default-constructed or double-constructed Jet carries no layout and acts
/// as an exact constant in arithmetic with jets of any layout. Two jets that
/// both carry a layout must share it.
class Jet {
 public:
  Jet() : coeffs_(1, 0.0) {}
  Jet(double constant) : coeffs_(1, constant) {}  // NOLINT(google-explicit-constructor)
  explicit Jet(const JetLayout* layout) : layout_(layout), coeffs_(layout->size(), 0.0) {}

  static Jet constant(const JetLayout* layout, double value) {
    Jet j(layout);
    j.coeffs_[0] = value;
    return j;
  }

  /// The coordinate function x_var expanded at x_var = value.
  static Jet variable(const JetLayout* layout, int var, double value) {
    if (var < 0 || var >= layout->dim()) {
      throw Error(ErrorKind::dimension_mismatch, "jet variable index out of range");
    }
    Jet j = constant(layout, value);
    if (layout->order() >= 1) j.coeffs_[layout->raise(0, var)] = 1.0;
    return j;
  }

  [[nodiscard]] const JetLayout* layout() const noexcept { return layout_; }
  [[nodiscard]] bool has_layout() const noexcept { return layout_ != nullptr; }
  [[nodiscard]] int dim() const noexcept { return layout_ ? layout_->dim() : 0; }
  [[nodiscard]] int order() const noexcept { return layout_ ? layout_->order() : 0; }
  [[nodiscard]] double value() const noexcept { return coeffs_[0]; }
  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] std::span<double> coeffs() noexcept { return coeffs_; }

  /// Normalized coefficient ∂^κ f / κ! (zero beyond the stored order).
  [[nodiscard]] double coeff(std::span<const int> multi_index) const {
    if (!layout_) {
      for (int e : multi_index) {
        if (e != 0) return 0.0;
      }
      return coeffs_[0];
    }
    const auto idx = layout_->index_of(multi_index);
    return idx == JetLayout::npos ? 0.0 : coeffs_[idx];
  }

  /// Partial derivative value ∂^κ f at the expansion point.
  [[nodiscard]] double partial(std::span<const int> multi_index) const {
    if (!layout_) return coeff(multi_index);
    const auto idx = layout_->index_of(multi_index);
    return idx == JetLayout::npos ? 0.0 : coeffs_[idx] * layout_->factorial(idx);
  }

  /// ∂f/∂x_var as a jet of one order less.
  [[nodiscard]] Jet derivative(int var) const {
    if (!layout_) return Jet{};
    if (var < 0 || var >= layout_->dim()) {
      throw Error(ErrorKind::dimension_mismatch, "derivative variable out of range");
    }
    if (layout_->order() == 0) {
      throw Error(ErrorKind::invalid_argument, "cannot differentiate an order-0 jet");
    }
    Jet out(JetLayout::get(layout_->dim(), layout_->order() - 1));
    for (std::size_t i = 0; i < out.coeffs_.size(); ++i) {
      const auto up = layout_->raise(i, var);
      const double mult = static_cast<double>(layout_->exponents(up)[static_cast<std::size_t>(var)]);
      out.coeffs_[i] = mult * coeffs_[up];
    }
    return out;
  }

  [[nodiscard]] Jet truncated(int order) const {
    if (!layout_ || order >= layout_->order()) return *this;
    Jet out(JetLayout::get(layout_->dim(), order));
    std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
    return out;
  }

  /// Re-expresses a jet in `target`, mapping variable v to v + offset.
  [[nodiscard]] Jet embedded(const JetLayout* target, int offset = 0) const {
    if (!layout_) return *this;
    if (offset < 0 || offset + layout_->dim() > target->dim()) {
      throw Error(ErrorKind::dimension_mismatch, "jet embedding does not fit target dimension");
    }
    Jet out(target);
    std::vector<int> mi(static_cast<std::size_t>(target->dim()), 0);
    const std::size_t count = layout_->size_up_to(target->order());
    for (std::size_t i = 0; i < count; ++i) {
      auto e = layout_->exponents(i);
      std::fill(mi.begin(), mi.end(), 0);
      for (std::size_t v = 0; v < e.size(); ++v) mi[v + static_cast<std::size_t>(offset)] = e[v];
      out.coeffs_[target->index_of(mi)] = coeffs_[i];
    }
    return out;
  }

  Jet& operator+=(const Jet& o) {
    if (!o.layout_) {
      coeffs_[0] += o.coeffs_[0];
      return *this;
    }
    if (!layout_) {
      const double c = coeffs_[0];
      *this = o;
      coeffs_[0] += c;
      return *this;
    }
    require_same_layout(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }

  Jet& operator-=(const Jet& o) {
    if (!o.layout_) {
      coeffs_[0] -= o.coeffs_[0];
      return *this;
    }
    if (!layout_) {
      const double c = coeffs_[0];
      *this = -o;
      coeffs_[0] += c;
      return *this;
    }
    require_same_layout(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }

  Jet& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  Jet& operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
  }

  Jet& operator/=(const Jet& o) {
    *this = *this * reciprocal(o);
    return *this;
  }

  friend Jet operator-(Jet a) {
    for (auto& c : a.coeffs_) c = -c;
    return a;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    if (!a.layout_) return b * a.coeffs_[0];
    if (!b.layout_) return a * b.coeffs_[0];
    a.require_same_layout(b);
    Jet out(a.layout_);
    const double* x = a.coeffs_.data();
    const double* y = b.coeffs_.data();
    double* r = out.coeffs_.data();
    for (const auto& t : a.layout_->product_terms()) r[t.out] += x[t.lhs] * y[t.rhs];
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  /// 1/a via the truncated geometric series around a.value().
  friend Jet reciprocal(const Jet& a) {
    const double a0 = a.coeffs_[0];
    if (a0 == 0.0 || !std::isfinite(a0)) {
      throw Error(ErrorKind::singular, "reciprocal of a jet with zero value");
    }
    if (!a.layout_) return Jet(1.0 / a0);
    Jet u = a * (1.0 / a0);
    u.coeffs_[0] = 0.0;
    Jet r = Jet::constant(a.layout_, 1.0);
    for (int k = 1; k <= a.layout_->order(); ++k) {
      r = -(u * r);
      r.coeffs_[0] += 1.0;
    }
    return r * (1.0 / a0);
  }

 private:
  void require_same_layout(const Jet& o) const {
    if (layout_ != o.layout_) {
      throw Error(ErrorKind::dimension_mismatch, "jet arithmetic requires equal dimension and order");
    }
  }

  const JetLayout* layout_ = nullptr;
  std::vector<double> coeffs_;
};

/// Value of a scalar that may be a jet; used by templated kernels for pivoting.
inline double value_of(double x) noexcept { return x; }
inline double value_of(const Jet& j) noexcept { return j.value(); }

inline double reciprocal(double x) {
  if (x == 0.0) throw Error(ErrorKind::singular, "reciprocal of zero");
  return 1.0 / x;
}

/// Largest coefficient difference between two jets (constants broadcast).
inline double max_abs_diff(const Jet& a, const Jet& b) {
  Jet d = a - b;
  double m = 0.0;
  for (double c : d.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

inline double max_abs_coeff(const Jet& a) {
  double m = 0.0;
  for (double c : a.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace pke
