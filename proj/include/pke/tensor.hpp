#pragma once

// Dense row-major multi-index arrays over an arbitrary scalar (double, Jet,
// PolyField). Index order is always spelled out at the call site, e.g. the
// Christoffel array is gamma(k, i, j) = Γ^k_ij.

#include <pke/error.hpp>
#include <pke/jet.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace pke {

template <class T>
class Tensor {
 public:
  Tensor() = default;

  Tensor(std::initializer_list<std::size_t> extents, const T& fill = T{})
      : extents_(extents), data_(count(extents_), fill) {}

  explicit Tensor(std::vector<std::size_t> extents, const T& fill = T{})
      : extents_(std::move(extents)), data_(count(extents_), fill) {}

  [[nodiscard]] std::size_t rank() const noexcept { return extents_.size(); }
  [[nodiscard]] std::size_t extent(std::size_t d) const { return extents_.at(d); }
  [[nodiscard]] const std::vector<std::size_t>& extents() const noexcept { return extents_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  template <class... I>
  T& operator()(I... idx) {
    return data_[offset(static_cast<std::size_t>(idx)...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[offset(static_cast<std::size_t>(idx)...)];
  }

  [[nodiscard]] std::span<T> flat() noexcept { return data_; }
  [[nodiscard]] std::span<const T> flat() const noexcept { return data_; }

  template <class F>
  [[nodiscard]] auto map(F&& f) const -> Tensor<decltype(f(std::declval<const T&>()))> {
    Tensor<decltype(f(std::declval<const T&>()))> out(extents_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.flat()[i] = f(data_[i]);
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t count(const std::vector<std::size_t>& e) {
    std::size_t n = 1;
    for (auto x : e) n *= x;
    return n;
  }

  template <class... I>
  [[nodiscard]] std::size_t offset(I... idx) const {
    constexpr std::size_t r = sizeof...(I);
    const std::array<std::size_t, r> ids{idx...};
    std::size_t off = 0;
    for (std::size_t d = 0; d < r; ++d) off = off * extents_[d] + ids[d];
    return off;
  }

  std::vector<std::size_t> extents_;
  std::vector<T> data_;
};

/// Square n×n matrix helper.
template <class T>
Tensor<T> square(std::size_t n, const T& fill = T{}) {
  return Tensor<T>({n, n}, fill);
}

template <class T>
Tensor<T> identity(std::size_t n) {
  Tensor<T> out({n, n}, T(0.0));
  for (std::size_t i = 0; i < n; ++i) out(i, i) = T(1.0);
  return out;
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
  Tensor<T> out({a.extent(1), a.extent(0)});
  for (std::size_t i = 0; i < a.extent(0); ++i) {
    for (std::size_t j = 0; j < a.extent(1); ++j) out(j, i) = a(i, j);
  }
  return out;
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.extent(1) != b.extent(0)) throw Error(ErrorKind::dimension_mismatch, "matmul shape mismatch");
  Tensor<T> out({a.extent(0), b.extent(1)}, T(0.0));
  for (std::size_t i = 0; i < a.extent(0); ++i) {
    for (std::size_t k = 0; k < a.extent(1); ++k) {
      for (std::size_t j = 0; j < b.extent(1); ++j) out(i, j) += a(i, k) * b(k, j);
    }
  }
  return out;
}

inline Tensor<double> values(const Tensor<Jet>& t) {
  return t.map([](const Jet& j) { return j.value(); });
}

inline Tensor<Jet> truncated(const Tensor<Jet>& t, int order) {
  return t.map([order](const Jet& j) { return j.truncated(order); });
}

inline Tensor<Jet> embedded(const Tensor<Jet>& t, const JetLayout* target, int offset = 0) {
  return t.map([&](const Jet& j) { return j.embedded(target, offset); });
}

inline double max_abs(const Tensor<double>& t) {
  double m = 0.0;
  for (double x : t.flat()) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.extents() != b.extents()) throw Error(ErrorKind::dimension_mismatch, "tensor shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.flat()[i] - b.flat()[i]));
  return m;
}

/// Largest coefficient-wise difference over all Taylor coefficients.
inline double max_abs_diff(const Tensor<Jet>& a, const Tensor<Jet>& b) {
  if (a.extents() != b.extents()) throw Error(ErrorKind::dimension_mismatch, "tensor shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a.flat()[i], b.flat()[i]));
  return m;
}

}  // namespace pke
