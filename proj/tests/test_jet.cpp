#include <pke/jet.hpp>
#include <pke/linalg.hpp>
#include <pke/poly_field.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using pke::Jet;
using pke::JetLayout;
using pke::PolyField;

namespace {

std::vector<int> mi(std::initializer_list<int> l) { return l; }

PolyField mono(int dim, std::vector<int> e, double c = 1.0) { return PolyField(dim, {{std::move(e), c}}); }

}  // namespace

TEST(Jet, LinearFieldValueAndGradient) {
  const std::vector<double> x{2, 3};
  const Jet j = pke::jet_eval(PolyField::coordinate(2, 0), x, 1);
  EXPECT_EQ(j.value(), 2.0);
  EXPECT_EQ(j.partial(mi({1, 0})), 1.0);
  EXPECT_EQ(j.partial(mi({0, 1})), 0.0);
}

TEST(Jet, MonomialSecondOrderCoefficients) {
  const std::vector<double> x{1, 1};
  const Jet j = pke::jet_eval(mono(2, {2, 1}), x, 2);
  EXPECT_EQ(j.value(), 1.0);
  EXPECT_EQ(j.partial(mi({1, 0})), 2.0);
  EXPECT_EQ(j.partial(mi({0, 1})), 1.0);
  EXPECT_EQ(j.coeff(mi({2, 0})), 1.0);
  EXPECT_EQ(j.coeff(mi({1, 1})), 2.0);
  EXPECT_EQ(j.coeff(mi({0, 2})), 0.0);
}

TEST(Jet, RandomQuarticMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const PolyField f = oracle::random_poly(rng, 3, 4);
    const auto x = oracle::random_point(rng, 3);
    const Jet j = pke::jet_eval(f, x, 4);
    auto fv = [&](const oracle::Vec& y) { return f(y); };
    for (std::size_t a = 0; a < 3; ++a) {
      std::vector<int> e(3, 0);
      e[a] = 1;
      const double d = oracle::fd(fv, x, a, 1e-4);
      EXPECT_NEAR(j.partial(e), d, 1e-5 * (1 + std::abs(d)));
      for (std::size_t b = 0; b < 3; ++b) {
        std::vector<int> e2(3, 0);
        e2[a] += 1;
        e2[b] += 1;
        const double d2 = oracle::fd2(fv, x, a, b, 1e-4);
        EXPECT_NEAR(j.partial(e2), d2, 1e-5 * (1 + std::abs(d2)));
      }
    }
  }
}

TEST(Jet, EveryCoefficientMatchesSymbolicDerivative) {
  std::mt19937_64 rng(12);
  const PolyField f = oracle::random_poly(rng, 2, 4);
  const auto x = oracle::random_point(rng, 2);
  const Jet j = pke::jet_eval(f, x, 4);
  const auto* lay = j.layout();
  for (std::size_t idx = 0; idx < lay->size(); ++idx) {
    const auto e = lay->exponents(idx);
    PolyField d = f;
    for (int v = 0; v < 2; ++v)
      for (int k = 0; k < e[static_cast<std::size_t>(v)]; ++k) d = d.derivative(v);
    const std::vector<int> ev(e.begin(), e.end());
    EXPECT_NEAR(j.partial(ev), d.is_zero() ? 0.0 : d(x), 1e-12 * (1 + std::abs(j.partial(ev))));
  }
}

TEST(Jet, SquareOfCoordinate) {
  const auto* lay = JetLayout::get(1, 2);
  const Jet x = Jet::variable(lay, 0, 3.0);
  const Jet y = x * x;
  EXPECT_EQ(y.value(), 9.0);
  EXPECT_EQ(y.partial(mi({1})), 6.0);
  EXPECT_EQ(y.coeff(mi({2})), 1.0);
}

TEST(Jet, ReciprocalOfConstant) {
  const auto* lay = JetLayout::get(2, 3);
  const Jet r = reciprocal(Jet::constant(lay, 2.0));
  EXPECT_EQ(r.value(), 0.5);
  for (std::size_t i = 1; i < r.coeffs().size(); ++i) EXPECT_EQ(r.coeffs()[i], 0.0);
}

TEST(Jet, ReciprocalOfRationalFunction) {
  const std::vector<double> x{1.0};
  const PolyField p = PolyField::constant(1, 1.0) + mono(1, {2});
  const Jet r = reciprocal(pke::jet_eval(p, x, 3));
  // 1/(1+t²) at t=1: exact derivatives 1/2, -1/2, 1/2, 0
  EXPECT_NEAR(r.value(), 0.5, 1e-15);
  EXPECT_NEAR(r.partial(mi({1})), -0.5, 1e-14);
  EXPECT_NEAR(r.partial(mi({2})), 0.5, 1e-14);
  EXPECT_NEAR(r.partial(mi({3})), 0.0, 1e-13);
  auto f = [](const oracle::Vec& t) { return 1.0 / (1.0 + t[0] * t[0]); };
  EXPECT_NEAR(r.partial(mi({1})), oracle::fd(f, x, 0, 1e-4), 1e-6);
  EXPECT_NEAR(r.partial(mi({2})), oracle::fd2(f, x, 0, 0, 1e-3), 1e-6);
}

TEST(Jet, ProductMatchesProductPolynomial) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const PolyField a = oracle::random_poly(rng, 3, 2);
    const PolyField b = oracle::random_poly(rng, 3, 2);
    const auto x = oracle::random_point(rng, 3);
    const Jet lhs = pke::jet_eval(a, x, 3) * pke::jet_eval(b, x, 3);
    const Jet rhs = pke::jet_eval(a * b, x, 3);
    EXPECT_LT(pke::max_abs_diff(lhs, rhs), 1e-12);
    const Jet jb = pke::jet_eval(b, x, 3);
    const Jet q = pke::jet_eval(a, x, 3) / jb;
    // rounding scales with the size of the factors
    const double scale = (1.0 + pke::max_abs_coeff(q)) * (1.0 + pke::max_abs_coeff(jb));
    EXPECT_LT(pke::max_abs_diff(q * jb, pke::jet_eval(a, x, 3)), 1e-13 * scale);
  }
}

TEST(Jet, DerivativeLowersOrder) {
  std::mt19937_64 rng(4);
  const PolyField f = oracle::random_poly(rng, 2, 4);
  const std::vector<double> x{0.3, -0.7};
  const Jet d = pke::jet_eval(f, x, 3).derivative(1);
  EXPECT_EQ(d.order(), 2);
  EXPECT_LT(pke::max_abs_diff(d, pke::jet_eval(f.derivative(1), x, 2)), 1e-12);
}

TEST(Jet, EmbeddingShiftsVariables) {
  const std::vector<double> x{0.5};
  const Jet j = pke::jet_eval(mono(1, {3}), x, 2);
  const Jet e = j.embedded(JetLayout::get(3, 2), 2);
  EXPECT_EQ(e.coeff(mi({0, 0, 1})), j.coeff(mi({1})));
  EXPECT_EQ(e.coeff(mi({0, 0, 2})), j.coeff(mi({2})));
  EXPECT_EQ(e.coeff(mi({1, 0, 0})), 0.0);
  EXPECT_EQ(j.truncated(1).order(), 1);
}

TEST(Jet, LayoutlessConstantMixesWithAnyLayout) {
  const Jet x = Jet::variable(JetLayout::get(2, 2), 1, 1.5);
  const Jet y = x * Jet(2.0) + Jet(1.0);
  EXPECT_EQ(y.value(), 4.0);
  EXPECT_EQ(y.partial(mi({0, 1})), 2.0);
}

TEST(Jet, Errors) {
  EXPECT_THROW(JetLayout::get(0, 1), pke::Error);
  EXPECT_THROW(JetLayout::get(2, pke::max_jet_order + 1), pke::Error);
  const Jet a = Jet::variable(JetLayout::get(2, 1), 0, 1.0);
  const Jet b = Jet::variable(JetLayout::get(3, 1), 0, 1.0);
  EXPECT_THROW(a + b, pke::Error);
  EXPECT_THROW(reciprocal(Jet::constant(JetLayout::get(1, 1), 0.0)), pke::Error);
}

TEST(Linalg, SolveMatchesEigen) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t n = 6;
  pke::Tensor<double> a({n, n}), b({n, 2});
  for (auto& v : a.flat()) v = u(rng);
  for (auto& v : b.flat()) v = u(rng);
  const auto x = pke::solve(a, b);
  const Eigen::MatrixXd ref = oracle::to_eigen(a).fullPivLu().solve(oracle::to_eigen(b));
  EXPECT_LT((oracle::to_eigen(x) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linalg, SingularMatrixThrows) {
  pke::Tensor<double> a({2, 2}, 1.0);
  try {
    pke::inverse(a);
    FAIL() << "expected singular";
  } catch (const pke::Error& e) {
    EXPECT_EQ(e.kind(), pke::ErrorKind::singular);
  }
}

TEST(Linalg, JetInverseIsInverseAsJets) {
  std::mt19937_64 rng(6);
  const std::vector<double> x{0.1, 0.2};
  pke::Tensor<Jet> a({3, 3});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      PolyField f = oracle::random_poly(rng, 2, 2, 0.3);
      if (i == j) f = f + PolyField::constant(2, 2.0);
      a(i, j) = pke::jet_eval(f, x, 2);
    }
  const auto prod = pke::matmul(a, pke::inverse(a));
  const auto id = pke::identity<Jet>(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(prod(i, j).value(), id(i, j).value(), 1e-13);
      for (std::size_t c = 1; c < prod(i, j).coeffs().size(); ++c) EXPECT_NEAR(prod(i, j).coeffs()[c], 0.0, 1e-12);
    }
}
