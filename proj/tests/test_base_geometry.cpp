#include <pke/base_geometry.hpp>
#include <pke/structure.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using pke::GrassBilinear;
using pke::StructureKind;
using pke::StructureSpec;
using pke::Tensor;

namespace {

Tensor<double> mat(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor<double> t({rows.size(), rows.begin()->size()});
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (double v : r) t(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor<double> random_matrix(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor<double> t({n, n});
  for (auto& v : t.flat()) v = u(rng);
  return t;
}

double diff(const GrassBilinear<double>& a, const GrassBilinear<double>& b) {
  return pke::max_abs_diff(a.matrix(), b.matrix());
}

double norm(const GrassBilinear<double>& a) { return pke::max_abs(a.matrix()); }

}  // namespace

TEST(SymAlt, NilpotentExample) {
  const auto sa = pke::split_sym_alt(mat({{0, 1}, {0, 0}}));
  EXPECT_EQ(sa.sym, mat({{0, 0.5}, {0.5, 0}}));
  EXPECT_EQ(sa.alt, mat({{0, 0.5}, {-0.5, 0}}));
}

TEST(SymAlt, SymmetricHasNoAltPart) {
  const auto sa = pke::split_sym_alt(mat({{1, 2, 3}, {2, 5, 6}, {3, 6, 9}}));
  EXPECT_EQ(pke::max_abs(sa.alt), 0.0);
}

TEST(SymAlt, RandomReconstructs) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_matrix(rng, 5);
    const auto sa = pke::split_sym_alt(m);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(sa.sym.flat()[i] + sa.alt.flat()[i], m.flat()[i], 1e-15);
  }
}

TEST(Grassmannian, FiberViewRoundTrip) {
  const std::vector<double> view{1, 2, 3, 4, 5, 6};  // m=2 rows q, n=3 columns p
  const auto slots = pke::fiber_from_matrix_view(view, 2, 3);
  EXPECT_EQ(slots[pke::grass_index(2, 0, 2)], 3.0);
  EXPECT_EQ(slots[pke::grass_index(0, 1, 2)], 4.0);
  EXPECT_EQ(pke::fiber_to_matrix_view(slots, 2, 3), view);
  EXPECT_THROW(pke::fiber_from_matrix_view(view, 2, 2), pke::Error);
}

TEST(Grassmannian, ProjectionsMatchBruteForce) {
  std::mt19937_64 rng(2);
  for (auto [m, n] : {std::pair{1, 2}, std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 2}}) {
    const auto d = static_cast<std::size_t>(m * n);
    const auto raw = random_matrix(rng, d);
    const GrassBilinear<double> p(m, n, raw);
    const auto parts = pke::grassmann_projections(p);
    // P(a, α, b, β) with a, b in E and α, β in F
    auto P = [&](int a, int al, int b, int be) { return raw(static_cast<std::size_t>(al * m + a), static_cast<std::size_t>(be * m + b)); };
    for (int a = 0; a < m; ++a)
      for (int al = 0; al < n; ++al)
        for (int b = 0; b < m; ++b)
          for (int be = 0; be < n; ++be) {
            const double x = P(a, al, b, be), e = P(b, al, a, be), f = P(a, be, b, al), ef = P(b, be, a, al);
            EXPECT_NEAR(parts.ss.at(a, al, b, be), (x + e + f + ef) / 4, 1e-15);
            EXPECT_NEAR(parts.aa.at(a, al, b, be), (x - e - f + ef) / 4, 1e-15);
            EXPECT_NEAR(parts.sa.at(a, al, b, be), (x + e - f - ef) / 4, 1e-15);
            EXPECT_NEAR(parts.as.at(a, al, b, be), (x - e + f - ef) / 4, 1e-15);
          }
  }
}

TEST(Grassmannian, ProjectionsPartitionIdentityAndAreOrthogonal) {
  std::mt19937_64 rng(3);
  for (auto [m, n] : {std::pair{1, 2}, std::pair{2, 2}, std::pair{2, 3}}) {
    const GrassBilinear<double> p(m, n, random_matrix(rng, static_cast<std::size_t>(m * n)));
    const auto parts = pke::grassmann_projections(p);
    EXPECT_LT(diff(parts.ss + parts.aa + parts.sa + parts.as, p), 1e-15);
    const std::array<const GrassBilinear<double>*, 4> list{&parts.ss, &parts.aa, &parts.sa, &parts.as};
    for (std::size_t i = 0; i < 4; ++i) {
      const auto again = pke::grassmann_projections(*list[i]);
      const std::array<const GrassBilinear<double>*, 4> sub{&again.ss, &again.aa, &again.sa, &again.as};
      for (std::size_t j = 0; j < 4; ++j) {
        if (i == j) {
          EXPECT_LT(diff(*sub[j], *list[i]), 1e-15);
        } else {
          EXPECT_LT(norm(*sub[j]), 1e-15);
        }
      }
    }
  }
}

TEST(Grassmannian, ProjectionSymmetryTypes) {
  std::mt19937_64 rng(4);
  const GrassBilinear<double> p(2, 2, random_matrix(rng, 4));
  const auto parts = pke::grassmann_projections(p);
  EXPECT_LT(diff(parts.ss.t_E(), parts.ss), 1e-15);
  EXPECT_LT(diff(parts.ss.t_F(), parts.ss), 1e-15);
  EXPECT_LT(diff(parts.aa.t_E(), parts.aa * -1.0), 1e-15);
  EXPECT_LT(diff(parts.aa.t_F(), parts.aa * -1.0), 1e-15);
  EXPECT_LT(diff(parts.sa.t_E(), parts.sa), 1e-15);
  EXPECT_LT(diff(parts.sa.t_F(), parts.sa * -1.0), 1e-15);
  EXPECT_LT(diff(parts.as.t_E(), parts.as * -1.0), 1e-15);
  EXPECT_LT(diff(parts.as.t_F(), parts.as), 1e-15);
}

TEST(Grassmannian, ProjectionsCommuteWithTransposition) {
  std::mt19937_64 rng(5);
  auto raw = random_matrix(rng, 4);
  const auto tr = pke::transpose(raw);
  const auto a = pke::grassmann_projections(GrassBilinear<double>(2, 2, raw));
  const auto b = pke::grassmann_projections(GrassBilinear<double>(2, 2, tr));
  EXPECT_LT(pke::max_abs_diff(pke::transpose(a.ss.matrix()), b.ss.matrix()), 1e-15);
  EXPECT_LT(pke::max_abs_diff(pke::transpose(a.sa.matrix()), b.sa.matrix()), 1e-15);
  EXPECT_LT(pke::max_abs_diff(pke::transpose(a.as.matrix()), b.as.matrix()), 1e-15);
  EXPECT_LT(pke::max_abs_diff(pke::transpose(a.aa.matrix()), b.aa.matrix()), 1e-15);
}

TEST(Grassmannian, RankOneLineCollapsesAltE) {
  std::mt19937_64 rng(6);
  const GrassBilinear<double> p(1, 3, random_matrix(rng, 3));
  const auto parts = pke::grassmann_projections(p);
  EXPECT_EQ(norm(parts.aa), 0.0);
  EXPECT_EQ(norm(parts.as), 0.0);
  EXPECT_LT(diff(parts.ss + parts.sa, p), 1e-15);
}

// ---- brackets ------------------------------------------------------------------

TEST(Bracket, ProjectiveBasisExample) {
  const std::vector<double> x{0, 0};
  const auto ls = pke::make_local_structure_values(StructureSpec::projective(2), x);
  const std::vector<double> dx1{1, 0};
  EXPECT_EQ(ls.bracket_basis(0, dx1), mat({{2, 0}, {0, 1}}));
}

TEST(Bracket, ConformalMatchesDefinition) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 2);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) * 0.2;
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) + a + a.transpose();
    if (trial == 0) g.setIdentity();
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    pke::Tensor<pke::PolyField> entries({n, n});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        entries(i, j) = pke::PolyField::constant(static_cast<int>(n), g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    const auto spec = StructureSpec::conformal(pke::MetricField(entries));
    const auto ls = pke::make_local_structure_values(spec, std::vector<double>(n, 0.0));
    std::vector<double> X(n), al(n);
    for (auto& v : X) v = u(rng);
    for (auto& v : al) v = u(rng);
    if (trial == 0) {
      X.assign(n, 0.0);
      X[0] = 1;
      al.assign(n, 0.0);
      al[1] = 1;
    }
    const Eigen::VectorXd xv = Eigen::Map<Eigen::VectorXd>(X.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd av = Eigen::Map<Eigen::VectorXd>(al.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd sharp = g.inverse() * av;
    const auto e = ls.bracket(X, al);
    for (std::size_t l = 0; l < n; ++l) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      y(static_cast<Eigen::Index>(l)) = 1;
      // {X, α}Y = α(X)Y + α(Y)X - g(X, Y) α♯
      const Eigen::VectorXd ref = av.dot(xv) * y + av.dot(y) * xv - xv.dot(g * y) * sharp;
      for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(e(k, l), ref(static_cast<Eigen::Index>(k)), 1e-13);
    }
  }
}

TEST(Bracket, GrassmannianMatchesMatrixProducts) {
  std::mt19937_64 rng(8);
  for (auto [m, n] : {std::pair{1, 3}, std::pair{2, 2}, std::pair{2, 3}}) {
    const auto d = static_cast<std::size_t>(m * n);
    const auto ls = pke::make_local_structure_values(StructureSpec::grassmannian(m, n), std::vector<double>(d, 0.0));
    const auto x = oracle::random_point(rng, d);
    const auto al = oracle::random_point(rng, d);
    Eigen::MatrixXd X(n, m), A(m, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < m; ++q) {
        X(p, q) = x[pke::grass_index(static_cast<std::size_t>(p), static_cast<std::size_t>(q), static_cast<std::size_t>(m))];
        A(q, p) = al[pke::grass_index(static_cast<std::size_t>(p), static_cast<std::size_t>(q), static_cast<std::size_t>(m))];
      }
    const auto e = ls.bracket(x, al);
    for (int p1 = 0; p1 < n; ++p1)
      for (int q1 = 0; q1 < m; ++q1) {
        Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, m);
        Y(p1, q1) = 1;
        const Eigen::MatrixXd ref = X * A * Y + Y * A * X;
        const auto col = static_cast<std::size_t>(p1 * m + q1);
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < m; ++q) EXPECT_NEAR(e(static_cast<std::size_t>(p * m + q), col), ref(p, q), 1e-14);
      }
  }
}

TEST(Bracket, ZeroCovectorGivesZero) {
  for (const auto& spec : {StructureSpec::projective(3), StructureSpec::conformal(pke::MetricField::euclidean(3)),
                           StructureSpec::grassmannian(2, 2)}) {
    const auto d = static_cast<std::size_t>(spec.dim());
    const auto ls = pke::make_local_structure_values(spec, std::vector<double>(d, 0.1));
    std::vector<double> x(d, 0.7);
    EXPECT_EQ(pke::max_abs(ls.bracket(x, std::vector<double>(d, 0.0))), 0.0) << spec.describe();
  }
}

TEST(Bracket, SymmetricInVectorArgument) {
  // {X, α}Y = {Y, α}X for every structure
  std::mt19937_64 rng(9);
  for (const auto& spec : {StructureSpec::projective(3), StructureSpec::conformal(pke::MetricField::euclidean(4)),
                           StructureSpec::grassmannian(2, 3)}) {
    const auto d = static_cast<std::size_t>(spec.dim());
    const auto ls = pke::make_local_structure_values(spec, std::vector<double>(d, 0.0));
    const auto al = oracle::random_point(rng, d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto ei = ls.bracket_basis(i, al);
      for (std::size_t j = 0; j < d; ++j) {
        const auto ej = ls.bracket_basis(j, al);
        for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(ei(k, j), ej(k, i), 1e-14) << spec.describe();
      }
    }
  }
}

TEST(Bracket, ActionOnCovector) {
  const auto e = mat({{1, 2}, {3, 4}});
  const std::vector<double> beta{1, -1};
  const auto out = pke::act_on_covector(e, std::span<const double>(beta));
  EXPECT_EQ(out[0], -(1 * 1 + -1 * 3));
  EXPECT_EQ(out[1], -(1 * 2 + -1 * 4));
}

TEST(Structure, UnsupportedDimensionsNameTheDivisor) {
  auto msg = [](auto f) {
    try {
      f();
    } catch (const pke::Error& e) {
      EXPECT_EQ(e.kind(), pke::ErrorKind::unsupported_dimension);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg([] { StructureSpec::projective(1); }).find("n - 1"), std::string::npos);
  EXPECT_NE(msg([] { StructureSpec::conformal(pke::MetricField::euclidean(2)); }).find("n - 2"), std::string::npos);
  EXPECT_NE(msg([] { StructureSpec::grassmannian(1, 1); }).find("m + n - 2"), std::string::npos);
}

TEST(Structure, MetricMustBeSymmetricAndInvertible) {
  pke::Tensor<pke::PolyField> e({3, 3}, pke::PolyField(3));
  e(0, 1) = pke::PolyField::constant(3, 1.0);
  EXPECT_THROW(pke::MetricField{e}, pke::Error);
  const std::vector<double> diag{1, 0, 1};
  const auto spec = StructureSpec::conformal(pke::MetricField::diagonal(diag));
  try {
    pke::make_local_structure(spec, std::vector<double>(3, 0.0), 1);
    FAIL();
  } catch (const pke::Error& err) {
    EXPECT_EQ(err.kind(), pke::ErrorKind::degenerate_metric);
  }
}

TEST(Structure, Describe) {
  EXPECT_EQ(StructureSpec::projective(2).describe(), "projective(n=2)");
  EXPECT_EQ(StructureSpec::grassmannian(2, 3).describe(), "grassmannian(m=2, n=3)");
  EXPECT_EQ(StructureSpec::grassmannian(2, 3).dim(), 6);
  EXPECT_EQ(StructureSpec::projective(3).kind(), StructureKind::projective);
}
