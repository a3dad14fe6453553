#pragma once

// Numerical certification of the cotangent construction.
//
// Every check is evaluated per cotangent point with no shared state, so the
// result is the same for any thread count.

#include <pke/connection.hpp>
#include <pke/cotangent.hpp>
#include <pke/error.hpp>
#include <pke/jet.hpp>
#include <pke/linalg.hpp>
#include <pke/rho.hpp>
#include <pke/structure.hpp>
#include <pke/tensor.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace pke {

/// out[i] = f(i), evaluated on up to `threads` workers (0: hardware count).
template <class F>
auto parallel_map(std::size_t count, F&& f, int threads = 0) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline Eigen::MatrixXd to_eigen(const Tensor<double>& t) {
  Eigen::MatrixXd m(t.extent(0), t.extent(1));
  for (std::size_t i = 0; i < t.extent(0); ++i)
    for (std::size_t j = 0; j < t.extent(1); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t(i, j);
  return m;
}

/// Ricci tensor of the Levi-Civita connection of a jet-valued metric (order >= 2).
inline Tensor<Jet> ricci_of_metric(const Tensor<Jet>& h) {
  const std::size_t n = h.extent(0);
  const int order = h(0, 0).has_layout() ? h(0, 0).order() : 0;
  if (order < 2) throw Error(ErrorKind::invalid_argument, "ricci_of_metric needs metric jets of order >= 2");
  Tensor<Jet> dh({n, n, n});  // dh(c, a, b) = ∂c h_ab
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) {
        dh(c, a, b) = h(a, b).derivative(static_cast<int>(c));
        dh(c, b, a) = dh(c, a, b);
      }
  Tensor<Jet> hi;
  try {
    hi = inverse(truncated(h, order - 1), 1e-14);
  } catch (const Error&) {
    throw Error(ErrorKind::degenerate_metric, "metric is degenerate at the evaluation point");
  }
  Tensor<Jet> lower({n, n, n});  // Γ_{e b c}
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = b; c < n; ++c) {
        lower(e, b, c) = (dh(b, e, c) + dh(c, e, b) - dh(e, b, c)) * 0.5;
        lower(e, c, b) = lower(e, b, c);
      }
  Tensor<Jet> gamma({n, n, n});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = b; c < n; ++c) {
        Jet s = hi(a, 0) * lower(0, b, c);
        for (std::size_t e = 1; e < n; ++e) s += hi(a, e) * lower(e, b, c);
        gamma(a, b, c) = s;
        gamma(a, c, b) = s;
      }
  return ricci_from_curvature(curvature_from_christoffel(gamma));
}

// ---- per-point evaluation ------------------------------------------------------

struct PointSample {
  CotangentPoint point;
  Tensor<double> h;
  Tensor<double> ric;  // Ricci of h
  Tensor<Jet> omega;   // order-1 jets
};

inline PointSample sample_point(const StructureSpec& spec, const Connection& c, const CotangentPoint& p,
                                const ConstructionOptions& opts = {}, int order = 2) {
  const auto f = evaluate_cotangent(spec, c, p, order, opts);
  PointSample s;
  s.point = p;
  s.h = values(f.h);
  s.ric = values(ricci_of_metric(f.h));
  s.omega = truncated(f.omega, 1);
  return s;
}

inline std::vector<PointSample> sample_points_parallel(const StructureSpec& spec, const Connection& c,
                                                       std::span<const CotangentPoint> points,
                                                       const ConstructionOptions& opts = {}, int threads = 0,
                                                       int order = 2) {
  return parallel_map(
      points.size(), [&](std::size_t i) { return sample_point(spec, c, points[i], opts, order); }, threads);
}

// ---- Einstein ------------------------------------------------------------------

struct EinsteinResult {
  double lambda = 0.0;
  double residual = 0.0;  // max_p max_ab |Ric - λh| / (1 + max|h|)
  double spread = 0.0;    // max - min of per-point λ
  std::vector<double> point_lambdas;
};

inline EinsteinResult einstein_fit(std::span<const PointSample> samples) {
  if (samples.size() < 2) throw Error(ErrorKind::invalid_argument, "einstein fit needs at least 2 points");
  EinsteinResult r;
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : samples) {
    double pn = 0.0;
    double pd = 0.0;
    for (std::size_t i = 0; i < s.h.size(); ++i) {
      pn += s.ric.flat()[i] * s.h.flat()[i];
      pd += s.h.flat()[i] * s.h.flat()[i];
    }
    num += pn;
    den += pd;
    r.point_lambdas.push_back(pn / pd);
  }
  r.lambda = num / den;
  for (const auto& s : samples) {
    double dev = 0.0;
    for (std::size_t i = 0; i < s.h.size(); ++i) dev = std::max(dev, std::abs(s.ric.flat()[i] - r.lambda * s.h.flat()[i]));
    r.residual = std::max(r.residual, dev / (1.0 + max_abs(s.h)));
  }
  const auto [lo, hi] = std::minmax_element(r.point_lambdas.begin(), r.point_lambdas.end());
  r.spread = *hi - *lo;
  return r;
}

inline EinsteinResult einstein_residual(const StructureSpec& spec, const Connection& c,
                                        std::span<const CotangentPoint> points, const ConstructionOptions& opts = {},
                                        int threads = 0) {
  const auto samples = sample_points_parallel(spec, c, points, opts, threads);
  return einstein_fit(samples);
}

// ---- para-Kähler ---------------------------------------------------------------

struct ParaKahlerMetrics {
  double i_squared = 0.0;      // max |I² - Id|
  double eigen_rank = 0.0;     // |rank Π+ - n| + |rank Π- - n|
  double isotropy = 0.0;       // max |Π±ᵀ h Π±|
  double lagrangian = 0.0;     // max |Π±ᵀ Ω Π±|
  double closedness = 0.0;     // max |dΩ_abc|
  double nondegeneracy = 0.0;  // | |det Ω| 4^n - 1 |
  double signature = 0.0;      // |#pos - n| + |#neg - n| for h
  double trace_i = 0.0;        // |tr I|
};

inline ParaKahlerMetrics para_kahler_metrics(const Tensor<double>& h, const Tensor<Jet>& omega) {
  const std::size_t dim = h.extent(0);
  const auto n = static_cast<double>(dim / 2);
  const Tensor<double> om = values(omega);
  const Eigen::MatrixXd I = to_eigen(para_complex(h, om));
  const Eigen::MatrixXd H = to_eigen(h);
  const Eigen::MatrixXd W = to_eigen(om);
  const auto d = static_cast<Eigen::Index>(dim);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  ParaKahlerMetrics m;
  m.i_squared = (I * I - id).cwiseAbs().maxCoeff();
  m.trace_i = std::abs(I.trace());
  for (double sgn : {1.0, -1.0}) {
    const Eigen::MatrixXd proj = 0.5 * (id + sgn * I);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(proj);
    lu.setThreshold(1e-8);
    m.eigen_rank += std::abs(static_cast<double>(lu.rank()) - n);
    m.isotropy = std::max(m.isotropy, (proj.transpose() * H * proj).cwiseAbs().maxCoeff());
    m.lagrangian = std::max(m.lagrangian, (proj.transpose() * W * proj).cwiseAbs().maxCoeff());
  }
  // dΩ_abc = ∂aΩ_bc + ∂bΩ_ca + ∂cΩ_ab from first-order coefficients.
  const JetLayout* lay = omega(0, 0).layout();
  if (lay == nullptr || lay->order() < 1) throw Error(ErrorKind::invalid_argument, "closedness needs order-1 jets");
  auto del = [&](std::size_t a, std::size_t b, std::size_t c) {
    return omega(b, c).coeffs()[lay->raise(0, static_cast<int>(a))];
  };
  for (std::size_t a = 0; a < dim; ++a)
    for (std::size_t b = a + 1; b < dim; ++b)
      for (std::size_t c = b + 1; c < dim; ++c)
        m.closedness = std::max(m.closedness, std::abs(del(a, b, c) + del(b, c, a) + del(c, a, b)));
  m.nondegeneracy = std::abs(std::abs(W.fullPivLu().determinant()) * std::pow(4.0, n) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double floor = 1e-12 * (1.0 + H.cwiseAbs().maxCoeff());
  double pos = 0.0;
  double neg = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev > floor) pos += 1.0;
    if (ev < -floor) neg += 1.0;
  }
  m.signature = std::abs(pos - n) + std::abs(neg - n);
  return m;
}

// ---- reports -------------------------------------------------------------------

struct CheckResult {
  std::string section;
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  bool passed = false;
  std::string note;
};

inline CheckResult make_check(std::string section, std::string name, double residual, double tol, int samples,
                              std::string note = {}) {
  const bool ok = std::isfinite(residual) && residual <= tol;
  return {std::move(section), std::move(name), residual, tol, samples, ok, std::move(note)};
}

struct Tolerances {
  double einstein = 1e-8;
  double lambda_spread = 1e-8;
  double para_kahler = 1e-8;
  double isometry = 1e-8;
  double rho_oracle = 1e-10;
  double q_oracle = 1e-12;
  double contraction = 1e-10;
  double reduction = 1e-12;
  double homogeneity = 1e-12;
};

inline std::vector<CheckResult> para_kahler_checks(std::span<const PointSample> samples, double tol) {
  ParaKahlerMetrics worst;
  for (const auto& s : samples) {
    const auto m = para_kahler_metrics(s.h, s.omega);
    worst.i_squared = std::max(worst.i_squared, m.i_squared);
    worst.eigen_rank = std::max(worst.eigen_rank, m.eigen_rank);
    worst.isotropy = std::max(worst.isotropy, m.isotropy);
    worst.lagrangian = std::max(worst.lagrangian, m.lagrangian);
    worst.closedness = std::max(worst.closedness, m.closedness);
    worst.nondegeneracy = std::max(worst.nondegeneracy, m.nondegeneracy);
    worst.signature = std::max(worst.signature, m.signature);
    worst.trace_i = std::max(worst.trace_i, m.trace_i);
  }
  const int k = static_cast<int>(samples.size());
  return {
      make_check("para_kahler", "i_squared_identity", worst.i_squared, tol, k),
      make_check("para_kahler", "eigenbundle_rank", worst.eigen_rank, tol, k, "|rank - n| summed over ±1"),
      make_check("para_kahler", "eigenbundle_isotropic", worst.isotropy, tol, k),
      make_check("para_kahler", "eigenbundle_lagrangian", worst.lagrangian, tol, k),
      make_check("para_kahler", "omega_closed", worst.closedness, tol, k),
      make_check("para_kahler", "omega_nondegenerate", worst.nondegeneracy, tol, k, "| |det Ω| 4^n - 1 |"),
      make_check("para_kahler", "metric_split_signature", worst.signature, tol, k),
      make_check("para_kahler", "trace_free_i", worst.trace_i, tol, k),
  };
}

// ---- isometry ------------------------------------------------------------------

struct IsometryResult {
  double deviation_plus = 0.0;   // F(x, xi) = (x, xi + Υ(x))
  double deviation_minus = 0.0;  // F(x, xi) = (x, xi - Υ(x))
  int sign = 0;                  // passing sign, 0 when neither passes

  [[nodiscard]] double deviation() const {
    return sign > 0 ? deviation_plus : sign < 0 ? deviation_minus : std::min(deviation_plus, deviation_minus);
  }
};

/// Compares h(c) with F_s^* h(ĉ), ĉ the gauge of c by Υ, for s = ±1.
inline IsometryResult isometry_check(const StructureSpec& spec, const Connection& c, std::span<const PolyField> upsilon,
                                     std::span<const CotangentPoint> points, double tol,
                                     const ConstructionOptions& opts = {}, int threads = 0) {
  const Connection gauged = gauge_transform(c, std::vector<PolyField>(upsilon.begin(), upsilon.end()), spec);
  const auto n = static_cast<std::size_t>(spec.dim());
  struct Dev {
    double plus = 0.0;
    double minus = 0.0;
  };
  const auto devs = parallel_map(
      points.size(),
      [&](std::size_t idx) {
        const auto& p = points[idx];
        const Tensor<double> h = values(evaluate_cotangent(spec, c, p, 0, opts).h);
        std::vector<Jet> ups(n);
        for (std::size_t a = 0; a < n; ++a) ups[a] = jet_eval(upsilon[a], p.x, 1);
        Dev d;
        for (int s : {1, -1}) {
          CotangentPoint moved = p;
          for (std::size_t a = 0; a < n; ++a) moved.xi[a] += s * ups[a].value();
          const Tensor<double> hh = values(evaluate_cotangent(spec, gauged, moved, 0, opts).h);
          Tensor<double> jac = identity<double>(2 * n);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) jac(n + i, j) = s * ups[i].derivative(static_cast<int>(j)).value();
          const Tensor<double> pulled = matmul(transpose(jac), matmul(hh, jac));
          const double dev = max_abs_diff(pulled, h) / (1.0 + max_abs(h));
          (s > 0 ? d.plus : d.minus) = dev;
        }
        return d;
      },
      threads);
  IsometryResult r;
  for (const auto& d : devs) {
    r.deviation_plus = std::max(r.deviation_plus, d.plus);
    r.deviation_minus = std::max(r.deviation_minus, d.minus);
  }
  if (r.deviation_minus <= tol) {
    r.sign = -1;
  } else if (r.deviation_plus <= tol) {
    r.sign = 1;
  }
  return r;
}

// ---- oracle pairs --------------------------------------------------------------

struct CrosscheckResult {
  double rho_generic_vs_closed = 0.0;
  double q_generic_vs_closed = 0.0;
  double contraction_vs_ricci = 0.0;
  std::optional<double> reduction;  // grassmannian m = 1 only
};

inline double relative_jet_diff(const Tensor<Jet>& a, const Tensor<Jet>& b) {
  double scale = 0.0;
  for (const auto& j : a.flat()) scale = std::max(scale, max_abs_coeff(j));
  return max_abs_diff(a, b) / (1.0 + scale);
}

inline CrosscheckResult crosscheck_point(const StructureSpec& spec, const Connection& c, const CotangentPoint& p,
                                         const ConstructionOptions& opts = {}) {
  CrosscheckResult r;
  const auto ric = ricci(c, p.x, 1, opts.ricci);
  const auto ls = make_local_structure(spec, p.x, 1);
  const auto pc = rho_closed_form(ls, ric);
  const auto pg = rho_generic(ls, ric);
  r.rho_generic_vs_closed = relative_jet_diff(pc, pg);
  r.contraction_vs_ricci = relative_jet_diff(ricci_type_contraction(partial_rho(ls, pc)), ric);

  const auto lv = local_values(ls);
  const auto qc = q_closed_form<double>(lv, p.xi);
  const auto qg = q_generic<double>(lv, p.xi);
  r.q_generic_vs_closed = max_abs_diff(qc, qg) / (1.0 + max_abs(qc));

  if (spec.kind() == StructureKind::grassmannian && spec.m() == 1) {
    const auto proj = StructureSpec::projective(spec.n());
    const auto fg = evaluate_cotangent(spec, c, p, 0, opts);
    const auto fp = evaluate_cotangent(proj, c, p, 0, opts);
    const double scale = 1.0 + max_abs(values(fg.h));
    double d = max_abs_diff(values(fg.h), values(fp.h));
    d = std::max(d, max_abs_diff(values(fg.q), values(fp.q)));
    d = std::max(d, max_abs_diff(values(fg.rho), values(fp.rho)));
    r.reduction = d / scale;
  }
  return r;
}

inline std::vector<CheckResult> crosscheck_suite(const StructureSpec& spec, const Connection& c,
                                                 std::span<const CotangentPoint> points, const Tolerances& tol,
                                                 const ConstructionOptions& opts = {}, int threads = 0) {
  const auto per = parallel_map(
      points.size(), [&](std::size_t i) { return crosscheck_point(spec, c, points[i], opts); }, threads);
  CrosscheckResult worst;
  for (const auto& r : per) {
    worst.rho_generic_vs_closed = std::max(worst.rho_generic_vs_closed, r.rho_generic_vs_closed);
    worst.q_generic_vs_closed = std::max(worst.q_generic_vs_closed, r.q_generic_vs_closed);
    worst.contraction_vs_ricci = std::max(worst.contraction_vs_ricci, r.contraction_vs_ricci);
    if (r.reduction) worst.reduction = std::max(worst.reduction.value_or(0.0), *r.reduction);
  }
  const int k = static_cast<int>(points.size());
  std::vector<CheckResult> out{
      make_check("crosscheck", "rho_generic_vs_closed_form", worst.rho_generic_vs_closed, tol.rho_oracle, k,
                 "order-1 jets"),
      make_check("crosscheck", "q_generic_vs_closed_form", worst.q_generic_vs_closed, tol.q_oracle, k),
      make_check("crosscheck", "contraction_of_partial_rho_vs_ricci", worst.contraction_vs_ricci, tol.contraction, k,
                 "order-1 jets"),
  };
  if (worst.reduction) {
    out.push_back(make_check("crosscheck", "grassmannian_m1_vs_projective", *worst.reduction, tol.reduction, k,
                             "P, q and h"));
  }
  return out;
}

// ---- homogeneity / semibasic ---------------------------------------------------

struct HomogeneityResult {
  double homogeneity = 0.0;
  double semibasic = 0.0;
};

inline HomogeneityResult homogeneity_semibasic_check(const StructureSpec& spec, std::span<const CotangentPoint> points,
                                                     std::span<const double> ts) {
  HomogeneityResult r;
  const auto n = static_cast<std::size_t>(spec.dim());
  for (const auto& p : points) {
    const auto q = q_tensor(spec, p);
    const double scale = 1.0 + max_abs(q);
    for (std::size_t a = 0; a < 2 * n; ++a)
      for (std::size_t b = n; b < 2 * n; ++b) {
        r.semibasic = std::max(r.semibasic, std::abs(q(a, b)) / scale);
        r.semibasic = std::max(r.semibasic, std::abs(q(b, a)) / scale);
      }
    for (double t : ts) {
      CotangentPoint scaled = p;
      for (auto& v : scaled.xi) v *= t;
      const auto qt = q_tensor(spec, scaled);
      double d = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) d = std::max(d, std::abs(qt.flat()[i] - t * t * q.flat()[i]));
      r.homogeneity = std::max(r.homogeneity, d / (1.0 + t * t * max_abs(q)));
    }
  }
  return r;
}

}  // namespace pke
