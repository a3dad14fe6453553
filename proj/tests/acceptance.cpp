// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <pke/report.hpp>
#include <pke/scenario.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace {

struct Config {
  std::string label;
  pke::StructureKind kind;
  int n;
  int m;
  bool lorentzian;
};

struct Case {
  std::string config;
  pke::Scenario sc;
  pke::VerificationReport rep;
};

constexpr int seeds = 5;
constexpr int points = 20;

const std::vector<Config>& configs() {
  static const std::vector<Config> c{
      {"projective n=2", pke::StructureKind::projective, 2, 1, false},
      {"projective n=3", pke::StructureKind::projective, 3, 1, false},
      {"conformal n=3", pke::StructureKind::conformal, 3, 1, false},
      {"conformal n=4", pke::StructureKind::conformal, 4, 1, false},
      {"conformal n=3 lorentzian", pke::StructureKind::conformal, 3, 1, true},
      {"conformal n=4 lorentzian", pke::StructureKind::conformal, 4, 1, true},
      {"grassmannian 1x3", pke::StructureKind::grassmannian, 3, 1, false},
      {"grassmannian 2x2", pke::StructureKind::grassmannian, 2, 2, false},
  };
  return c;
}

pke::Scenario make(const Config& c, std::uint64_t seed) {
  pke::GenerateRequest req;
  req.seed = seed;
  req.kind = c.kind;
  req.n = c.n;
  req.m = c.m;
  req.lorentzian = c.lorentzian;
  req.points = points;
  const auto doc = pke::generate_scenario(req);
  return pke::ScenarioSet(doc).get(doc.at("id").get<std::string>());
}

double worst(const std::vector<Case>& cases, const std::string& section, const std::string& name) {
  double w = 0.0;
  for (const auto& c : cases)
    for (const auto& ch : c.rep.checks)
      if (ch.section == section && ch.name == name) w = std::max(w, ch.residual);
  return w;
}

pke::Tensor<double> to_tensor(const pke::json& rows) {
  const auto r = rows.size();
  const auto c = rows.at(0).size();
  pke::Tensor<double> t({r, c});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t(i, j) = rows.at(i).at(j).get<double>();
  return t;
}

int failures = 0;

void report(int k, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %d: %s  %s  (%s)\n", k, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string sci(double v) { return pke::format_sci(v); }

}  // namespace

int main() {
  try {
    std::vector<Case> cases;
    for (const auto& cfg : configs()) {
      for (std::uint64_t s = 1; s <= seeds; ++s) {
        Case c{cfg.label, make(cfg, s), {}};
        c.rep = pke::run_verification(c.sc);
        if (!c.rep.error.empty()) std::printf("  error in %s: %s\n", c.sc.id.c_str(), c.rep.error.c_str());
        cases.push_back(std::move(c));
      }
    }
    bool any_error = false;
    for (const auto& c : cases) any_error = any_error || !c.rep.error.empty();

    // 1. Einstein
    {
      const double w = worst(cases, "einstein", "residual");
      report(1, !any_error && w < 1e-8, "Einstein residual < 1e-8",
             std::to_string(cases.size()) + " scenarios x " + std::to_string(points) + " points, max " + sci(w));
    }

    // 2. λ constancy and gauge invariance
    {
      const double spread = worst(cases, "einstein", "lambda_spread");
      // Gauge-equivalent triples: the scenario, its base connection, and a
      // further gauge of the scenario by an unrelated Υ.
      double gauge_dev = 0.0;
      std::map<std::string, std::pair<double, double>> range;
      for (const auto& c : cases) {
        const auto pts = pke::sample_points(c.sc.spec.dim(), points, c.sc.sampling.seed, 1.0);
        const double lam = c.rep.lambda.value_or(std::nan(""));
        const double base = pke::einstein_residual(c.sc.spec, c.sc.gauge->base, pts).lambda;
        const auto regauged = pke::gauge_transform(
            c.sc.connection, pke::auxiliary_upsilon(c.sc.spec.dim(), c.sc.sampling.seed + 100), c.sc.spec);
        const double again = pke::einstein_residual(c.sc.spec, regauged, pts).lambda;
        gauge_dev = std::max({gauge_dev, std::abs(lam - base), std::abs(lam - again)});
        auto [it, fresh] = range.try_emplace(c.config, lam, lam);
        it->second.first = std::min(it->second.first, lam);
        it->second.second = std::max(it->second.second, lam);
      }
      // Gauges of the flat model across seeds are gauge-equivalent too.
      double across = 0.0;
      for (const auto& [label, r] : range)
        if (label.rfind("conformal", 0) != 0) across = std::max(across, r.second - r.first);
      report(2, !any_error && spread < 1e-8 && gauge_dev < 1e-8 && across < 1e-8,
             "lambda spread < 1e-8 and gauge invariant < 1e-8",
             "spread " + sci(spread) + ", gauge triples " + sci(gauge_dev) + ", across flat-model seeds " + sci(across));
    }

    // 3. para-Kähler
    {
      double w = 0.0;
      std::string which;
      for (const char* name : {"i_squared_identity", "eigenbundle_rank", "eigenbundle_isotropic", "eigenbundle_lagrangian",
                               "omega_closed", "omega_nondegenerate"}) {
        const double r = worst(cases, "para_kahler", name);
        if (r >= w) {
          w = r;
          which = name;
        }
      }
      report(3, !any_error && w < 1e-8, "para-Kahler axioms < 1e-8", "max " + sci(w) + " (" + which + ")");
    }

    // 4. isometry
    {
      const double w = worst(cases, "isometry", "fiber_translation");
      bool same = true;
      for (const auto& c : cases) same = same && c.rep.isometry_sign_found == pke::isometry_sign;
      report(4, !any_error && w < 1e-8 && same, "fiber translation is an isometry < 1e-8, one sign everywhere",
             "sign " + std::to_string(pke::isometry_sign) + (same ? " in every scenario" : " NOT in every scenario") +
                 ", max deviation " + sci(w));
    }

    // 5. oracle pairs
    {
      const double r = worst(cases, "crosscheck", "rho_generic_vs_closed_form");
      const double q = worst(cases, "crosscheck", "q_generic_vs_closed_form");
      const double c = worst(cases, "crosscheck", "contraction_of_partial_rho_vs_ricci");
      report(5, !any_error && r < 1e-10 && q < 1e-12 && c < 1e-10, "oracle pairs",
             "rho " + sci(r) + " < 1e-10, q " + sci(q) + " < 1e-12, contraction " + sci(c) + " < 1e-10");
    }

    // 6. Grassmannian m=1 against projective, entrywise
    {
      double w = 0.0;
      for (const auto& c : cases) {
        if (c.sc.spec.kind() != pke::StructureKind::grassmannian || c.sc.spec.m() != 1) continue;
        const auto proj = pke::StructureSpec::projective(c.sc.spec.n());
        for (const auto& p : pke::sample_points(c.sc.spec.dim(), points, c.sc.sampling.seed, 1.0)) {
          const auto a = pke::evaluate_cotangent(c.sc.spec, c.sc.connection, p, 0);
          const auto b = pke::evaluate_cotangent(proj, c.sc.connection, p, 0);
          w = std::max({w, pke::max_abs_diff(pke::values(a.rho), pke::values(b.rho)),
                        pke::max_abs_diff(pke::values(a.q), pke::values(b.q)),
                        pke::max_abs_diff(pke::values(a.h), pke::values(b.h))});
        }
      }
      report(6, w < 1e-12, "Grassmannian m=1 reproduces projective P, q, h < 1e-12", "max " + sci(w));
    }

    // 7. homogeneity / semibasic
    {
      const double h = worst(cases, "homogeneity", "q_degree_two");
      const double s = worst(cases, "homogeneity", "q_semibasic");
      report(7, !any_error && h < 1e-12 && s < 1e-12, "q homogeneous of degree 2 and semibasic < 1e-12",
             "t in {-3,-1,1/2,2}: " + sci(h) + ", vertical " + sci(s));
    }

    // 8. negative controls
    {
      bool ok = true;
      std::string detail;
      for (auto m : {pke::Mutation::drop_q, pke::Mutation::flip_sym_rho, pke::Mutation::swap_ricci, pke::Mutation::drop_half}) {
        pke::RunOptions ro;
        ro.mutation = m;
        ro.checks = pke::CheckSelection::parse("einstein");
        double best = 0.0;
        for (std::size_t i = 0; i < cases.size(); i += seeds) {
          const auto rep = pke::run_verification(cases[i].sc, ro);
          for (const auto& ch : rep.checks)
            if (ch.name == "residual") best = std::max(best, ch.residual);
        }
        ok = ok && best >= 1e-2;
        detail += std::string(detail.empty() ? "" : ", ") + pke::to_string(m) + " " + sci(best);
      }
      report(8, ok, "each mutation breaks Einstein with residual >= 1e-2", detail);
    }

    // 9. golden regressions
    {
      bool ok = true;
      std::string detail;
      const std::string dir = PKE_GOLDEN_DIR;
      int matched = 0;
      const auto flat = pke::read_json_file(dir + "/flat_h.json");
      for (const auto& g : flat.at("cases")) {
        const auto spec = pke::structure_from_json(g.at("structure"), pke::default_max_degree, "golden");
        const pke::CotangentPoint p{g.at("x").get<std::vector<double>>(), g.at("xi").get<std::vector<double>>()};
        const auto h = pke::values(pke::evaluate_cotangent(spec, pke::Connection::flat(spec.dim()), p, 0).h);
        if (h == to_tensor(g.at("h"))) {
          ++matched;
        } else {
          ok = false;
          detail += "mismatch: " + g.at("name").get<std::string>() + "; ";
        }
      }
      ok = ok && matched == static_cast<int>(flat.at("cases").size()) && matched > 0;
      detail += std::to_string(matched) + " flat h matrices exact";

      const auto sphere = pke::read_json_file(dir + "/round_sphere_rho.json");
      const auto sc = pke::ScenarioSet(sphere.at("scenario")).get("round-sphere");
      const auto at = sphere.at("at").get<std::vector<double>>();
      const auto p0 = pke::values(pke::rho(sc.spec, sc.connection, at, 0));
      const double dp = pke::max_abs_diff(p0, to_tensor(sphere.at("rho")));
      ok = ok && dp == 0.0;
      detail += ", sphere P(0) deviation " + sci(dp);

      const auto lam = pke::read_json_file(dir + "/lambda.json");
      const double tol = lam.at("tolerance").get<double>();
      double dl = 0.0;
      for (const auto& c : cases) {
        std::string key = c.config;
        if (const auto pos = key.find(" lorentzian"); pos != std::string::npos) key.erase(pos);
        dl = std::max(dl, std::abs(c.rep.lambda.value_or(std::nan("")) - lam.at("lambda").at(key).get<double>()));
      }
      ok = ok && !any_error && dl < tol;
      detail += ", frozen lambda deviation " + sci(dl);
      report(9, ok, "golden regressions", detail);
    }
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%s\n", failures == 0 ? "all criteria PASS" : "some criteria FAIL");
  return failures == 0 ? 0 : 1;
}
