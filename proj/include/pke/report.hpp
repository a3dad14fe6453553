#pragma once

// Runs the verification suite on a scenario and renders reports
// (schema "pke-report/1", or plain text).

#include <pke/cotangent.hpp>
#include <pke/error.hpp>
#include <pke/sampling.hpp>
#include <pke/scenario.hpp>
#include <pke/verify.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pke {

inline constexpr const char* report_schema = "pke-report/1";
/// Gauge by Υ corresponds to the fiber translation (x, xi) ↦ (x, xi - Υ(x)).
inline constexpr int isometry_sign = -1;

enum class Mutation { none, drop_q, flip_sym_rho, swap_ricci, drop_half, negate_q };

inline const char* to_string(Mutation m) {
  switch (m) {
    case Mutation::none: return "none";
    case Mutation::drop_q: return "drop_q";
    case Mutation::flip_sym_rho: return "flip_sym_rho";
    case Mutation::swap_ricci: return "swap_ricci";
    case Mutation::drop_half: return "drop_half";
    case Mutation::negate_q: return "negate_q";
  }
  return "?";
}

inline Mutation mutation_from_string(const std::string& s) {
  for (auto m : {Mutation::none, Mutation::drop_q, Mutation::flip_sym_rho, Mutation::swap_ricci, Mutation::drop_half,
                 Mutation::negate_q}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorKind::invalid_argument, "unknown mutation '" + s + "'");
}

/// Construction options with one ingredient deliberately broken.
inline ConstructionOptions mutated_options(Mutation m, int omega_sign = 1) {
  ConstructionOptions o;
  o.omega_sign = omega_sign;
  switch (m) {
    case Mutation::none: break;
    case Mutation::drop_q: o.q_factor = 0.0; break;
    case Mutation::flip_sym_rho: o.sym_rho_sign = -1.0; break;
    case Mutation::swap_ricci: o.ricci = RicciConvention::second_slot; break;
    case Mutation::drop_half:
      o.q_route = QRoute::generic;
      o.q_half = 1.0;
      break;
    case Mutation::negate_q: o.q_factor = -1.0; break;
  }
  return o;
}

struct CheckSelection {
  bool einstein = true;
  bool para_kahler = true;
  bool isometry = true;
  bool crosscheck = true;
  bool homogeneity = true;

  static CheckSelection none() { return {false, false, false, false, false}; }

  /// Comma-separated section names, or "all".
  static CheckSelection parse(const std::string& list) {
    if (list.empty() || list == "all") return {};
    CheckSelection s = none();
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "einstein") s.einstein = true;
      else if (item == "para_kahler") s.para_kahler = true;
      else if (item == "isometry") s.isometry = true;
      else if (item == "crosscheck") s.crosscheck = true;
      else if (item == "homogeneity") s.homogeneity = true;
      else throw Error(ErrorKind::invalid_argument, "unknown check section '" + item + "'");
    }
    return s;
  }
};

struct RunOptions {
  CheckSelection checks;
  Mutation mutation = Mutation::none;
  int threads = 0;
  std::optional<int> points;
  std::optional<double> tol;  // overrides the Einstein, λ-spread, para-Kähler and isometry tolerances
  std::optional<int> jet_order;
  std::optional<int> omega_sign;
  bool timing = false;
};

struct VerificationReport {
  std::string id;
  std::string structure;
  std::string mutation = "none";
  int omega_sign = 1;
  int jet_order = 2;
  Sampling sampling;
  std::vector<CheckResult> checks;
  std::optional<double> lambda;
  std::optional<double> lambda_spread;
  std::optional<int> isometry_sign_found;
  std::optional<double> seconds;
  std::string error;

  [[nodiscard]] bool passed() const {
    if (!error.empty()) return false;
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

inline VerificationReport run_verification(const Scenario& sc, const RunOptions& ro = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.id = sc.id;
  rep.structure = sc.spec.describe();
  rep.mutation = to_string(ro.mutation);
  rep.omega_sign = ro.omega_sign.value_or(sc.omega_sign);
  rep.jet_order = ro.jet_order.value_or(sc.jet_order);
  rep.sampling = sc.sampling;
  if (ro.points) rep.sampling.points = *ro.points;
  if (rep.omega_sign != 1 && rep.omega_sign != -1) throw Error(ErrorKind::invalid_argument, "omega sign must be 1 or -1");
  if (rep.jet_order < 2 || rep.jet_order > 3) throw Error(ErrorKind::invalid_argument, "jet order must be 2 or 3");
  if (rep.sampling.points < 2) throw Error(ErrorKind::invalid_argument, "at least 2 points are required");

  Tolerances tol = sc.tolerances;
  if (ro.tol) {
    if (!(*ro.tol > 0.0)) throw Error(ErrorKind::invalid_argument, "tolerance must be positive");
    tol.einstein = tol.lambda_spread = tol.para_kahler = tol.isometry = *ro.tol;
  }
  const auto opts = mutated_options(ro.mutation, rep.omega_sign);
  const auto points = sample_points(sc.spec.dim(), rep.sampling.points, rep.sampling.seed, rep.sampling.radius);
  const int k = static_cast<int>(points.size());

  try {
    if (ro.checks.einstein || ro.checks.para_kahler) {
      const auto samples = sample_points_parallel(sc.spec, sc.connection, points, opts, ro.threads, rep.jet_order);
      if (ro.checks.einstein) {
        const auto e = einstein_fit(samples);
        rep.lambda = e.lambda;
        rep.lambda_spread = e.spread;
        rep.checks.push_back(make_check("einstein", "residual", e.residual, tol.einstein, k,
                                        "max |Ric(h) - λh| / (1 + max|h|)"));
        rep.checks.push_back(make_check("einstein", "lambda_spread", e.spread, tol.lambda_spread, k));
      }
      if (ro.checks.para_kahler) {
        for (auto& c : para_kahler_checks(samples, tol.para_kahler)) rep.checks.push_back(std::move(c));
      }
    }
    if (ro.checks.isometry) {
      const Connection& base = sc.gauge ? sc.gauge->base : sc.connection;
      const auto ups = sc.gauge ? sc.gauge->upsilon : auxiliary_upsilon(sc.spec.dim(), rep.sampling.seed);
      const auto iso = isometry_check(sc.spec, base, ups, points, tol.isometry, opts, ro.threads);
      if (iso.sign != 0) rep.isometry_sign_found = iso.sign;
      char note[96];
      std::snprintf(note, sizeof note, "deviation for s=+1: %.3e", iso.deviation_plus);
      rep.checks.push_back(make_check("isometry", "fiber_translation", iso.deviation_minus, tol.isometry, k,
                                      std::string(sc.gauge ? "scenario gauge; " : "auxiliary gauge; ") + note));
    }
    if (ro.checks.crosscheck) {
      for (auto& c : crosscheck_suite(sc.spec, sc.connection, points, tol, opts, ro.threads)) rep.checks.push_back(std::move(c));
    }
    if (ro.checks.homogeneity) {
      const std::vector<double> ts{-3.0, -1.0, 0.5, 2.0};
      const auto h = homogeneity_semibasic_check(sc.spec, points, ts);
      rep.checks.push_back(make_check("homogeneity", "q_degree_two", h.homogeneity, tol.homogeneity, k,
                                      "t in {-3, -1, 1/2, 2}"));
      rep.checks.push_back(make_check("homogeneity", "q_semibasic", h.semibasic, tol.homogeneity, k));
    }
  } catch (const Error& e) {
    rep.error = e.what();
  }
  if (ro.timing) rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---- rendering -------------------------------------------------------------------

inline json conventions_json(int omega_sign) {
  return {
      {"coordinates", "(x^1..x^n, xi_1..xi_n), xi_i dual to x^i"},
      {"symmetric_product", "a⊙b = (a⊗b + b⊗a)/2"},
      {"wedge", "a∧b = (a⊗b - b⊗a)/2"},
      {"omega", "Ω = -dτ + s·Alt P"},
      {"omega_sign", omega_sign},
      {"ricci", "Ric(X,Y) = tr(Z ↦ R(Z,X)Y)"},
      {"rho_argument", "P(Y) = P(Y,·)"},
      {"isometry_sign", isometry_sign},
      {"isometry_map", "(x, xi) ↦ (x, xi + s·Υ(x))"},
      {"grassmannian_flattening", "x^{pq} at slot p*m + q (p in F, q in E)"},
  };
}

inline json report_to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"section", c.section},
                      {"name", c.name},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"samples", c.samples},
                      {"passed", c.passed},
                      {"note", c.note}});
  }
  json out{{"scenario", r.id},
           {"structure", r.structure},
           {"mutation", r.mutation},
           {"jet_order", r.jet_order},
           {"conventions", conventions_json(r.omega_sign)},
           {"sampling", {{"seed", r.sampling.seed}, {"points", r.sampling.points}, {"radius", r.sampling.radius}}},
           {"checks", checks},
           {"passed", r.passed()}};
  if (r.lambda) out["einstein"] = {{"lambda", *r.lambda}, {"spread", *r.lambda_spread}};
  if (r.isometry_sign_found) out["isometry_sign_found"] = *r.isometry_sign_found;
  if (!r.error.empty()) out["error"] = r.error;
  if (r.seconds) out["seconds"] = *r.seconds;
  return out;
}

inline json reports_to_json(const std::vector<VerificationReport>& reports) {
  json list = json::array();
  bool ok = true;
  for (const auto& r : reports) {
    list.push_back(report_to_json(r));
    ok = ok && r.passed();
  }
  return {{"schema", report_schema}, {"reports", list}, {"passed", ok}};
}

inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Text rendering of a structured report document.
inline std::string render_text(const json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != report_schema) {
    throw Error(ErrorKind::parse, "not a pke-report/1 document");
  }
  std::ostringstream os;
  for (const auto& r : doc.at("reports")) {
    os << "scenario " << r.at("scenario").get<std::string>() << "  " << r.at("structure").get<std::string>();
    if (r.value("mutation", "none") != "none") os << "  mutation=" << r.at("mutation").get<std::string>();
    os << "\n";
    const auto& cv = r.at("conventions");
    os << "  conventions: omega_sign=" << cv.at("omega_sign").get<int>()
       << " isometry_sign=" << cv.at("isometry_sign").get<int>() << " " << cv.at("symmetric_product").get<std::string>()
       << " " << cv.at("wedge").get<std::string>() << "\n";
    const auto& sm = r.at("sampling");
    os << "  sampling: seed=" << sm.at("seed").get<std::uint64_t>() << " points=" << sm.at("points").get<int>()
       << " radius=" << sm.at("radius").get<double>() << "\n";
    for (const auto& c : r.at("checks")) {
      std::string label = c.at("section").get<std::string>() + "/" + c.at("name").get<std::string>();
      label.resize(std::max<std::size_t>(label.size(), 48), ' ');
      os << "  [" << (c.at("passed").get<bool>() ? "PASS" : "FAIL") << "] " << label << " "
         << format_sci(c.at("residual").get<double>()) << " <= " << format_sci(c.at("tolerance").get<double>());
      const auto note = c.value("note", "");
      if (!note.empty()) os << "  (" << note << ")";
      os << "\n";
    }
    if (r.contains("einstein")) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.10f (spread %.3e)", r.at("einstein").at("lambda").get<double>(),
                    r.at("einstein").at("spread").get<double>());
      os << "  lambda = " << buf << "\n";
    }
    if (r.contains("isometry_sign_found")) os << "  isometry sign found: " << r.at("isometry_sign_found").get<int>() << "\n";
    if (r.contains("error")) os << "  error: " << r.at("error").get<std::string>() << "\n";
    if (r.contains("seconds")) os << "  time: " << r.at("seconds").get<double>() << " s\n";
    os << "  result: " << (r.at("passed").get<bool>() ? "PASS" : "FAIL") << "\n";
  }
  return os.str();
}

}  // namespace pke
