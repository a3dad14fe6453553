#pragma once

// Scenario files (JSON, schema "pke-scenario/1") and the seeded generator.
// The format is documented in docs/FORMATS.md.

#include <pke/connection.hpp>
#include <pke/error.hpp>
#include <pke/poly_field.hpp>
#include <pke/sampling.hpp>
#include <pke/structure.hpp>
#include <pke/verify.hpp>

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pke {

using json = nlohmann::json;

inline constexpr const char* scenario_schema = "pke-scenario/1";
inline constexpr int default_max_degree = 4;

struct Sampling {
  std::uint64_t seed = 1;
  int points = 20;
  double radius = 1.0;
};

struct GaugeInfo {
  Connection base;
  std::vector<PolyField> upsilon;
};

struct Scenario {
  std::string id;
  StructureSpec spec = StructureSpec::projective(2);
  Connection connection = Connection::flat(2);
  std::optional<GaugeInfo> gauge;
  Sampling sampling;
  Tolerances tolerances;
  int jet_order = 2;
  int omega_sign = 1;
  int max_degree = default_max_degree;
  json document;  // the scenario as read, for echoing into reports
};

namespace detail {

[[noreturn]] inline void fail(ErrorKind kind, const std::string& where, const std::string& what) {
  throw Error(kind, where + ": " + what);
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(ErrorKind::parse, where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

inline int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(ErrorKind::parse, where, "expected an integer");
  return v.get<int>();
}

inline double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorKind::parse, where, "expected a number");
  return v.get<double>();
}

}  // namespace detail

// ---- polynomials -----------------------------------------------------------------

inline PolyField poly_from_json(const json& j, int dim, int max_degree, const std::string& where) {
  if (!j.is_array()) detail::fail(ErrorKind::parse, where, "polynomial must be a list of {exponents, coefficient}");
  std::vector<Monomial> monos;
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "[" + std::to_string(t) + "]";
    const auto& m = j[t];
    const auto& e = detail::require(m, "exponents", w);
    if (!e.is_array()) detail::fail(ErrorKind::parse, w, "exponents must be a list");
    if (static_cast<int>(e.size()) != dim) {
      detail::fail(ErrorKind::dimension_mismatch, w,
                   "exponent tuple has length " + std::to_string(e.size()) + ", chart dimension is " + std::to_string(dim));
    }
    Monomial mono;
    int deg = 0;
    for (const auto& x : e) {
      const int v = detail::get_int(x, w + ".exponents");
      if (v < 0) detail::fail(ErrorKind::parse, w, "negative exponent");
      mono.exponents.push_back(v);
      deg += v;
    }
    if (deg > max_degree) {
      detail::fail(ErrorKind::invalid_argument, w,
                   "monomial degree " + std::to_string(deg) + " exceeds max_degree " + std::to_string(max_degree));
    }
    mono.coefficient = detail::get_number(detail::require(m, "coefficient", w), w + ".coefficient");
    monos.push_back(std::move(mono));
  }
  return PolyField(dim, std::move(monos));
}

inline json poly_to_json(const PolyField& f) {
  json out = json::array();
  for (const auto& m : f.monomials()) out.push_back({{"exponents", m.exponents}, {"coefficient", m.coefficient}});
  return out;
}

inline std::vector<PolyField> form_from_json(const json& j, int dim, int max_degree, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    detail::fail(ErrorKind::dimension_mismatch, where, "one-form must list " + std::to_string(dim) + " polynomials");
  }
  std::vector<PolyField> out;
  for (int i = 0; i < dim; ++i) {
    out.push_back(poly_from_json(j[static_cast<std::size_t>(i)], dim, max_degree, where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json form_to_json(std::span<const PolyField> form) {
  json out = json::array();
  for (const auto& f : form) out.push_back(poly_to_json(f));
  return out;
}

inline MetricField metric_from_json(const json& j, int dim, int max_degree, const std::string& where) {
  if (j.contains("diagonal")) {
    const auto& d = j.at("diagonal");
    if (!d.is_array() || static_cast<int>(d.size()) != dim) {
      detail::fail(ErrorKind::dimension_mismatch, where, "diagonal must have " + std::to_string(dim) + " entries");
    }
    std::vector<double> diag;
    for (const auto& v : d) diag.push_back(detail::get_number(v, where + ".diagonal"));
    return MetricField::diagonal(diag);
  }
  const auto& e = detail::require(j, "entries", where);
  if (!e.is_array() || static_cast<int>(e.size()) != dim) {
    detail::fail(ErrorKind::dimension_mismatch, where, "entries must be a " + std::to_string(dim) + "×" +
                                                           std::to_string(dim) + " matrix of polynomials");
  }
  const auto d = static_cast<std::size_t>(dim);
  Tensor<PolyField> entries({d, d}, PolyField(dim));
  for (std::size_t i = 0; i < d; ++i) {
    if (!e[i].is_array() || e[i].size() != d) detail::fail(ErrorKind::dimension_mismatch, where, "entries row size");
    for (std::size_t k = 0; k < d; ++k) {
      entries(i, k) = poly_from_json(e[i][k], dim, max_degree,
                                     where + ".entries[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  PolyField denom = PolyField::constant(dim, 1.0);
  if (j.contains("denominator")) denom = poly_from_json(j.at("denominator"), dim, max_degree, where + ".denominator");
  try {
    return MetricField(std::move(entries), std::move(denom));
  } catch (const Error& err) {
    detail::fail(err.kind(), where, err.what());
  }
}

inline json metric_to_json(const MetricField& g) {
  json rows = json::array();
  const auto d = static_cast<std::size_t>(g.dim());
  for (std::size_t i = 0; i < d; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < d; ++k) row.push_back(poly_to_json(g.entries()(i, k)));
    rows.push_back(row);
  }
  return {{"entries", rows}, {"denominator", poly_to_json(g.denominator())}};
}

// ---- loading ---------------------------------------------------------------------

inline StructureSpec structure_from_json(const json& j, int max_degree, const std::string& where) {
  const auto& kind_j = detail::require(j, "kind", where);
  if (!kind_j.is_string()) detail::fail(ErrorKind::parse, where, "kind must be a string");
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "projective") return StructureSpec::projective(detail::get_int(detail::require(j, "n", where), where + ".n"));
    if (kind == "grassmannian") {
      return StructureSpec::grassmannian(detail::get_int(detail::require(j, "m", where), where + ".m"),
                                         detail::get_int(detail::require(j, "n", where), where + ".n"));
    }
    if (kind == "conformal") {
      const int n = detail::get_int(detail::require(j, "n", where), where + ".n");
      if (n < 3) {
        throw Error(ErrorKind::unsupported_dimension,
                    "conformal requires n >= 3 (the Rho normalization divides by n - 2)");
      }
      MetricField g = j.contains("metric") ? metric_from_json(j.at("metric"), n, max_degree, where + ".metric")
                                           : MetricField::euclidean(n);
      return StructureSpec::conformal(std::move(g));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::unsupported_dimension) detail::fail(e.kind(), where, e.what());
    throw;
  }
  detail::fail(ErrorKind::parse, where, "unknown structure kind '" + kind + "'");
}

class ScenarioSet {
 public:
  explicit ScenarioSet(json doc, std::string origin = "<memory>") : origin_(std::move(origin)) {
    if (doc.is_object() && doc.contains("scenarios")) {
      const auto& list = doc.at("scenarios");
      if (!list.is_array()) detail::fail(ErrorKind::parse, origin_, "'scenarios' must be a list");
      for (const auto& s : list) add_raw(s);
    } else {
      add_raw(doc);
    }
  }

  [[nodiscard]] std::vector<std::string> ids() const { return order_; }

  [[nodiscard]] Scenario get(const std::string& id) const {
    std::set<std::string> visiting;
    return build(id, visiting);
  }

  [[nodiscard]] std::vector<Scenario> all() const {
    std::vector<Scenario> out;
    for (const auto& id : order_) out.push_back(get(id));
    return out;
  }

 private:
  void add_raw(const json& s) {
    if (!s.is_object()) detail::fail(ErrorKind::parse, origin_, "scenario must be an object");
    if (s.contains("schema") && s.at("schema") != scenario_schema) {
      detail::fail(ErrorKind::parse, origin_, "unsupported schema " + s.at("schema").dump());
    }
    // An unnamed scenario is called after its position in the file.
    const json id_j = s.contains("id") ? s.at("id") : json("scenario-" + std::to_string(order_.size() + 1));
    if (!id_j.is_string()) detail::fail(ErrorKind::parse, origin_, "id must be a string");
    const std::string id = id_j.get<std::string>();
    if (raw_.count(id)) detail::fail(ErrorKind::parse, origin_, "duplicate scenario id '" + id + "'");
    raw_[id] = s;
    order_.push_back(id);
  }

  Scenario build(const std::string& id, std::set<std::string>& visiting) const {
    auto it = raw_.find(id);
    if (it == raw_.end()) detail::fail(ErrorKind::resolution, origin_, "unknown scenario id '" + id + "'");
    if (!visiting.insert(id).second) detail::fail(ErrorKind::resolution, origin_, "cyclic gauge base reference at '" + id + "'");
    const json& s = it->second;
    const std::string where = "scenario '" + id + "'";
    Scenario sc;
    sc.id = id;
    sc.document = s;
    if (s.contains("max_degree")) sc.max_degree = detail::get_int(s.at("max_degree"), where + ".max_degree");
    if (sc.max_degree < 0) detail::fail(ErrorKind::invalid_argument, where, "max_degree must be >= 0");
    sc.spec = structure_from_json(detail::require(s, "structure", where), sc.max_degree, where + ".structure");
    const json conn = s.contains("connection") ? s.at("connection") : json{{"source", "flat"}};
    sc.connection = connection_from_json(conn, sc, visiting, where + ".connection", &sc.gauge);
    if (s.contains("sampling")) {
      const auto& sm = s.at("sampling");
      const std::string w = where + ".sampling";
      if (sm.contains("seed")) {
        if (!sm.at("seed").is_number_unsigned() && !sm.at("seed").is_number_integer()) {
          detail::fail(ErrorKind::parse, w, "seed must be a non-negative integer");
        }
        sc.sampling.seed = sm.at("seed").get<std::uint64_t>();
      }
      if (sm.contains("points")) sc.sampling.points = detail::get_int(sm.at("points"), w + ".points");
      if (sm.contains("radius")) sc.sampling.radius = detail::get_number(sm.at("radius"), w + ".radius");
      if (sc.sampling.points < 2) detail::fail(ErrorKind::invalid_argument, w, "points must be >= 2");
      if (!(sc.sampling.radius > 0.0)) detail::fail(ErrorKind::invalid_argument, w, "radius must be positive");
    }
    if (sc.spec.has_metric()) check_metric(sc.spec.metric(), sc.sampling, where + ".structure.metric");
    if (s.contains("tolerances")) read_tolerances(s.at("tolerances"), sc.tolerances, where + ".tolerances");
    if (s.contains("jet_order")) sc.jet_order = detail::get_int(s.at("jet_order"), where + ".jet_order");
    if (sc.jet_order < 2 || sc.jet_order > 3) {
      detail::fail(ErrorKind::invalid_argument, where, "jet_order must be 2 or 3 (Ricci of h needs second derivatives)");
    }
    if (s.contains("omega_sign")) sc.omega_sign = detail::get_int(s.at("omega_sign"), where + ".omega_sign");
    if (sc.omega_sign != 1 && sc.omega_sign != -1) detail::fail(ErrorKind::invalid_argument, where, "omega_sign must be 1 or -1");
    visiting.erase(id);
    return sc;
  }

  /// The metric must be invertible wherever verification samples it.
  static void check_metric(const MetricField& g, const Sampling& sm, const std::string& where) {
    std::vector<std::vector<double>> xs{std::vector<double>(static_cast<std::size_t>(g.dim()), 0.0)};
    for (const auto& p : sample_points(g.dim(), sm.points, sm.seed, sm.radius)) xs.push_back(p.x);
    for (const auto& x : xs) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(g.value(x)));
      const auto& sv = svd.singularValues();
      if (!(sv(sv.size() - 1) > 1e-10 * sv(0))) {
        detail::fail(ErrorKind::degenerate_metric, where, "metric is degenerate inside the sampling box");
      }
    }
  }

  static void read_tolerances(const json& t, Tolerances& out, const std::string& where) {
    if (!t.is_object()) detail::fail(ErrorKind::parse, where, "tolerances must be an object");
    const std::map<std::string, double*> slots{
        {"einstein", &out.einstein},       {"lambda_spread", &out.lambda_spread}, {"para_kahler", &out.para_kahler},
        {"isometry", &out.isometry},       {"rho_oracle", &out.rho_oracle},       {"q_oracle", &out.q_oracle},
        {"contraction", &out.contraction}, {"reduction", &out.reduction},         {"homogeneity", &out.homogeneity},
    };
    for (const auto& [key, value] : t.items()) {
      auto it = slots.find(key);
      if (it == slots.end()) detail::fail(ErrorKind::parse, where, "unknown tolerance '" + key + "'");
      const double v = detail::get_number(value, where + "." + key);
      if (!(v > 0.0)) detail::fail(ErrorKind::invalid_argument, where, key + " must be positive");
      *it->second = v;
    }
  }

  Connection connection_from_json(const json& c, const Scenario& sc, std::set<std::string>& visiting,
                                  const std::string& where, std::optional<GaugeInfo>* gauge_out) const {
    const int n = sc.spec.dim();
    if (c.is_string()) {
      // Bare id: reuse another scenario's connection.
      Scenario base = build(c.get<std::string>(), visiting);
      check_same_chart(base, sc, where);
      return base.connection;
    }
    const auto& src_j = detail::require(c, "source", where);
    if (!src_j.is_string()) detail::fail(ErrorKind::parse, where, "source must be a string");
    const std::string src = src_j.get<std::string>();
    try {
      if (src == "flat") return Connection::flat(n);
      if (src == "table") return table_from_json(c, n, sc.max_degree, where);
      if (src == "levi_civita" || src == "weyl") {
        MetricField g = c.contains("metric") ? metric_from_json(c.at("metric"), n, sc.max_degree, where + ".metric")
                        : sc.spec.has_metric() ? sc.spec.metric()
                                               : (detail::fail(ErrorKind::parse, where, "missing field 'metric'"), MetricField{});
        if (src == "levi_civita") return Connection::levi_civita(std::move(g));
        auto beta = form_from_json(detail::require(c, "beta", where), n, sc.max_degree, where + ".beta");
        return Connection::weyl(std::move(g), std::move(beta));
      }
      if (src == "gauge") {
        const auto& b = detail::require(c, "base", where);
        Connection base = Connection::flat(n);
        if (b.is_string()) {
          Scenario bs = build(b.get<std::string>(), visiting);
          check_same_chart(bs, sc, where);
          base = bs.connection;
        } else {
          base = connection_from_json(b, sc, visiting, where + ".base", nullptr);
        }
        auto ups = form_from_json(detail::require(c, "upsilon", where), n, sc.max_degree, where + ".upsilon");
        Connection out = Connection::gauge(base, ups, sc.spec);
        if (gauge_out) *gauge_out = GaugeInfo{base, std::move(ups)};
        return out;
      }
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind(where, 0) == 0 || msg.rfind("scenario", 0) == 0) throw;
      detail::fail(e.kind(), where, msg);
    }
    detail::fail(ErrorKind::parse, where, "unknown connection source '" + src + "'");
  }

  static void check_same_chart(const Scenario& base, const Scenario& sc, const std::string& where) {
    if (base.spec.dim() != sc.spec.dim()) {
      detail::fail(ErrorKind::dimension_mismatch, where,
                   "base scenario '" + base.id + "' has chart dimension " + std::to_string(base.spec.dim()) +
                       ", expected " + std::to_string(sc.spec.dim()));
    }
  }

  static Connection table_from_json(const json& c, int n, int max_degree, const std::string& where) {
    const auto d = static_cast<std::size_t>(n);
    Tensor<PolyField> gamma({d, d, d}, PolyField(n));
    Tensor<int> seen({d, d, d}, 0);
    const json entries = c.contains("gamma") ? c.at("gamma") : json::array();
    if (!entries.is_array()) detail::fail(ErrorKind::parse, where, "gamma must be a list of entries");
    for (std::size_t t = 0; t < entries.size(); ++t) {
      const std::string w = where + ".gamma[" + std::to_string(t) + "]";
      const auto& e = entries[t];
      const int k = detail::get_int(detail::require(e, "k", w), w + ".k");
      const int i = detail::get_int(detail::require(e, "i", w), w + ".i");
      const int j = detail::get_int(detail::require(e, "j", w), w + ".j");
      for (int v : {k, i, j}) {
        if (v < 0 || v >= n) detail::fail(ErrorKind::dimension_mismatch, w, "index out of range for chart dimension " + std::to_string(n));
      }
      const PolyField f = poly_from_json(detail::require(e, "poly", w), n, max_degree, w + ".poly");
      // Entries are mirrored (Γ^k_ij = Γ^k_ji); an explicit conflicting mirror is torsion.
      for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        if (seen(k, a, b) && !(gamma(k, a, b) == f)) {
          detail::fail(ErrorKind::torsion, w, "conflicting entries for Γ^" + std::to_string(k) + "_" + std::to_string(i) +
                                                  std::to_string(j) + " (the connection must be torsion-free)");
        }
        gamma(k, a, b) = f;
        seen(k, a, b) = 1;
      }
    }
    return Connection::from_table(std::move(gamma));
  }

  std::string origin_;
  std::map<std::string, json> raw_;
  std::vector<std::string> order_;
};

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, origin + ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

inline ScenarioSet load_scenario_file(const std::string& path) { return ScenarioSet(read_json_file(path), path); }

/// First scenario of the file, or the one named `id`.
inline Scenario load_scenario(const std::string& path, const std::string& id = {}) {
  const auto set = load_scenario_file(path);
  return set.get(id.empty() ? set.ids().front() : id);
}

// ---- generation ------------------------------------------------------------------

struct GenerateRequest {
  std::uint64_t seed = 1;
  StructureKind kind = StructureKind::projective;
  int n = 2;        // projective/conformal dimension, grassmannian F rank
  int m = 1;        // grassmannian E rank
  int degree = 2;   // max degree of the random polynomials
  bool lorentzian = false;
  int points = 20;
  double radius = 1.0;
};

namespace detail {

inline std::vector<std::vector<int>> monomials_up_to(int dim, int lo, int hi) {
  std::vector<std::vector<int>> out;
  const auto* lay = JetLayout::get(dim, hi);
  for (std::size_t idx = 0; idx < lay->size(); ++idx) {
    if (lay->degree(idx) < lo) continue;
    auto e = lay->exponents(idx);
    out.emplace_back(e.begin(), e.end());
  }
  return out;
}

/// Random polynomial with dyadic coefficients k/scale, |k| <= bound, each
/// monomial present with probability ½.
inline PolyField random_poly(Rng& rng, int dim, int lo, int hi, int bound, double scale) {
  std::vector<Monomial> monos;
  for (const auto& e : monomials_up_to(dim, lo, hi)) {
    if (rng.unit() < 0.5) continue;
    const int k = rng.integer(-bound, bound);
    if (k != 0) monos.push_back({e, k / scale});
  }
  return PolyField(dim, std::move(monos));
}

}  // namespace detail

inline json generate_scenario(const GenerateRequest& req) {
  if (req.degree < 0 || req.degree > default_max_degree) {
    throw Error(ErrorKind::invalid_argument, "degree must be in 0.." + std::to_string(default_max_degree));
  }
  StructureSpec spec = req.kind == StructureKind::grassmannian ? StructureSpec::grassmannian(req.m, req.n)
                       : req.kind == StructureKind::conformal  ? StructureSpec::conformal(MetricField::euclidean(req.n))
                                                               : StructureSpec::projective(req.n);
  const int dim = spec.dim();
  Rng rng(req.seed);
  std::vector<PolyField> ups;
  for (int a = 0; a < dim; ++a) ups.push_back(detail::random_poly(rng, dim, 0, req.degree, 8, 16.0));

  json doc;
  doc["schema"] = scenario_schema;
  std::string id = std::string(to_string(req.kind)) + "-";
  json structure{{"kind", to_string(req.kind)}};
  if (req.kind == StructureKind::grassmannian) {
    structure["m"] = req.m;
    structure["n"] = req.n;
    id += std::to_string(req.m) + "x" + std::to_string(req.n);
  } else {
    structure["n"] = req.n;
    id += "n" + std::to_string(req.n);
  }
  json base{{"source", "flat"}};
  if (req.kind == StructureKind::conformal) {
    // g = η + S with |S_ij| <= 3/(16 n) on the unit box, so g stays diagonally
    // dominant (hence invertible) wherever sampling may reach.
    const auto d = static_cast<std::size_t>(dim);
    Tensor<PolyField> entries({d, d}, PolyField(dim));
    const double scale = 16.0 * dim;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) {
        std::vector<Monomial> monos;
        const auto cand = detail::monomials_up_to(dim, 1, std::max(1, std::min(req.degree, 2)));
        for (int t = 0; t < 3; ++t) {
          const auto& e = cand[static_cast<std::size_t>(rng.integer(0, static_cast<int>(cand.size()) - 1))];
          const int k = rng.integer(-1, 1);
          monos.push_back({e, k / scale});
        }
        PolyField s(dim, monos);
        const double eta = (i == j) ? ((req.lorentzian && i == 0) ? -1.0 : 1.0) : 0.0;
        entries(i, j) = PolyField::constant(dim, eta) + s;
        entries(j, i) = entries(i, j);
      }
    MetricField g(entries);
    std::vector<PolyField> beta;
    for (int a = 0; a < dim; ++a) beta.push_back(detail::random_poly(rng, dim, 0, req.degree, 8, 16.0));
    structure["metric"] = metric_to_json(g);
    base = json{{"source", "weyl"}, {"beta", form_to_json(beta)}};
    if (req.lorentzian) id += "-lorentzian";
  }
  id += "-seed" + std::to_string(req.seed);
  doc["id"] = id;
  doc["structure"] = structure;
  doc["connection"] = json{{"source", "gauge"}, {"base", base}, {"upsilon", form_to_json(ups)}};
  doc["sampling"] = json{{"seed", req.seed}, {"points", req.points}, {"radius", req.radius}};
  doc["jet_order"] = 2;
  doc["omega_sign"] = 1;
  return doc;
}

/// Deterministic auxiliary Υ for isometry checks on scenarios that are not
/// themselves gauges.
inline std::vector<PolyField> auxiliary_upsilon(int dim, std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<PolyField> out;
  for (int a = 0; a < dim; ++a) out.push_back(detail::random_poly(rng, dim, 0, 2, 8, 16.0));
  return out;
}

}  // namespace pke
