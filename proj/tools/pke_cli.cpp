// pke: verify, generate and inspect cotangent-bundle scenarios.
//
// Exit codes: 0 all checks pass, 1 certification failure, 2 input error.

#include <pke/cotangent.hpp>
#include <pke/report.hpp>
#include <pke/rho.hpp>
#include <pke/scenario.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using pke::json;

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_input = 2;

struct Globals {
  std::optional<double> tol;
  std::optional<int> jet_order;
  std::optional<int> omega_sign;
  std::optional<int> points;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw pke::Error(pke::ErrorKind::parse, std::string("cannot parse ") + what + " '" + s + "'");
    }
  }
  return out;
}

std::string matrix_text(const pke::Tensor<double>& m) {
  std::ostringstream os;
  char buf[32];
  for (std::size_t i = 0; i < m.extent(0); ++i) {
    os << "  ";
    for (std::size_t j = 0; j < m.extent(1); ++j) {
      std::snprintf(buf, sizeof buf, "% .12e ", m(i, j));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

json matrix_json(const pke::Tensor<double>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.extent(0); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.extent(1); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw pke::Error(pke::ErrorKind::parse, path + ": cannot write file");
  out << text;
}

int cmd_verify(const Globals& g, const std::string& file, const std::string& id, const std::string& checks,
               const std::string& format, const std::string& mutation, bool timing, int threads,
               const std::string& output) {
  pke::RunOptions ro;
  ro.checks = pke::CheckSelection::parse(checks);
  ro.mutation = pke::mutation_from_string(mutation);
  ro.threads = threads;
  ro.points = g.points;
  ro.tol = g.tol;
  ro.jet_order = g.jet_order;
  ro.omega_sign = g.omega_sign;
  ro.timing = timing;
  const auto set = pke::load_scenario_file(file);
  std::vector<pke::Scenario> scenarios;
  if (id.empty()) {
    scenarios = set.all();
  } else {
    scenarios.push_back(set.get(id));
  }
  std::vector<pke::VerificationReport> reports;
  for (const auto& sc : scenarios) reports.push_back(pke::run_verification(sc, ro));
  const json doc = pke::reports_to_json(reports);
  write_output(format == "structured" ? doc.dump(2) + "\n" : pke::render_text(doc), output);
  for (const auto& r : reports) {
    if (!r.passed()) {
      for (const auto& c : r.checks) {
        if (!c.passed) std::cerr << "FAIL " << r.id << ": " << c.section << "/" << c.name << "\n";
      }
      if (!r.error.empty()) std::cerr << "FAIL " << r.id << ": " << r.error << "\n";
    }
  }
  return doc.at("passed").get<bool>() ? exit_pass : exit_fail;
}

int cmd_generate(const Globals& g, std::uint64_t seed, const std::string& structure, const std::string& dim,
                 int degree, bool lorentzian, double radius, const std::string& output) {
  pke::GenerateRequest req;
  req.seed = seed;
  req.degree = degree;
  req.lorentzian = lorentzian;
  req.radius = radius;
  if (g.points) req.points = *g.points;
  const auto dims = parse_list(dim, "--dim");
  if (structure == "grassmannian") {
    if (dims.size() != 2) throw pke::Error(pke::ErrorKind::parse, "grassmannian --dim expects 'm,n'");
    req.kind = pke::StructureKind::grassmannian;
    req.m = static_cast<int>(dims[0]);
    req.n = static_cast<int>(dims[1]);
  } else {
    if (dims.size() != 1) throw pke::Error(pke::ErrorKind::parse, "--dim expects a single integer");
    req.n = static_cast<int>(dims[0]);
    if (structure == "projective") {
      req.kind = pke::StructureKind::projective;
    } else if (structure == "conformal") {
      req.kind = pke::StructureKind::conformal;
    } else {
      throw pke::Error(pke::ErrorKind::parse, "unknown structure '" + structure + "'");
    }
  }
  json doc = pke::generate_scenario(req);
  if (g.jet_order) doc["jet_order"] = *g.jet_order;
  if (g.omega_sign) doc["omega_sign"] = *g.omega_sign;
  // Round-trip through the loader so a generated file is always valid.
  pke::ScenarioSet check(doc);
  (void)check.all();
  write_output(doc.dump(2) + "\n", output);
  return exit_pass;
}

int cmd_rho(const Globals& g, const std::string& file, const std::string& id, const std::string& at,
            const std::string& format) {
  const auto sc = pke::load_scenario(file, id);
  const auto x = parse_list(at, "--at");
  if (static_cast<int>(x.size()) != sc.spec.dim()) {
    throw pke::Error(pke::ErrorKind::dimension_mismatch,
                     "--at needs " + std::to_string(sc.spec.dim()) + " coordinates, got " + std::to_string(x.size()));
  }
  (void)g;
  const auto ric = pke::ricci(sc.connection, x, 0);
  const auto ls = pke::make_local_structure_values(sc.spec, x);
  const auto ricv = pke::values(ric);
  const auto pc = pke::rho_closed_form(ls, ricv);
  const auto pg = pke::rho_generic(ls, ricv);
  const double diff = pke::max_abs_diff(pc, pg);
  if (format == "structured") {
    json doc{{"scenario", sc.id}, {"structure", sc.spec.describe()}, {"at", x},
             {"ricci", matrix_json(ricv)}, {"rho", matrix_json(pc)}, {"rho_generic_minus_closed_form", diff}};
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "scenario " << sc.id << "  " << sc.spec.describe() << "\n";
    std::cout << "Ric at x:\n" << matrix_text(ricv) << "P at x (closed form):\n" << matrix_text(pc);
    std::cout << "max |P_generic - P_closed| = " << pke::format_sci(diff) << "\n";
  }
  return exit_pass;
}

int cmd_metric(const Globals& g, const std::string& file, const std::string& id, const std::string& at,
               const std::string& format) {
  const auto sc = pke::load_scenario(file, id);
  const auto split = at.find(';');
  if (split == std::string::npos) throw pke::Error(pke::ErrorKind::parse, "--at expects 'x1,..,xn;xi1,..,xin'");
  pke::CotangentPoint p{parse_list(at.substr(0, split), "--at base point"),
                        parse_list(at.substr(split + 1), "--at covector")};
  pke::check_point(sc.spec, p);
  pke::ConstructionOptions opts;
  opts.omega_sign = g.omega_sign.value_or(sc.omega_sign);
  const auto f = pke::evaluate_cotangent(sc.spec, sc.connection, p, 0, opts);
  const auto h = pke::values(f.h);
  const auto om = pke::values(f.omega);
  const auto I = pke::para_complex(h, om);
  if (format == "structured") {
    json doc{{"scenario", sc.id}, {"structure", sc.spec.describe()}, {"x", p.x}, {"xi", p.xi},
             {"h", matrix_json(h)}, {"omega", matrix_json(om)}, {"I", matrix_json(I)},
             {"conventions", pke::conventions_json(opts.omega_sign)}};
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "scenario " << sc.id << "  " << sc.spec.describe() << "\n";
    std::cout << "h:\n" << matrix_text(h) << "Omega:\n" << matrix_text(om) << "I = h^-1 Omega^T:\n" << matrix_text(I);
  }
  return exit_pass;
}

int cmd_report(const std::string& file, const std::string& format) {
  const json doc = pke::read_json_file(file);
  if (format == "structured") {
    if (doc.value("schema", "") != pke::report_schema) throw pke::Error(pke::ErrorKind::parse, "not a pke-report/1 document");
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << pke::render_text(doc);
  }
  return doc.value("passed", false) ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patterson-Walker type metrics on cotangent bundles: construction and numerical certification"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--tol", g.tol, "Tolerance for the Einstein, lambda-spread, para-Kahler and isometry checks");
  app.add_option("--jet-order", g.jet_order, "Jet order of h used for curvature (2 or 3)");
  app.add_option("--omega-sign", g.omega_sign, "Sign s in Omega = -dtau + s Alt P (1 or -1)");
  app.add_option("--points", g.points, "Number of sample points");

  std::string file, id, checks = "all", format = "text", mutation = "none", output, at, structure, dim = "2";
  bool timing = false, lorentzian = false;
  int threads = 0, degree = 2;
  std::uint64_t seed = 1;
  double radius = 1.0;

  auto* verify = app.add_subcommand("verify", "Run the verification suite on a scenario file");
  verify->add_option("file", file, "Scenario file")->required();
  verify->add_option("--id", id, "Scenario id (default: every scenario in the file)");
  verify->add_option("--checks", checks, "einstein,para_kahler,isometry,crosscheck,homogeneity or all");
  verify->add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));
  verify->add_option("--mutation", mutation, "Negative control: drop_q, flip_sym_rho, swap_ricci, drop_half, negate_q");
  verify->add_flag("--timing", timing, "Include wall-clock time (reports are then not byte-reproducible)");
  verify->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");
  verify->add_option("-o,--output", output, "Write the report to a file");

  auto* generate = app.add_subcommand("generate", "Emit a seeded random gauge scenario");
  generate->add_option("--seed", seed, "Random seed");
  generate->add_option("--structure", structure, "projective, conformal or grassmannian")->required();
  generate->add_option("--dim", dim, "n, or m,n for grassmannian");
  generate->add_option("--degree", degree, "Maximum polynomial degree");
  generate->add_flag("--lorentzian", lorentzian, "Conformal only: Lorentzian background metric");
  generate->add_option("--radius", radius, "Sampling box radius written into the scenario");
  generate->add_option("-o,--output", output, "Write the scenario to a file");

  auto* rho = app.add_subcommand("rho", "Print Ric and P at a base point");
  rho->add_option("file", file, "Scenario file")->required();
  rho->add_option("--id", id, "Scenario id");
  rho->add_option("--at", at, "x1,...,xn")->required();
  rho->add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  auto* metric = app.add_subcommand("metric", "Print h, Omega and I at a cotangent point");
  metric->add_option("file", file, "Scenario file")->required();
  metric->add_option("--id", id, "Scenario id");
  metric->add_option("--at", at, "x1,...,xn;xi1,...,xin")->required();
  metric->add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  auto* report = app.add_subcommand("report", "Render a structured report");
  report->add_option("file", file, "Report file (pke-report/1)")->required();
  report->add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_input;
  }

  try {
    if (*verify) return cmd_verify(g, file, id, checks, format, mutation, timing, threads, output);
    if (*generate) return cmd_generate(g, seed, structure, dim, degree, lorentzian, radius, output);
    if (*rho) return cmd_rho(g, file, id, at, format);
    if (*metric) return cmd_metric(g, file, id, at, format);
    if (*report) return cmd_report(file, format);
  } catch (const pke::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  }
  return exit_input;
}
