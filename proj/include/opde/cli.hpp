#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "opde/certifier.hpp"
#include "opde/error.hpp"
#include "opde/expression.hpp"
#include "opde/grid.hpp"
#include "opde/manufactured.hpp"
#include "opde/operator_model.hpp"
#include "opde/pencil.hpp"
#include "opde/perturbed_solver.hpp"
#include "opde/principal_solver.hpp"
#include "opde/random.hpp"
#include "opde/verifier.hpp"

namespace opde::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class Mode { certify, solve, verify, sweep };

inline Mode parse_mode(std::string_view s) {
  if (s == "certify") return Mode::certify;
  if (s == "solve") return Mode::solve;
  if (s == "verify") return Mode::verify;
  if (s == "sweep") return Mode::sweep;
  throw Error(ErrorKind::ConfigInvalid, "unknown mode '" + std::string(s) + "'");
}

enum ExitCode : int { kOk = 0, kInputError = 1, kInadmissible = 2, kNotContractive = 3 };

struct GridSettings {
  std::optional<double> length;
  Eigen::Index points = 2048;
  bool auto_length = true;
};

struct ForcingSettings {
  std::string kind = "manufactured";
  std::vector<double> poly{0.0, 0.0, 0.0, 1.0};
  std::optional<double> decay;
  std::optional<Vector> direction;
  std::vector<std::string> components;
  fs::path samples_path;
};

struct SolverSettings {
  double tol = 1e-10;
  int max_iter = 200;
  Extension extension = Extension::smooth;
};

struct SweepSettings {
  std::optional<double> kappa_min;
  std::optional<double> kappa_max;
  std::optional<double> step;
};

struct VerifySettings {
  int trials = 100;
  Eigen::Index points = 2048;
};

struct Config {
  OperatorModel a;
  PerturbationSet p;
  double kappa = 0.0;
  GridSettings grid{};
  ForcingSettings forcing{};
  SolverSettings solver{};
  SweepSettings sweep{};
  VerifySettings verify{};
  std::uint64_t seed = 0;
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); }

inline double number(const json& j, const std::string& name) {
  if (!j.is_number()) invalid(name + " must be a number");
  return j.get<double>();
}

inline Vector read_vector(const json& j, Eigen::Index n, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    invalid(name + " must be an array of " + std::to_string(n) + " numbers");
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = number(j[static_cast<std::size_t>(i)], name);
  return v;
}

inline Matrix read_matrix(const json& j, Eigen::Index n, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    invalid(name + " must have " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.row(i) = read_vector(j[static_cast<std::size_t>(i)], n, name + " row").transpose();
  }
  return m;
}

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      invalid("unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline OperatorModel read_operator(const json& j, Eigen::Index n) {
  if (j.is_array()) return make_operator(read_matrix(j, n, "operator_A"));
  if (!j.is_object() || !j.contains("eigenvalues")) {
    invalid("operator_A must be dense rows or an object with \"eigenvalues\"");
  }
  reject_unknown(j, {"eigenvalues", "eigenbasis"}, "operator_A");
  const Vector values = read_vector(j.at("eigenvalues"), n, "operator_A.eigenvalues");
  if (j.contains("eigenbasis")) {
    return OperatorModel::from_spectrum(values, read_matrix(j.at("eigenbasis"), n, "operator_A.eigenbasis"));
  }
  return OperatorModel::from_spectrum(values);
}

inline PerturbationSet read_perturbations(const json& j, const OperatorModel& a) {
  if (j.is_null()) return zero_perturbations(a);
  if (!j.is_object()) invalid("perturbations must be an object");
  reject_unknown(j, {"normalized", "A1", "A2", "A3", "A4"}, "perturbations");
  bool normalized = false;
  if (j.contains("normalized")) {
    if (!j.at("normalized").is_boolean()) invalid("perturbations.normalized must be a boolean");
    normalized = j.at("normalized").get<bool>();
  }
  std::array<Matrix, 4> m;
  for (int k = 1; k <= 4; ++k) {
    const std::string key = "A" + std::to_string(k);
    if (j.contains(key)) m[static_cast<std::size_t>(k - 1)] = read_matrix(j.at(key), a.dim(), "perturbations." + key);
  }
  return normalized ? make_normalized_perturbations(a, m) : make_perturbations(a, m);
}

inline GridSettings read_grid(const json& j) {
  GridSettings g;
  if (j.is_null()) return g;
  if (!j.is_object()) invalid("grid must be an object");
  reject_unknown(j, {"T", "N", "auto_T"}, "grid");
  if (j.contains("T")) {
    g.length = number(j.at("T"), "grid.T");
    g.auto_length = false;
  }
  if (j.contains("N")) {
    if (!j.at("N").is_number_integer()) invalid("grid.N must be an integer");
    g.points = j.at("N").get<Eigen::Index>();
    if (g.points < kMinDerivativePoints || g.points > (1 << 22)) invalid("grid.N must be in [9, 2^22]");
  }
  if (j.contains("auto_T")) {
    if (!j.at("auto_T").is_boolean()) invalid("grid.auto_T must be a boolean");
    g.auto_length = j.at("auto_T").get<bool>();
  }
  if (!g.auto_length && !g.length) invalid("grid.T is required when auto_T is false");
  if (g.length && !(*g.length > 0.0)) invalid("grid.T must be positive");
  return g;
}

inline ForcingSettings read_forcing(const json& j, Eigen::Index n, const fs::path& base) {
  ForcingSettings f;
  if (j.is_null()) return f;
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) invalid("forcing.kind is required");
  f.kind = j.at("kind").get<std::string>();
  const json& params = j.contains("parameters") ? j.at("parameters") : j;
  if (f.kind == "manufactured") {
    reject_unknown(params, {"kind", "parameters", "family", "poly", "decay", "direction"}, "forcing");
    const std::string family = params.value("family", std::string("cubic"));
    if (family == "polynomial") {
      if (!params.contains("poly") || !params.at("poly").is_array()) invalid("forcing.poly is required");
      f.poly.clear();
      for (const auto& c : params.at("poly")) f.poly.push_back(number(c, "forcing.poly"));
      f.poly.resize(std::max<std::size_t>(f.poly.size(), 4), 0.0);
      if (f.poly[0] != 0.0 || f.poly[1] != 0.0 || f.poly[2] != 0.0) {
        invalid("forcing.poly must start with three zero coefficients so that u* has vanishing traces");
      }
    } else if (family != "cubic") {
      invalid("forcing.family must be \"cubic\" or \"polynomial\"");
    }
    if (params.contains("decay")) f.decay = number(params.at("decay"), "forcing.decay");
    if (params.contains("direction")) {
      f.direction = read_vector(params.at("direction"), n, "forcing.direction");
      if (f.direction->norm() == 0.0) invalid("forcing.direction must be nonzero");
    }
  } else if (f.kind == "expression") {
    reject_unknown(params, {"kind", "parameters", "components"}, "forcing");
    if (!params.contains("components") || !params.at("components").is_array() ||
        static_cast<Eigen::Index>(params.at("components").size()) != n) {
      invalid("forcing.components must list one expression per dimension");
    }
    for (const auto& c : params.at("components")) {
      if (!c.is_string()) invalid("forcing.components must be strings");
      f.components.push_back(c.get<std::string>());
    }
  } else if (f.kind == "samples-file") {
    reject_unknown(params, {"kind", "parameters", "path"}, "forcing");
    if (!params.contains("path") || !params.at("path").is_string()) invalid("forcing.path is required");
    f.samples_path = params.at("path").get<std::string>();
    if (f.samples_path.is_relative()) f.samples_path = base / f.samples_path;
  } else {
    invalid("forcing.kind must be manufactured, expression or samples-file");
  }
  return f;
}

inline SolverSettings read_solver(const json& j) {
  SolverSettings s;
  if (j.is_null()) return s;
  reject_unknown(j, {"tol", "max_iter", "extension"}, "solver");
  if (j.contains("tol")) s.tol = number(j.at("tol"), "solver.tol");
  if (!(s.tol > 0.0)) invalid("solver.tol must be positive");
  if (j.contains("max_iter")) {
    if (!j.at("max_iter").is_number_integer() || j.at("max_iter").get<long>() < 1) {
      invalid("solver.max_iter must be a positive integer");
    }
    s.max_iter = j.at("max_iter").get<int>();
  }
  if (j.contains("extension")) {
    const std::string e = j.at("extension").get<std::string>();
    if (e == "smooth") s.extension = Extension::smooth;
    else if (e == "zero") s.extension = Extension::zero;
    else invalid("solver.extension must be \"smooth\" or \"zero\"");
  }
  return s;
}

inline SweepSettings read_sweep(const json& j) {
  SweepSettings s;
  if (j.is_null()) return s;
  reject_unknown(j, {"kappa_min", "kappa_max", "step"}, "sweep");
  if (j.contains("kappa_min")) s.kappa_min = number(j.at("kappa_min"), "sweep.kappa_min");
  if (j.contains("kappa_max")) s.kappa_max = number(j.at("kappa_max"), "sweep.kappa_max");
  if (j.contains("step")) s.step = number(j.at("step"), "sweep.step");
  return s;
}

inline VerifySettings read_verify(const json& j) {
  VerifySettings v;
  if (j.is_null()) return v;
  reject_unknown(j, {"trials", "N"}, "verify");
  if (j.contains("trials")) v.trials = j.at("trials").get<int>();
  if (j.contains("N")) v.points = j.at("N").get<Eigen::Index>();
  if (v.trials < 1 || v.points < kMinDerivativePoints) invalid("verify.trials >= 1 and verify.N >= 9 required");
  return v;
}

inline const json& optional_key(const json& j, const char* key) {
  static const json null_value;
  return j.contains(key) ? j.at(key) : null_value;
}

}  // namespace detail

/// Builds a Config from parsed JSON; relative file paths resolve against `base`.
inline Config parse_config(const json& j, const fs::path& base = fs::current_path()) {
  using namespace detail;
  try {
    if (!j.is_object()) invalid("config must be a JSON object");
    reject_unknown(j, {"description", "dimension", "operator_A", "perturbations", "kappa", "grid", "forcing", "solver",
                       "seed", "sweep", "verify"},
                   "config");
    if (!j.contains("dimension") || !j.at("dimension").is_number_integer()) invalid("dimension is required");
    const auto n = j.at("dimension").get<Eigen::Index>();
    if (n < 1 || n > 4096) invalid("dimension must be in [1, 4096]");
    if (!j.contains("operator_A")) invalid("operator_A is required");
    if (!j.contains("kappa")) invalid("kappa is required");
    OperatorModel a = read_operator(j.at("operator_A"), n);
    PerturbationSet p = read_perturbations(optional_key(j, "perturbations"), a);
    Config c{.a = std::move(a), .p = std::move(p)};
    c.kappa = number(j.at("kappa"), "kappa");
    c.grid = read_grid(optional_key(j, "grid"));
    c.forcing = read_forcing(optional_key(j, "forcing"), n, base);
    c.solver = read_solver(optional_key(j, "solver"));
    c.sweep = read_sweep(optional_key(j, "sweep"));
    c.verify = read_verify(optional_key(j, "verify"));
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_integer() || j.at("seed").get<long long>() < 0) invalid("seed must be a nonnegative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
}

inline Config load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

// ---------------------------------------------------------------- output

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON with every float printed to 17 significant digits; non-finite
/// values become the strings "inf", "-inf", "nan".
inline void write_json(std::ostream& out, const ordered_json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) out << ",\n";
        first = false;
        out << pad << ordered_json(item.key()).dump() << ": ";
        write_json(out, item.value(), indent + 2);
      }
      out << "\n" << close << "}";
      return;
    }
    case ordered_json::value_t::array: {
      const bool flat = std::all_of(j.begin(), j.end(), [](const ordered_json& e) { return e.is_primitive(); });
      if (j.empty()) {
        out << "[]";
      } else if (flat) {
        out << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ", ";
          write_json(out, j[i], indent + 2);
        }
        out << "]";
      } else {
        out << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out << ",\n";
          out << pad;
          write_json(out, j[i], indent + 2);
        }
        out << "\n" << close << "]";
      }
      return;
    }
    case ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) out << format_double(v);
      else out << '"' << format_double(v) << '"';
      return;
    }
    default: out << j.dump(); return;
  }
}

inline void write_report(const fs::path& path, const ordered_json& report) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path.string());
  write_json(out, report);
  out << "\n";
}

inline void write_solution_csv(const fs::path& path, const WeightedGridFunction& u) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path.string());
  out << "t";
  for (Eigen::Index i = 0; i < u.dim(); ++i) out << ",u_" << (i + 1);
  out << "\n";
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    out << format_double(u.grid().node(k));
    for (Eigen::Index i = 0; i < u.dim(); ++i) out << "," << format_double(u.samples()(k, i));
    out << "\n";
  }
}

inline void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigInvalid, "cannot write " + path.string());
  out << "kappa,gamma,c1,c2,c3,c4,q,verdict\n";
  for (const auto& r : rows) {
    out << format_double(r.kappa) << "," << format_double(r.gamma);
    for (double c : r.c) out << "," << format_double(c);
    out << "," << format_double(r.q) << "," << to_string(r.verdict) << "\n";
  }
}

/// Reads a CSV with a header row and columns t, f_1..f_n on a uniform grid
/// starting at 0.
inline WeightedGridFunction read_samples_csv(const fs::path& path, Eigen::Index n, double kappa) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open samples file " + path.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) numeric = false;
      row.push_back(v);
    }
    if (!numeric) {
      if (header && rows.empty()) {
        header = false;
        continue;
      }
      throw Error(ErrorKind::ConfigInvalid, "non-numeric row in samples file: " + line);
    }
    if (static_cast<Eigen::Index>(row.size()) != n + 1) {
      throw Error(ErrorKind::ConfigInvalid, "samples file rows need t and " + std::to_string(n) + " values");
    }
    rows.push_back(std::move(row));
  }
  const auto count = static_cast<Eigen::Index>(rows.size());
  if (count < kMinDerivativePoints) throw Error(ErrorKind::ConfigInvalid, "samples file needs at least 9 rows");
  const double length = rows.back()[0];
  if (rows.front()[0] != 0.0 || !(length > 0.0)) throw Error(ErrorKind::ConfigInvalid, "samples must start at t = 0");
  const Grid grid(length, count, kappa);
  Matrix s(count, n);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    if (std::abs(row[0] - grid.node(k)) > 1e-9 * std::max(1.0, length)) {
      throw Error(ErrorKind::ConfigInvalid, "samples file nodes must be uniform");
    }
    for (Eigen::Index i = 0; i < n; ++i) s(k, i) = row[static_cast<std::size_t>(i + 1)];
  }
  return WeightedGridFunction(grid, std::move(s));
}

// ---------------------------------------------------------------- modes

inline ordered_json certificate_json(const SolvabilityCertificate& c) {
  ordered_json j;
  j["kappa"] = c.kappa;
  j["lambda0"] = c.lambda0;
  j["gamma"] = c.gamma;
  j["c"] = ordered_json::array({c.c[0], c.c[1], c.c[2], c.c[3]});
  j["beta"] = ordered_json::array({c.beta[0], c.beta[1], c.beta[2], c.beta[3]});
  j["q"] = c.q;
  j["admissible"] = c.admissible;
  j["verdict"] = std::string(to_string(c.verdict));
  return j;
}

inline ordered_json grid_json(const Grid& g) {
  ordered_json j;
  j["T"] = g.length();
  j["N"] = g.size();
  j["h"] = g.step();
  j["kappa"] = g.kappa();
  return j;
}

struct Problem {
  WeightedGridFunction forcing;
  std::optional<ManufacturedSolution> exact;
};

/// Grid and forcing for solve mode.
inline Problem build_problem(const Config& c) {
  const auto n = c.a.dim();
  const double lambda0 = c.a.lambda0();
  const ForcingSettings& f = c.forcing;
  if (f.kind == "samples-file") {
    auto samples = read_samples_csv(f.samples_path, n, c.kappa);
    if (c.grid.length && std::abs(*c.grid.length - samples.grid().length()) > 1e-9 * *c.grid.length) {
      throw Error(ErrorKind::ConfigInvalid, "grid.T disagrees with the samples file");
    }
    return {std::move(samples), std::nullopt};
  }
  if (f.kind == "expression") {
    const double length = c.grid.auto_length ? Grid::default_length(lambda0, c.kappa) : *c.grid.length;
    const Grid grid(length, c.grid.points, c.kappa);
    std::vector<Expression> parts;
    for (const auto& s : f.components) parts.emplace_back(s);
    Matrix s(grid.size(), n);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
      for (Eigen::Index i = 0; i < n; ++i) s(k, i) = parts[static_cast<std::size_t>(i)](grid.node(k));
    }
    if (!s.allFinite()) throw Error(ErrorKind::ConfigInvalid, "forcing expression is not finite on the grid");
    return {WeightedGridFunction(grid, std::move(s)), std::nullopt};
  }
  Vector direction;
  if (f.direction) {
    direction = *f.direction / f.direction->norm();
  } else {
    Rng rng(c.seed);
    direction = random_unit_vector(n, rng);
  }
  // Default decay keeps u* e^{-kappa t/2} decaying at rate lambda0 for kappa < 0.
  ManufacturedSolution m(f.poly, f.decay.value_or(lambda0 + std::max(0.0, -0.5 * c.kappa)), direction);
  const double length = c.grid.auto_length ? m.suggested_length(lambda0, c.kappa) : *c.grid.length;
  const Grid grid(length, c.grid.points, c.kappa);
  return {m.forcing(grid, c.a, c.p.coefficients), std::move(m)};
}

inline int run_certify(const Config& c, ordered_json& report) {
  const auto cert = certify(c.a, c.p, c.kappa);
  report["certificate"] = certificate_json(cert);
  return cert.admissible ? kOk : kInadmissible;
}

inline int run_sweep(const Config& c, ordered_json& report, const fs::path& out) {
  const double l0 = c.a.lambda0();
  const double step = c.sweep.step.value_or(0.1 * l0);
  const auto kappas = kappa_range(c.sweep.kappa_min.value_or(-2.2 * l0), c.sweep.kappa_max.value_or(2.2 * l0), step);
  const auto rows = critical_sweep(c.a, kappas, c.p);
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["kappa"] = r.kappa;
    row["gamma"] = r.gamma;
    row["c"] = ordered_json::array({r.c[0], r.c[1], r.c[2], r.c[3]});
    row["q"] = r.q;
    row["verdict"] = std::string(to_string(r.verdict));
    table.push_back(row);
  }
  report["lambda0"] = l0;
  report["rows"] = table;
  write_sweep_csv(out / "sweep.csv", rows);
  report["files"] = ordered_json::array({"sweep.csv"});
  return kOk;
}

inline int run_solve(const Config& c, ordered_json& report, const fs::path& out) {
  const auto cert = certify(c.a, c.p, c.kappa);
  report["certificate"] = certificate_json(cert);
  if (!cert.admissible) return kInadmissible;
  const Problem problem = build_problem(c);
  report["grid"] = grid_json(problem.forcing.grid());
  NeumannOptions opts;
  opts.tol = c.solver.tol;
  opts.max_iter = c.solver.max_iter;
  opts.extension = c.solver.extension;
  const SolveReport r = neumann_solve(problem.forcing, c.a, c.p, opts);
  ordered_json s;
  s["iterations"] = r.iterations;
  s["contraction_ratio"] = r.contraction_ratio;
  s["residual"] = r.residual;
  s["traces"] = ordered_json::array({r.traces[0], r.traces[1], r.traces[2]});
  s["sobolev_norm"] = r.sobolev_norm;
  s["forcing_norm"] = r.forcing_norm;
  s["bound_constant"] = r.bound_constant;
  s["certified"] = r.certified;
  s["increments"] = r.increments;
  s["warnings"] = r.warnings;
  report["solve"] = s;
  if (problem.exact) {
    const auto exact = problem.exact->sample(problem.forcing.grid());
    const auto diff = r.solution - exact;
    ordered_json m;
    m["decay"] = problem.exact->decay();
    m["relative_w4_error"] = sobolev_norm(diff, c.a) / sobolev_norm(exact, c.a);
    m["relative_l2k_error"] = l2k_norm(diff) / l2k_norm(exact);
    report["manufactured"] = m;
  }
  write_solution_csv(out / "solution.csv", r.solution);
  report["files"] = ordered_json::array({"solution.csv"});
  return kOk;
}

inline int run_verify(const Config& c, ordered_json& report) {
  const auto cert = certify(c.a, c.p, c.kappa);
  report["certificate"] = certificate_json(cert);
  if (!cert.admissible) return kInadmissible;
  const double l0 = c.a.lambda0();
  const double kappa = c.kappa;
  const auto xs = composite_xi_grid(l0);

  ordered_json pencil;
  pencil["bound_xi4"] = bound_xi4(c.a, kappa, xs);
  const auto a4 = bound_A4(c.a, kappa, xs);
  pencil["bound_A4"] = {{"measured", a4.measured}, {"closed_form", a4.closed_form}, {"spectral", a4.spectral}};
  const double lb = symbol_lower_bound(l0, kappa);
  long violations = 0;
  for (double xi : xs) {
    for (double l : c.a.eigenvalues()) {
      if (std::abs(symbol(Complex(0.5 * kappa, xi), l)) < lb) ++violations;
    }
  }
  pencil["symbol_lower_bound"] = lb;
  pencil["symbol_lower_bound_violations"] = violations;
  report["pencil"] = pencil;

  const int trials = c.verify.trials;
  const Eigen::Index points = c.verify.points;

  double max_gap = 0.0;
  long aux_violations = 0;
  DomainFamily first_order(l0, kappa, c.a.dim(), c.seed, 1);
  for (int i = 0; i < trials; ++i) {
    const auto s = first_order.draw();
    const auto u = s.sample(s.grid(kappa, points));
    max_gap = std::max(max_gap, check_energy_identity(u, c.a).gap);
    if (!check_aux_estimates(u, c.a).holds()) ++aux_violations;
  }
  report["energy_identity"] = {{"trials", trials}, {"max_gap", max_gap}};
  report["aux_estimates"] = {{"trials", trials}, {"violations", aux_violations}};

  long est_violations = 0;
  long bound_violations = 0;
  double worst = 0.0;
  double y0 = 0.0;
  std::array<double, 4> worst_j{};
  DomainFamily family(l0, kappa, c.a.dim(), c.seed + 1);
  for (int i = 0; i < trials; ++i) {
    const auto s = family.draw();
    const auto u = s.sample(s.grid(kappa, points));
    const auto e = check_intermediate_estimates(u, c.a);
    if (!e.holds()) ++est_violations;
    worst = std::max(worst, e.worst_ratio());
    for (std::size_t j = 0; j < 4; ++j) {
      worst_j[j] = std::max(worst_j[j], e.intermediate[j].lhs / e.intermediate[j].rhs);
    }
    if (!check_P0_boundedness(u, c.a).holds()) ++bound_violations;
    y0 = std::max(y0, auxiliary_y(u, c.a).at(0).norm());
  }
  report["estimates"] = {{"trials", trials},
                         {"violations", est_violations},
                         {"worst_ratio", worst},
                         {"worst_ratio_by_j", ordered_json::array({worst_j[0], worst_j[1], worst_j[2], worst_j[3]})}};
  report["P0_boundedness"] = {{"trials", trials}, {"violations", bound_violations}};
  report["auxiliary_y_at_origin"] = y0;

  const auto eq = check_norm_equivalence(trials, c.a, kappa, c.seed + 2, points);
  report["norm_equivalence"] = {{"samples", eq.samples}, {"min_ratio", eq.min_ratio}, {"max_ratio", eq.max_ratio}};
  return kOk;
}

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::certify: return "certify";
    case Mode::solve: return "solve";
    case Mode::verify: return "verify";
    case Mode::sweep: return "sweep";
  }
  return "unknown";
}

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InadmissibleWeight: return kInadmissible;
    case ErrorKind::NotContractive: return kNotContractive;
    default: return kInputError;
  }
}

/// Runs one mode and writes `report.json` (plus CSVs) into `out`. Returns the
/// process exit status.
inline int run(const fs::path& config_path, Mode mode, const fs::path& out, std::optional<std::uint64_t> seed,
               std::ostream& log) {
  ordered_json report;
  report["mode"] = std::string(mode_name(mode));
  int status = kOk;
  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    log << "error: cannot create output directory: " << e.what() << "\n";
    return kInputError;
  }
  try {
    Config c = load_config(config_path);
    if (seed) c.seed = *seed;
    report["seed"] = c.seed;
    report["dimension"] = c.a.dim();
    switch (mode) {
      case Mode::certify: status = run_certify(c, report); break;
      case Mode::sweep: status = run_sweep(c, report, out); break;
      case Mode::solve: status = run_solve(c, report, out); break;
      case Mode::verify: status = run_verify(c, report); break;
    }
    if (status == kInadmissible) report["error"] = {{"kind", "InadmissibleWeight"}, {"message", "|kappa| >= 2 lambda0"}};
  } catch (const Error& e) {
    status = exit_code_for(e.kind());
    report["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  } catch (const std::exception& e) {
    status = kInputError;
    report["error"] = {{"kind", "Unexpected"}, {"message", e.what()}};
  }
  report["exit_code"] = status;
  try {
    write_report(out / "report.json", report);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kInputError;
  }
  if (report.contains("error")) log << "error: " << report["error"]["message"].get<std::string>() << "\n";
  log << mode_name(mode) << ": exit " << status << ", report " << (out / "report.json").string() << "\n";
  return status;
}

}  // namespace opde::cli
