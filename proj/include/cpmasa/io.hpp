// io.hpp: JSON problem files and reports
//
// Complex scalars are [re, im] pairs and matrices are row-major arrays of
// rows. Non-finite reals are written as the strings "inf", "-inf", "nan".

#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpmasa/cpmaps.hpp"
#include "cpmasa/gksl.hpp"
#include "cpmasa/linalg.hpp"

namespace cpmasa {

using Json = nlohmann::ordered_json;

inline Json encode_real(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline double decode_real(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError("expected a real number, got " + j.dump());
}

inline Json encode_complex(cd z) { return Json::array({encode_real(z.real()), encode_real(z.imag())}); }

/// [re, im], or a bare real number.
inline cd decode_complex(const Json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw ParseError("complex scalar must be [re, im], got " + j.dump());
    return {decode_real(j[0]), decode_real(j[1])};
  }
  return {decode_real(j), 0.0};
}

inline Json encode_matrix(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(encode_complex(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json encode_matrix(const RealMatrix& m) { return encode_matrix(Matrix(m.cast<cd>())); }

inline Matrix decode_matrix(const Json& j) {
  if (!j.is_array()) throw ParseError("matrix must be an array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  for (const Json& row : j) {
    if (!row.is_array()) throw ParseError("matrix row must be an array");
    if (cols < 0) cols = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != cols) throw ParseError("ragged matrix");
  }
  Matrix m(rows, std::max<Index>(cols, 0));
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = decode_complex(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
  return m;
}

inline Json encode_vector(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(encode_complex(v(i)));
  return out;
}

inline Json encode_tolerance(const Tolerance& t) {
  return Json{{"atol", encode_real(t.atol)}, {"rtol", encode_real(t.rtol)}};
}

// ---------------------------------------------------------------------------

enum class ProblemKind { cp_map, generator };

struct ProblemFile {
  Index dim = 0;
  ProblemKind kind = ProblemKind::cp_map;
  std::vector<Matrix> kraus;
  std::optional<Matrix> beta;
  std::optional<Matrix> hamiltonian;
  std::optional<Matrix> masa;
  std::optional<Tolerance> tolerance;

  KrausMap kraus_map() const { return KrausMap(kraus); }

  GkslGenerator generator(const Tolerance& tol = {}) const {
    if (kind != ProblemKind::generator) throw ParseError("problem is not a generator");
    if (beta) return GkslGenerator(kraus_map(), *beta);
    return markov_form(kraus_map(), *hamiltonian, tol);
  }
};

inline ProblemFile parse_problem(const Json& j) {
  if (!j.is_object()) throw ParseError("problem file must be a JSON object");
  ProblemFile p;
  try {
    if (!j.contains("dim") || !j["dim"].is_number_integer()) throw ParseError("missing integer 'dim'");
    p.dim = j["dim"].get<Index>();
    if (p.dim <= 0) throw ParseError("'dim' must be positive");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ParseError("missing string 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "cp_map")
      p.kind = ProblemKind::cp_map;
    else if (kind == "generator")
      p.kind = ProblemKind::generator;
    else
      throw ParseError("'kind' must be cp_map or generator");
    if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
      throw ParseError("'kraus' must be a nonempty list of matrices");
    for (const Json& m : j["kraus"]) p.kraus.push_back(decode_matrix(m));
    if (j.contains("beta")) p.beta = decode_matrix(j["beta"]);
    if (j.contains("hamiltonian")) p.hamiltonian = decode_matrix(j["hamiltonian"]);
    if (j.contains("masa")) p.masa = decode_matrix(j["masa"]);
    if (j.contains("tolerance")) {
      const Json& t = j["tolerance"];
      if (!t.is_object()) throw ParseError("'tolerance' must be an object");
      Tolerance tol;
      if (t.contains("atol")) tol.atol = decode_real(t["atol"]);
      if (t.contains("rtol")) tol.rtol = decode_real(t["rtol"]);
      tol.validate();
      p.tolerance = tol;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed problem file: ") + e.what());
  }
  const bool has_beta = p.beta.has_value();
  const bool has_h = p.hamiltonian.has_value();
  if (p.kind == ProblemKind::generator && has_beta == has_h)
    throw ParseError("a generator needs exactly one of 'beta' and 'hamiltonian'");
  if (p.kind == ProblemKind::cp_map && (has_beta || has_h))
    throw ParseError("a cp_map takes neither 'beta' nor 'hamiltonian'");
  const auto check = [&](const Matrix& m, const char* what) {
    if (m.rows() != p.dim || m.cols() != p.dim)
      throw DimensionMismatch(std::string(what) + " is not dim x dim");
  };
  for (const Matrix& m : p.kraus) check(m, "kraus operator");
  if (p.beta) check(*p.beta, "beta");
  if (p.hamiltonian) check(*p.hamiltonian, "hamiltonian");
  if (p.masa) check(*p.masa, "masa");
  return p;
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str());
}

inline ProblemFile read_problem(const std::string& path) { return parse_problem(read_json_file(path)); }

/// The masa file holds either a bare basis matrix or an object with "masa".
inline Matrix read_masa_matrix(const std::string& path) {
  const Json j = read_json_file(path);
  if (j.is_object()) {
    if (!j.contains("masa")) throw ParseError("masa file has no 'masa' entry");
    return decode_matrix(j["masa"]);
  }
  return decode_matrix(j);
}

// ---------------------------------------------------------------------------

struct ReportVerdict {
  std::string name;
  bool value = false;
  double residual = 0.0;
  double threshold = 0.0;
  Tolerance tolerance;

  bool operator==(const ReportVerdict& o) const {
    const auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return name == o.name && value == o.value && same(residual, o.residual) &&
           same(threshold, o.threshold) && same(tolerance.atol, o.tolerance.atol) &&
           same(tolerance.rtol, o.tolerance.rtol);
  }
};

struct Report {
  std::string command;
  std::vector<ReportVerdict> verdicts;
  Json witnesses = Json::object();
  Json certificates = Json::object();
  Json results = Json::object();
  std::optional<double> timing_ms;

  void verdict(std::string name, const Verdict& v, const Tolerance& tol) {
    verdicts.push_back({std::move(name), v.holds, v.residual, v.threshold, tol});
  }

  bool all_hold() const {
    for (const ReportVerdict& v : verdicts)
      if (!v.value) return false;
    return true;
  }

  bool operator==(const Report& o) const {
    return command == o.command && verdicts == o.verdicts && witnesses == o.witnesses &&
           certificates == o.certificates && results == o.results && timing_ms == o.timing_ms;
  }
};

inline Json to_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  Json v = Json::object();
  for (const ReportVerdict& e : r.verdicts)
    v[e.name] = Json{{"value", e.value},
                     {"residual", encode_real(e.residual)},
                     {"threshold", encode_real(e.threshold)},
                     {"tolerance", encode_tolerance(e.tolerance)}};
  j["verdicts"] = std::move(v);
  j["witnesses"] = r.witnesses;
  j["certificates"] = r.certificates;
  j["results"] = r.results;
  if (r.timing_ms) j["timing_ms"] = encode_real(*r.timing_ms);
  return j;
}

inline Report report_from_json(const Json& j) {
  try {
    Report r;
    r.command = j.at("command").get<std::string>();
    for (const auto& [name, e] : j.at("verdicts").items()) {
      ReportVerdict v;
      v.name = name;
      v.value = e.at("value").get<bool>();
      v.residual = decode_real(e.at("residual"));
      v.threshold = decode_real(e.at("threshold"));
      v.tolerance.atol = decode_real(e.at("tolerance").at("atol"));
      v.tolerance.rtol = decode_real(e.at("tolerance").at("rtol"));
      r.verdicts.push_back(std::move(v));
    }
    r.witnesses = j.at("witnesses");
    r.certificates = j.at("certificates");
    r.results = j.at("results");
    if (j.contains("timing_ms")) r.timing_ms = decode_real(j["timing_ms"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

/// One line, no trailing newline.
inline std::string serialize(const Report& r) { return to_json(r).dump(); }

inline Report parse_report(const std::string& line) { return report_from_json(parse_json_text(line)); }

}  // namespace cpmasa
