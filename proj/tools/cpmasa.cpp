// cpmasa: command-line front end; one JSON report per invocation on stdout

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cpmasa/cpmasa.hpp"

using namespace cpmasa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFails = 1;
constexpr int kExitInput = 2;
constexpr int kExitPrecondition = 3;

struct Args {
  std::string input;
  std::string other;
  std::string masa;
  std::optional<double> atol;
  std::optional<double> rtol;
  std::uint64_t seed = 42;
  std::size_t restarts = SearchOptions{}.restarts;
  std::size_t iterations = SearchOptions{}.max_iterations;
  bool assert_mode = false;
  bool timing = false;
  std::string which;  // criterion / split variant, corpus id
};

struct Loaded {
  ProblemFile problem;
  Tolerance tol;
  Masa masa;
};

Tolerance resolve_tolerance(const Args& a, const std::optional<Tolerance>& from_file) {
  Tolerance t = from_file.value_or(Tolerance{});
  if (a.atol) t.atol = *a.atol;
  if (a.rtol) t.rtol = *a.rtol;
  t.validate();
  return t;
}

Loaded load(const Args& a) {
  if (a.input.empty()) throw ParseError("--input is required");
  ProblemFile p = read_problem(a.input);
  const Tolerance tol = resolve_tolerance(a, p.tolerance);
  std::optional<Matrix> u = p.masa;
  if (!a.masa.empty()) u = read_masa_matrix(a.masa);
  if (u && (u->rows() != p.dim || u->cols() != p.dim))
    throw DimensionMismatch("masa basis must be " + std::to_string(p.dim) + "x" +
                            std::to_string(p.dim));
  Masa c = u ? Masa(*u, tol) : Masa::diagonal(p.dim);
  return {std::move(p), tol, std::move(c)};
}

SearchOptions search_options(const Args& a) {
  SearchOptions o;
  o.seed = a.seed;
  o.restarts = a.restarts;
  o.max_iterations = a.iterations;
  return o;
}

Json encode_family(const std::vector<Matrix>& ops) {
  Json out = Json::array();
  for (const Matrix& m : ops) out.push_back(encode_matrix(m));
  return out;
}

Json encode_real_vector(const RealVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(encode_real(v(i)));
  return out;
}

Json encode_generator(const GkslGenerator& l) {
  return Json{{"kraus", encode_family(l.operators())}, {"beta", encode_matrix(l.beta())}};
}

// Applies f to the problem's map or generator.
template <class F>
auto visit_problem(const Loaded& in, F&& f) {
  if (in.problem.kind == ProblemKind::cp_map) return f(in.problem.kraus_map());
  return f(in.problem.generator(in.tol));
}

GkslGenerator require_generator(const Loaded& in, const char* command) {
  if (in.problem.kind != ProblemKind::generator)
    throw ParseError(std::string(command) + " needs a problem of kind \"generator\"");
  return in.problem.generator(in.tol);
}

void check_invariance(const Args& a, Report& r) {
  const Loaded in = load(a);
  const Verdict v = visit_problem(in, [&](const auto& phi) { return is_invariant(phi, in.masa, in.tol); });
  r.verdict("invariant", v, in.tol);
  r.witnesses["masa"] = encode_matrix(in.masa.basis());
}

void report_search(const Loaded& in, const MasaSearchResult& s, Report& r) {
  const Verdict v =
      visit_problem(in, [&](const auto& phi) { return is_invariant(phi, s.masa, in.tol); });
  r.verdict("invariant", v, in.tol);
  r.witnesses["masa"] = encode_matrix(s.masa.basis());
  r.results["search_residual"] = encode_real(s.residual);
  r.results["bounded_away"] = s.residual >= kSearchBoundedAway;
  r.results["best_restart"] = s.best_restart;
  Json all = Json::array();
  for (double x : s.restart_residuals) all.push_back(encode_real(x));
  r.results["restart_residuals"] = all;
}

void find_masa(const Args& a, Report& r) {
  const Loaded in = load(a);
  if (in.problem.dim == 2) {
    const M2MasaResult m = visit_problem(in, [&](const auto& phi) { return find_masa_m2(phi, in.tol); });
    r.verdict("invariant", m.invariance, in.tol);
    r.witnesses["masa"] = encode_matrix(m.masa.basis());
    r.witnesses["axis"] = Json::array({m.axis(0), m.axis(1), m.axis(2)});
    r.results["eigenvalue"] = encode_real(m.eigenvalue);
    r.results["span_residual"] = encode_real(m.span_residual);
    r.results["method"] = "m2";
    return;
  }
  const SearchOptions opt = search_options(a);
  const MasaSearchResult s = visit_problem(in, [&](const auto& phi) { return search_masa(phi, opt); });
  report_search(in, s, r);
  r.results["method"] = "search";
}

void search_masa_command(const Args& a, Report& r) {
  const Loaded in = load(a);
  const SearchOptions opt = search_options(a);
  const MasaSearchResult s = visit_problem(in, [&](const auto& phi) { return search_masa(phi, opt); });
  report_search(in, s, r);
}

Json encode_kraus_witness(const KrausCoefficientWitness& w) {
  Json blocks = Json::array();
  for (Index k = 0; k < w.dim; ++k) {
    Json rows = Json::array();
    for (Index i = 0; i < w.family_size; ++i) {
      Json row = Json::array();
      for (Index j = 0; j < w.family_size; ++j) row.push_back(encode_vector(w.coefficient(k, i, j)));
      rows.push_back(row);
    }
    blocks.push_back(rows);
  }
  return Json{{"coefficients", blocks}, {"residual", encode_real(w.residual)}};
}

void criterion(const Args& a, Report& r) {
  const Loaded in = load(a);
  if (a.which == "kraus") {
    if (in.problem.kind != ProblemKind::cp_map)
      throw ParseError("criterion kraus needs a problem of kind \"cp_map\"");
    const auto res = solve_kraus_coefficients(in.problem.kraus_map(), in.masa, in.tol);
    if (const auto* w = std::get_if<KrausCoefficientWitness>(&res)) {
      r.verdict("criterion", Verdict{true, w->residual, w->threshold}, in.tol);
      r.witnesses["kraus"] = encode_kraus_witness(*w);
    } else {
      const auto& f = std::get<Infeasible>(res);
      r.verdict("criterion", Verdict{false, f.residual, f.threshold}, in.tol);
      r.certificates["residual"] = encode_real(f.residual);
    }
    return;
  }
  const GkslGenerator l = require_generator(in, "criterion generator");
  const auto res = solve_generator_coefficients(l, in.masa, in.tol);
  if (const auto* w = std::get_if<GeneratorCoefficientWitness>(&res)) {
    r.verdict("criterion", Verdict{true, w->residual, w->threshold}, in.tol);
    Json cs = Json::array();
    for (const Vector& c : w->c_ops) cs.push_back(encode_vector(c));
    r.witnesses["c"] = cs;
    r.witnesses["gamma"] = encode_real_vector(w->gamma);
    r.witnesses["kraus"] = encode_kraus_witness(w->inner_witness);
    r.results["stage_residuals"] = Json::array(
        {encode_real(w->stage1_residual), encode_real(w->stage2_residual), encode_real(w->stage3_residual)});
  } else {
    const auto& f = std::get<Infeasible>(res);
    r.verdict("criterion", Verdict{false, f.residual, f.threshold}, in.tol);
    r.certificates["residual"] = encode_real(f.residual);
  }
}

void rebolledo(const Args& a, Report& r) {
  const Loaded in = load(a);
  if (in.problem.kind != ProblemKind::cp_map)
    throw ParseError("rebolledo needs a problem of kind \"cp_map\"");
  const RebolledoVerdict v = rebolledo_check(in.problem.kraus_map(), in.masa, in.tol);
  for (std::size_t i = 0; i < v.per_operator.size(); ++i)
    r.verdict("operator_" + std::to_string(i), v.per_operator[i], in.tol);
  r.verdicts.push_back({"compatible_element", v.has_compatible_element(), 0.0, 0.0, in.tol});
  Json coeffs = Json::array();
  for (const RealVector& c : v.operator_coefficients) coeffs.push_back(encode_real_vector(c));
  r.witnesses["operator_coefficients"] = coeffs;
  Json pats = Json::array();
  for (const CompatiblePattern& p : v.compatible)
    pats.push_back(Json{{"columns", p.columns}, {"dimension", p.dimension}, {"basis", encode_family(p.basis)}});
  r.witnesses["compatible"] = pats;
  r.results["patterns_examined"] = v.patterns_examined;
}

void split(const Args& a, Report& r) {
  const Loaded in = load(a);
  const GkslGenerator l = require_generator(in, "split");
  SplitVerdict s;
  if (a.which == "cp-part")
    s = cp_part_diagonalizable(l, in.masa, in.tol);
  else
    s = hamiltonian_part_diagonalizable(l, in.masa, in.tol);
  r.verdict("feasible", Verdict{s.feasible, s.residual, s.threshold}, in.tol);
  r.witnesses["coefficients"] = encode_vector(s.coefficients);
  if (s.eta) r.witnesses["eta"] = encode_vector(*s.eta);
  if (s.regauged) r.witnesses["regauged"] = encode_generator(*s.regauged);
  if (!s.feasible) {
    r.certificates["residual_vector"] = encode_real_vector(s.infeasibility_certificate);
    Json conflicts = Json::array();
    for (const auto& e : s.elimination.conflicting)
      conflicts.push_back(Json{{"row", e.row}, {"col", e.col}, {"defect", encode_complex(e.defect)}});
    r.certificates["conflicting"] = conflicts;
    r.certificates["forced_values"] = encode_vector(s.elimination.forced_values);
    r.certificates["forced_unique"] = s.elimination.forced_unique;
  }
}

void equiv(const Args& a, Report& r) {
  const Loaded in = load(a);
  if (a.other.empty()) throw ParseError("equiv needs --other");
  const ProblemFile other = read_problem(a.other);
  const GkslGenerator l = require_generator(in, "equiv");
  if (other.kind != ProblemKind::generator)
    throw ParseError("equiv: --other must be of kind \"generator\"");
  const GkslGenerator k = other.generator(in.tol);
  const bool strict = is_minimal(l, in.tol);
  const auto res = gksl_equivalent(l, k, in.tol, strict);
  const double thr =
      in.tol.threshold(std::max(l.superoperator().norm(), k.superoperator().norm()));
  if (const auto* w = std::get_if<TransformWitness>(&res)) {
    r.verdict("equivalent", Verdict{true, w->distance, thr}, in.tol);
    r.witnesses["m"] = encode_matrix(w->m_matrix);
    r.witnesses["eta_prime"] = encode_vector(w->eta_prime);
    r.witnesses["eta"] = encode_vector(w->eta);
    r.witnesses["gamma"] = encode_complex(w->gamma);
    r.witnesses["h"] = encode_real(w->h_scalar);
    r.witnesses["minimal_path"] = w->minimal_path;
    r.results["kraus_residual"] = encode_real(w->kraus_residual);
    r.results["drift_residual"] = encode_real(w->drift_residual);
    r.results["isometry_residual"] = encode_real(w->isometry_residual);
    r.results["eta_residual"] = encode_real(w->eta_residual);
    r.results["gamma_real_residual"] = encode_real(w->gamma_real_residual);
  } else {
    const auto& ne = std::get<Inequivalent>(res);
    r.verdict("equivalent", Verdict{false, ne.distance, ne.threshold}, in.tol);
  }
}

void restrict_command(const Args& a, Report& r) {
  const Loaded in = load(a);
  const RealMatrix m =
      visit_problem(in, [&](const auto& phi) { return classical_restriction(phi, in.masa, in.tol); });
  r.results["restriction"] = encode_matrix(m);
  const double thr = in.tol.threshold(m.norm());
  if (in.problem.kind == ProblemKind::generator)
    r.verdict("q_matrix", is_q_matrix(m, thr), in.tol);
  else
    r.verdict("stochastic", is_stochastic(m, thr), in.tol);
}

void corpus(const Args& a, Report& r) {
  const ExampleId id = parse_example_id(a.which);
  const Tolerance tol = resolve_tolerance(a, std::nullopt);
  VerifyOptions opt;
  opt.search = search_options(a);
  const VerifyReport v = verify_example(id, tol, opt);
  for (const Check& c : v.checks) {
    // value ≥ threshold checks report the slack as a negative residual
    const double residual = c.relation == ">=" ? -c.value : c.value;
    const double threshold = c.relation == ">=" ? -c.threshold : c.threshold;
    r.verdicts.push_back({c.name, c.passed, residual, threshold, tol});
  }
  for (const NamedMatrix& m : v.matrices) r.results[m.name] = encode_matrix(m.value);
  r.results["id"] = to_string(id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant masas of completely positive maps and GKSL generators"};
  app.require_subcommand(1);
  Args args;

  const auto common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("--input", args.input, "problem file (JSON)");
    if (needs_input) in->required()->check(CLI::ExistingFile);
    sub->add_option("--masa", args.masa, "masa basis unitary (JSON matrix or {\"masa\": ...})");
    sub->add_option("--atol", args.atol, "absolute tolerance");
    sub->add_option("--rtol", args.rtol, "relative tolerance");
    sub->add_option("--seed", args.seed, "search seed")->capture_default_str();
    sub->add_option("--restarts", args.restarts, "search restarts")->capture_default_str();
    sub->add_option("--iterations", args.iterations, "descent iterations per restart")
        ->capture_default_str();
    sub->add_flag("--assert", args.assert_mode, "exit 1 when a verdict fails");
    sub->add_flag("--timing", args.timing, "include wall time in the report");
  };

  using Handler = void (*)(const Args&, Report&);
  std::vector<std::pair<CLI::App*, Handler>> handlers;
  const auto command = [&](const char* name, const char* help, Handler h, bool needs_input = true) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub, needs_input);
    handlers.emplace_back(sub, h);
    return sub;
  };

  command("check-invariance", "is the masa invariant", check_invariance);
  command("find-masa", "find an invariant masa (constructive on M_2, search otherwise)", find_masa);
  command("search-masa", "numerical search for an invariant masa", search_masa_command);
  command("criterion", "coefficient criterion witness or infeasibility", criterion)
      ->add_option("which", args.which, "kraus | generator")
      ->required()
      ->check(CLI::IsMember({"kraus", "generator"}));
  command("rebolledo", "per-operator and compatible-element test", rebolledo);
  command("split", "split feasibility relative to the masa", split)
      ->add_option("which", args.which, "cp-part | hamiltonian")
      ->required()
      ->check(CLI::IsMember({"cp-part", "hamiltonian"}));
  command("equiv", "equivalence of two GKSL forms", equiv)
      ->add_option("--other", args.other, "second problem file")
      ->required()
      ->check(CLI::ExistingFile);
  command("restrict", "classical restriction to the masa", restrict_command);
  command("corpus", "verify a worked example", corpus, false)
      ->add_option("id", args.which, "ex2_1 | ex2_2 | ex2_8 | ex3_2 | ex3_3 | ex3_4")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  for (const auto& [sub, handler] : handlers) {
    if (!sub->parsed()) continue;
    Report report;
    report.command = sub->get_name();
    if (!args.which.empty()) report.command += " " + args.which;
    const auto start = std::chrono::steady_clock::now();
    try {
      handler(args, report);
    } catch (const ParseError& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return kExitInput;
    } catch (const DimensionMismatch& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return kExitInput;
    } catch (const ToleranceInvalid& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return kExitInput;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitPrecondition;
    }
    if (args.timing)
      report.timing_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::cout << serialize(report) << "\n";
    return args.assert_mode && !report.all_hold() ? kExitFails : kExitOk;
  }
  return kExitInput;
}
