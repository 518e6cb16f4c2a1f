#include "qsep/cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "qsep/problem.hpp"

namespace qsep::cli {

namespace {

using nlohmann::json;

struct Options {
  std::string json_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<double> tol;
  int threads = 0;
  int starts = 32;
  bool refine = false;
};

ProblemFile open_problem(const std::string& where) {
  const std::string prefix = "builtin:";
  if (where.rfind(prefix, 0) == 0) return load_builtin(where.substr(prefix.size()));
  return load_problem(where);
}

void apply(const Options& o, ProblemFile& pf) {
  if (o.seed) pf.plan.seed = *o.seed;
  if (o.grid) pf.plan.grid_per_axis = *o.grid;
}

void print_report(std::ostream& out, const CertReport& r, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  out << pad << r.property << ": " << to_string(r.status);
  // Suites and bundles carry their counts in the sub-reports.
  if (r.samples_checked > 0 || r.sub_reports.empty()) {
    out << " (" << r.violations << " violations in " << r.samples_checked << " samples)";
  }
  if (!r.stage.empty()) out << " stage " << r.stage;
  out << '\n';
  if (r.witness) {
    const Witness& w = *r.witness;
    out << pad << "  witness s=" << describe_point(w.s) << " t=" << describe_point(w.t)
        << " alpha=" << format_real(w.alpha) << " lambda=" << format_real(w.lambda)
        << " lhs=" << format_real(w.lhs) << " rhs=" << format_real(w.rhs)
        << " margin=" << format_real(w.margin) << '\n';
  }
  if (depth == 0) {
    for (const auto& note : r.notes) out << pad << "  note: " << note << '\n';
  }
  for (const auto& sub : r.sub_reports) print_report(out, sub, depth + 1);
}

int finish(const Options& o, const CertReport& report, std::ostream& out,
           const json* extra = nullptr) {
  print_report(out, report, 0);
  if (!o.json_path.empty()) {
    json j = report;
    if (extra) j["result"] = *extra;
    std::ofstream f(o.json_path);
    if (!f) throw std::runtime_error("cannot write " + o.json_path);
    f << j.dump(2) << '\n';
  }
  return exit_code(report);
}

const ProblemTriple& triple_of(const ProblemFile& pf) {
  if (!pf.has_h) throw ProblemError(pf.origin + ": field 'h': missing");
  return pf.triple;
}

int do_certify(const Options& o, const std::string& prop, ProblemFile pf, std::ostream& out) {
  apply(o, pf);
  return finish(o, check(property_from_string(prop), triple_of(pf), pf.plan), out);
}

int do_counterexample(const Options& o, const std::string& prop, ProblemFile pf,
                      std::ostream& out) {
  apply(o, pf);
  const Property p = property_from_string(prop);
  std::size_t checked = 0;
  const auto w = find_counterexample(p, triple_of(pf), pf.plan, o.refine, default_tolerance(),
                                     &checked);
  CertReport r;
  r.property = std::string(to_string(p));
  r.plan = pf.plan;
  r.plan.normalize();
  r.samples_checked = checked;
  if (w) {
    r.status = Status::Refuted;
    r.witness = w;
    r.violations = 1;
    r.notes.push_back(o.refine ? "largest-margin sample refined by coordinate search"
                               : "largest-margin sample");
  } else {
    r.notes.push_back("no violation on the sampled quadruples; not a proof");
  }
  return finish(o, r, out);
}

using SuiteFn = std::function<CertReport(const ProblemFile&)>;

const std::map<std::string, SuiteFn>& suites() {
  static const std::map<std::string, SuiteFn> table{
      {"shift", [](const ProblemFile& pf) { return verify_shift_property(triple_of(pf), pf.plan); }},
      {"linear_combination",
       [](const ProblemFile& pf) {
         return verify_linear_combination(pf.family, triple_of(pf), pf.plan);
       }},
      {"sup_family",
       [](const ProblemFile& pf) { return verify_sup_family(pf.family, triple_of(pf), pf.plan); }},
      {"composition",
       [](const ProblemFile& pf) { return verify_composition(pf.family, triple_of(pf), pf.plan); }},
      {"sep_implies_qsep",
       [](const ProblemFile& pf) { return verify_sep_implies_qsep(triple_of(pf), pf.plan); }},
      {"inf_marginal",
       [](const ProblemFile& pf) {
         if (!pf.F) throw ProblemError(pf.origin + ": field 'F': missing");
         return verify_inf_marginal(*pf.F, triple_of(pf), pf.t_grid, pf.plan);
       }},
      {"sei_implies_qsei",
       [](const ProblemFile& pf) { return verify_sei_implies_qsei(triple_of(pf), pf.plan); }},
      {"sei_conda_implies_sep",
       [](const ProblemFile& pf) { return verify_sei_conda_implies_sep(triple_of(pf), pf.plan); }},
      {"sei_nonneg_dot_implies_psei",
       [](const ProblemFile& pf) {
         return verify_sei_nonneg_dot_implies_psei(triple_of(pf), pf.plan);
       }},
      {"levelsets_imply_qsep",
       [](const ProblemFile& pf) {
         if (pf.r_values.empty()) throw ProblemError(pf.origin + ": field 'r_values': missing");
         return check_levelsets_imply_qsep(triple_of(pf), pf.r_values, pf.plan);
       }},
      {"qsep_sublevel_sei",
       [](const ProblemFile& pf) {
         return qsep_sublevel_sei(pf.family.members, pf.triple.E, pf.triple.psi, pf.triple.S,
                                  pf.plan);
       }},
  };
  return table;
}

int do_suite(const Options& o, const std::string& name, ProblemFile pf, std::ostream& out) {
  apply(o, pf);
  const auto it = suites().find(name);
  if (it == suites().end()) throw std::invalid_argument("unknown suite '" + name + "'");
  return finish(o, it->second(pf), out);
}

int do_solve(const Options& o, ProblemFile pf, std::ostream& out) {
  apply(o, pf);
  if (!pf.nlpp) throw ProblemError(pf.origin + ": field 'objective': missing");
  const NlppResult res = solve(*pf.nlpp, pf.plan, o.starts);
  out << "minimizer " << describe_point(res.minimizer) << " value " << format_real(res.value)
      << " scan best " << format_real(res.global_scan_best) << " gap "
      << format_real(res.global_gap) << " starts " << res.starts_used << '\n';
  const json extra = res;
  return finish(o, res.report, out, &extra);
}

int do_examples_all(const Options& o, ProblemFile pf, std::ostream& out) {
  apply(o, pf);
  CertReport bundle;
  bundle.property = "examples";
  bundle.plan = pf.plan;
  bundle.plan.normalize();
  if (pf.nlpp && pf.checks.empty()) return do_solve(o, std::move(pf), out);
  for (const auto& name : pf.checks) {
    CertReport r = check(property_from_string(name), triple_of(pf), pf.plan);
    if (r.status == Status::TheoremViolation) {
      bundle.status = Status::TheoremViolation;
    } else if (!r.certified() && bundle.status == Status::Certified) {
      bundle.status = Status::Refuted;
    }
    bundle.sub_reports.push_back(std::move(r));
  }
  return finish(o, bundle, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certify and refute generalized convexity properties on sampled quadruples"};
  app.name("qsep");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--json", o.json_path, "Write the JSON report to this path");
  app.add_option("--seed", o.seed, "Sampling seed");
  app.add_option("--grid", o.grid, "Grid points per axis")->check(CLI::PositiveNumber);
  app.add_option("--tol", o.tol, "Relative violation tolerance")->check(CLI::PositiveNumber);
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  std::string prop, file, name, example, check_name, suite_name;
  bool do_dump = false, do_solve_flag = false;

  auto* certify = app.add_subcommand("certify", "Certify or refute one property");
  certify->add_option("property", prop)->required();
  certify->add_option("file", file, "Problem file or builtin:NAME")->required();

  auto* cex = app.add_subcommand("counterexample", "Largest-margin violation of a property");
  cex->add_option("property", prop)->required();
  cex->add_option("file", file)->required();
  cex->add_flag("--refine", o.refine, "Refine the witness by coordinate search");

  auto* suite = app.add_subcommand("suite", "Run a theorem suite");
  suite->add_option("theorem", name)->required();
  suite->add_option("file", file)->required();

  auto* solve_cmd = app.add_subcommand("solve", "Multi-start solve of the NLPP in a problem file");
  solve_cmd->add_option("file", file)->required();
  solve_cmd->add_option("--starts", o.starts, "Number of starts")->check(CLI::PositiveNumber);

  auto* ex = app.add_subcommand("examples", "Run a built-in fixture");
  ex->add_option("name", example)->required();
  auto* check_opt = ex->add_option("--check", check_name, "Property to check");
  auto* suite_opt = ex->add_option("--suite", suite_name, "Theorem suite to run");
  auto* solve_opt = ex->add_flag("--solve", do_solve_flag, "Solve the fixture's NLPP");
  auto* dump_opt = ex->add_flag("--dump", do_dump, "Print the fixture's problem file");
  ex->add_option("--starts", o.starts, "Number of starts")->check(CLI::PositiveNumber);
  check_opt->excludes(suite_opt)->excludes(solve_opt)->excludes(dump_opt);
  suite_opt->excludes(solve_opt)->excludes(dump_opt);
  solve_opt->excludes(dump_opt);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Prints the help of the subcommand that asked for it, or the error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    set_thread_count(o.threads);
    set_default_tolerance(o.tol.value_or(kRelTol));
    if (*certify) return do_certify(o, prop, open_problem(file), out);
    if (*cex) return do_counterexample(o, prop, open_problem(file), out);
    if (*suite) return do_suite(o, name, open_problem(file), out);
    if (*solve_cmd) return do_solve(o, open_problem(file), out);
    if (do_dump) {
      out << builtin_source(example).dump(2) << '\n';
      return kExitOk;
    }
    ProblemFile pf = load_builtin(example);
    if (!check_name.empty()) return do_certify(o, check_name, std::move(pf), out);
    if (!suite_name.empty()) return do_suite(o, suite_name, std::move(pf), out);
    if (do_solve_flag) return do_solve(o, std::move(pf), out);
    return do_examples_all(o, std::move(pf), out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace qsep::cli
