#include "qsep/problem.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace qsep {

namespace {

using nlohmann::json;

// Built-in fixtures. ex1/ex2 live on S = R, so their box is only the
// sampling window.
const std::map<std::string, std::string>& builtin_text() {
  static const std::map<std::string, std::string> table{
      {"ex1", R"js({
        "dimension": 1,
        "box": [[-2, 2]],
        "box_role": "window",
        "h": "if s > 0 then 1 else -s",
        "E": "abs(s)",
        "Psi": "if s1 != s2 then -s2 else 0",
        "probes": [{"s": [0], "t": [1], "alpha": 0.5, "lambda": 0.5}],
        "family": ["if s > 0 then 1 else -s", "if s > 0 then 1 else s^2"],
        "weights": [1, 2],
        "outer": "max(x, 0)",
        "F": "max(if s1 > 0 then 1 else -s1, if s2 > 0 then 1 else -s2)",
        "t_grid": {"grid": 21},
        "r_values": [0, 0.5, 1, 2],
        "checks": ["sep", "qsep", "e_prequasi_invex", "strict_qsep"]
      })js"},
      {"ex2", R"js({
        "dimension": 1,
        "box": [[-2, 2]],
        "box_role": "window",
        "h": "if s > 0 then 1 else -s",
        "E": "-s^2",
        "Psi": "if s1 != s2 then -s2 else 0",
        "probes": [{"s": [0], "t": [-1], "alpha": 1, "lambda": 0}],
        "family": ["if s > 0 then 1 else -s"],
        "outer": "2*x",
        "r_values": [0, 0.5, 1, 2],
        "checks": ["qsep", "e_prequasi_invex"]
      })js"},
      {"ex_qsei", R"js({
        "dimension": 2,
        "box": [[-2, 0], [-2, 0]],
        "box_role": "window",
        "set": ["s", "t"],
        "h": "s^3 + t^3",
        "grad_h": "[3*s^2, 3*t^2]",
        "E": "[0, t]",
        "Psi": "[s1 - s2, t1 - t2]",
        "probes": [{"s": [-1, -0.5], "t": [-1, -0.25], "alpha": 1, "lambda": 0}],
        "checks": ["qsei", "sei"]
      })js"},
      {"ex_psei", R"js({
        "dimension": 2,
        "box": [[0, 2], [0, 2]],
        "box_role": "window",
        "set": ["-s", "-t"],
        "h": "-s^2 - t^2",
        "grad_h": "[-2*s, -2*t]",
        "E": "[0, t]",
        "Psi": "[s1 - s2, t1 - t2]",
        "probes": [{"s": [1, 0.5], "t": [1, 1.5], "alpha": 0, "lambda": 0}],
        "checks": ["psei", "sei"]
      })js"},
      {"nlpp_strict", R"js({
        "dimension": 1,
        "box": [[-1, 1]],
        "objective": "s^2",
        "constraints": ["s^2 - 0.81"],
        "E": "-s/2",
        "Psi": "s1 - s2"
      })js"},
      {"nlpp_control", R"js({
        "dimension": 1,
        "box": [[-2, 2]],
        "objective": "(s^2 - 1)^2",
        "E": "s",
        "Psi": "s1 - s2"
      })js"},
  };
  return table;
}

[[noreturn]] void fail(const std::string& origin, const std::string& field, const std::string& msg) {
  throw ProblemError(origin + ": field '" + field + "': " + msg);
}

template <typename Fn>
auto guarded(const std::string& origin, const std::string& field, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ProblemError&) {
    throw;
  } catch (const std::exception& e) {
    fail(origin, field, e.what());
  }
}

std::vector<std::string> string_list(const json& doc, const std::string& key,
                                     const std::string& origin) {
  if (!doc.contains(key)) return {};
  return guarded(origin, key, [&] { return doc.at(key).get<std::vector<std::string>>(); });
}

const std::vector<std::string> kKnownFields{
    "dimension", "variables", "psi_variables", "F_variables", "box",          "box_role",
    "set",       "h",         "grad_h",        "E",           "E_inverse",    "Psi",
    "closed_domain", "alpha_pinned_zero", "constraints", "objective", "family", "weights",
    "outer",     "F",         "plan",          "probes",      "t_grid",       "r_values",
    "checks",    "name"};

}  // namespace

ProblemFile parse_problem(const json& doc, const std::string& origin) {
  if (!doc.is_object()) throw ProblemError(origin + ": problem must be a JSON object");
  for (const auto& item : doc.items()) {
    if (std::find(kKnownFields.begin(), kKnownFields.end(), item.key()) == kKnownFields.end()) {
      fail(origin, item.key(), "unknown field");
    }
  }
  ProblemFile pf;
  pf.origin = origin;
  pf.source = doc;

  if (!doc.contains("dimension")) fail(origin, "dimension", "missing");
  const int n = guarded(origin, "dimension", [&] { return doc.at("dimension").get<int>(); });
  if (n < 1) fail(origin, "dimension", "must be at least 1");
  pf.dimension = n;
  pf.variables = doc.contains("variables") ? string_list(doc, "variables", origin)
                                           : default_variables(n);
  if (static_cast<Index>(pf.variables.size()) != n) {
    fail(origin, "variables", "expected " + std::to_string(n) + " names");
  }
  const auto pair_vars = doc.contains("psi_variables") ? string_list(doc, "psi_variables", origin)
                                                       : pair_variables(pf.variables);
  if (static_cast<Index>(pair_vars.size()) != 2 * n) {
    fail(origin, "psi_variables", "expected " + std::to_string(2 * n) + " names");
  }

  if (!doc.contains("box")) fail(origin, "box", "missing");
  const Box box = guarded(origin, "box", [&] {
    const auto rows = doc.at("box").get<std::vector<std::array<double, 2>>>();
    if (static_cast<int>(rows.size()) != n) {
      throw std::invalid_argument("expected " + std::to_string(n) + " [lo, hi] pairs");
    }
    Point lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = rows[static_cast<std::size_t>(i)][0];
      hi[i] = rows[static_cast<std::size_t>(i)][1];
      if (!(lo[i] <= hi[i])) throw std::invalid_argument("lo > hi on axis " + std::to_string(i));
    }
    return Box(lo, hi);
  });
  BoxRole role = BoxRole::Constraint;
  if (doc.contains("box_role")) {
    const auto r = guarded(origin, "box_role", [&] { return doc.at("box_role").get<std::string>(); });
    if (r == "window") {
      role = BoxRole::Window;
    } else if (r != "constraint") {
      fail(origin, "box_role", "expected 'window' or 'constraint'");
    }
  }

  auto scalar = [&](const std::string& key, const std::string& src,
                    const std::vector<std::string>& vars) {
    return guarded(origin, key, [&] { return ScalarFn::parse(src, vars); });
  };
  auto field_text = [&](const std::string& key) {
    return guarded(origin, key, [&] { return doc.at(key).get<std::string>(); });
  };

  std::vector<ScalarFn> preds;
  const auto set_src = string_list(doc, "set", origin);
  for (std::size_t k = 0; k < set_src.size(); ++k) {
    preds.push_back(scalar("set[" + std::to_string(k) + "]", set_src[k], pf.variables));
  }
  pf.triple.S = SetSpec(box, std::move(preds), role);

  if (doc.contains("E")) {
    pf.triple.E = guarded(origin, "E", [&] { return VectorMap::parse(field_text("E"), pf.variables, n); });
  } else {
    pf.triple.E = VectorMap::identity(n);
  }
  if (!doc.contains("Psi")) fail(origin, "Psi", "missing");
  pf.triple.psi = guarded(origin, "Psi", [&] { return PairMap::parse(field_text("Psi"), pair_vars, n); });
  if (doc.contains("grad_h")) {
    pf.triple.grad_h =
        guarded(origin, "grad_h", [&] { return VectorMap::parse(field_text("grad_h"), pf.variables, n); });
  }
  if (doc.contains("E_inverse")) {
    pf.triple.e_inverse = guarded(
        origin, "E_inverse", [&] { return VectorMap::parse(field_text("E_inverse"), pf.variables, n); });
  }
  if (doc.contains("closed_domain")) {
    pf.triple.closed_domain =
        guarded(origin, "closed_domain", [&] { return doc.at("closed_domain").get<bool>(); });
  }
  if (doc.contains("alpha_pinned_zero")) {
    pf.triple.pin_alpha_zero =
        guarded(origin, "alpha_pinned_zero", [&] { return doc.at("alpha_pinned_zero").get<bool>(); });
  }

  std::optional<ScalarFn> objective;
  if (doc.contains("objective")) objective = scalar("objective", field_text("objective"), pf.variables);
  if (doc.contains("h")) {
    pf.triple.h = scalar("h", field_text("h"), pf.variables);
    pf.has_h = true;
  } else if (objective) {
    pf.triple.h = *objective;
    pf.has_h = true;
  }

  if (objective || doc.contains("constraints")) {
    NlppProblem np;
    if (!objective) fail(origin, "objective", "constraints given without an objective");
    np.objective = *objective;
    const auto cons = string_list(doc, "constraints", origin);
    for (std::size_t k = 0; k < cons.size(); ++k) {
      np.constraints.push_back(scalar("constraints[" + std::to_string(k) + "]", cons[k], pf.variables));
    }
    np.E = pf.triple.E;
    np.psi = pf.triple.psi;
    np.box = box;
    pf.nlpp = std::move(np);
  }

  const auto members = string_list(doc, "family", origin);
  for (std::size_t k = 0; k < members.size(); ++k) {
    pf.family.members.push_back(scalar("family[" + std::to_string(k) + "]", members[k], pf.variables));
  }
  if (doc.contains("weights")) {
    pf.family.weights =
        guarded(origin, "weights", [&] { return doc.at("weights").get<std::vector<double>>(); });
  }
  if (doc.contains("outer")) pf.family.outer = scalar("outer", field_text("outer"), {"x"});
  guarded(origin, "family", [&] {
    pf.family.validate(n);
    return 0;
  });

  if (doc.contains("F")) {
    const auto fvars = doc.contains("F_variables") ? string_list(doc, "F_variables", origin) : pair_vars;
    if (static_cast<Index>(fvars.size()) != 2 * n) {
      fail(origin, "F_variables", "expected " + std::to_string(2 * n) + " names");
    }
    pf.F = BivariateFn{scalar("F", field_text("F"), fvars)};
  }

  if (doc.contains("plan")) {
    pf.plan = guarded(origin, "plan", [&] { return doc.at("plan").get<SamplingPlan>(); });
  }
  if (doc.contains("probes")) {
    pf.plan.probes =
        guarded(origin, "probes", [&] { return doc.at("probes").get<std::vector<Probe>>(); });
  }
  for (std::size_t k = 0; k < pf.plan.probes.size(); ++k) {
    const Probe& p = pf.plan.probes[k];
    if (p.s.size() != n || p.t.size() != n) {
      fail(origin, "probes[" + std::to_string(k) + "]", "point dimension mismatch");
    }
  }
  guarded(origin, "plan", [&] {
    SamplingPlan check = pf.plan;
    check.normalize();
    return 0;
  });
  if (doc.contains("t_grid")) {
    pf.t_grid = guarded(origin, "t_grid", [&] { return doc.at("t_grid").get<SamplingPlan>(); });
  }
  if (doc.contains("r_values")) {
    pf.r_values =
        guarded(origin, "r_values", [&] { return doc.at("r_values").get<std::vector<double>>(); });
  }
  pf.checks = string_list(doc, "checks", origin);
  for (std::size_t k = 0; k < pf.checks.size(); ++k) {
    guarded(origin, "checks[" + std::to_string(k) + "]", [&] {
      return property_from_string(pf.checks[k]);
    });
  }
  if (pf.has_h) {
    guarded(origin, "h", [&] {
      pf.triple.validate();
      return 0;
    });
  }
  return pf;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError(path + ": cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProblemError(path + ": " + e.what());
  }
  return parse_problem(doc, path);
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& kv : builtin_text()) out.push_back(kv.first);
    return out;
  }();
  return names;
}

json builtin_source(const std::string& name) {
  const auto& table = builtin_text();
  const auto it = table.find(name);
  if (it == table.end()) throw ProblemError("unknown built-in problem '" + name + "'");
  return json::parse(it->second);
}

ProblemFile load_builtin(const std::string& name) {
  return parse_problem(builtin_source(name), "builtin:" + name);
}

}  // namespace qsep
