#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsep/nlpp.hpp"
#include "qsep/theorems.hpp"

namespace qsep {

/// Unreadable or inconsistent problem file; the message names the field.
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parsed problem document. Fields that the document leaves out stay empty
/// and the operations needing them report the omission.
struct ProblemFile {
  std::string origin;
  Index dimension = 0;
  std::vector<std::string> variables;
  ProblemTriple triple;
  bool has_h = false;
  std::optional<NlppProblem> nlpp;
  FamilySpec family;
  std::optional<BivariateFn> F;
  SamplingPlan plan;
  SamplingPlan t_grid;
  std::vector<double> r_values;
  std::vector<std::string> checks;
  nlohmann::json source;
};

ProblemFile parse_problem(const nlohmann::json& doc, const std::string& origin);
ProblemFile load_problem(const std::string& path);

/// ex1, ex2, ex_qsei, ex_psei, nlpp_strict, nlpp_control.
const std::vector<std::string>& builtin_names();
nlohmann::json builtin_source(const std::string& name);
ProblemFile load_builtin(const std::string& name);

}  // namespace qsep
