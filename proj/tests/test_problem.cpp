#include <gtest/gtest.h>

#include "util.hpp"

using namespace qsep;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({"dimension": 1, "box": [[-1, 1]], "h": "s^2", "Psi": "s1 - s2"})");
}

std::string error_of(const json& doc) {
  try {
    parse_problem(doc, "doc");
  } catch (const ProblemError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Problem, Minimal) {
  const auto pf = parse_problem(minimal(), "doc");
  EXPECT_EQ(pf.dimension, 1);
  EXPECT_TRUE(pf.has_h);
  EXPECT_EQ(pf.triple.S.role(), BoxRole::Constraint);
  EXPECT_EQ(pf.triple.E(pt({0.5}))[0], 0.5);
  EXPECT_EQ(pf.plan.seed, 42u);
}

TEST(Problem, FieldErrorsNameTheField) {
  auto doc = minimal();
  doc["bogus"] = 1;
  EXPECT_NE(error_of(doc).find("'bogus'"), std::string::npos);

  doc = minimal();
  doc.erase("Psi");
  EXPECT_NE(error_of(doc).find("'Psi'"), std::string::npos);

  doc = minimal();
  doc["h"] = "s +";
  EXPECT_NE(error_of(doc).find("'h'"), std::string::npos);

  doc = minimal();
  doc["box"] = json::parse("[[1, -1]]");
  EXPECT_NE(error_of(doc).find("'box'"), std::string::npos);

  doc = minimal();
  doc["checks"] = json::array({"convexish"});
  EXPECT_NE(error_of(doc).find("'checks[0]'"), std::string::npos);

  doc = minimal();
  doc["weights"] = json::array({1.0});
  doc["family"] = json::array({"s", "s^2"});
  EXPECT_FALSE(error_of(doc).empty());
}

TEST(Problem, PlanAndRoles) {
  auto doc = minimal();
  doc["box_role"] = "window";
  doc["plan"] = json::parse(R"({"seed": 7, "grid": 5, "random_pairs": 3})");
  doc["probes"] = json::parse(R"([{"s": [0], "t": [1], "alpha": 0.5, "lambda": 0.5}])");
  const auto pf = parse_problem(doc, "doc");
  EXPECT_EQ(pf.triple.S.role(), BoxRole::Window);
  EXPECT_EQ(pf.plan.seed, 7u);
  EXPECT_EQ(pf.plan.grid_per_axis, 5);
  EXPECT_EQ(pf.plan.random_pairs, 3);
  ASSERT_EQ(pf.plan.probes.size(), 1u);
  EXPECT_EQ(pf.plan.probes[0].alpha, 0.5);
}

TEST(Problem, Nlpp) {
  const auto doc = json::parse(R"({"dimension": 1, "box": [[-1, 1]], "box_role": "constraint",
    "objective": "s^2", "constraints": ["s - 0.5"], "Psi": "s1 - s2"})");
  const auto pf = parse_problem(doc, "doc");
  ASSERT_TRUE(pf.nlpp);
  EXPECT_EQ(pf.nlpp->constraints.size(), 1u);
  EXPECT_TRUE(pf.has_h);
}

TEST(Problem, Builtins) {
  for (const auto& name : builtin_names()) {
    SCOPED_TRACE(name);
    const auto pf = load_builtin(name);
    EXPECT_EQ(pf.origin, "builtin:" + name);
    // Dumping and reparsing the source gives the same document.
    const auto again = parse_problem(builtin_source(name), "again");
    EXPECT_EQ(again.source, pf.source);
  }
  EXPECT_THROW(load_builtin("nope"), std::exception);
}

TEST(Problem, ReportJsonRoundTrip) {
  const auto pf = load_builtin("ex2");
  const auto r = check_qsep(pf.triple, pf.plan);
  const json j = r;
  const CertReport back = j.get<CertReport>();
  EXPECT_EQ(json(back).dump(), j.dump());
  EXPECT_EQ(back.witness->lhs, 2.0);
}
