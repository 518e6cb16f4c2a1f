#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qsep/cli.hpp"
#include "util.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qsep::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path temp(const std::string& name) { return fs::temp_directory_path() / ("qsep_" + name); }

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"examples", "ex1", "--check", "qsep"}).code, 0);
  EXPECT_EQ(cli({"examples", "ex1", "--check", "sep"}).code, 2);
  EXPECT_EQ(cli({"suite", "sep_implies_qsep", "builtin:ex1"}).code, 2);
  EXPECT_EQ(cli({"examples", "nope"}).code, 1);
  EXPECT_EQ(cli({"certify", "convex", "builtin:ex1"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"examples", "ex1", "--check", "qsep", "--suite", "shift"}).code, 1);
}

TEST(Cli, TheoremViolationExit) {
  const auto path = temp("hump.json");
  std::ofstream(path) << R"({"dimension": 1, "box": [[-1, 1]], "h": "s", "Psi": "s1 - s2",
    "alpha_pinned_zero": true,
    "family": ["if s < 0 then 0 else 1", "if s < 0.5 then 1 else 0"], "weights": [1, 1]})";
  const auto r = cli({"suite", "linear_combination", path.string()});
  EXPECT_EQ(r.code, 3) << r.out << r.err;
  EXPECT_NE(r.out.find("theorem_violation"), std::string::npos);
}

TEST(Cli, MissingFileIsError) {
  const auto r = cli({"certify", "qsep", "/nonexistent/problem.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, JsonDeterministic) {
  const auto a = temp("a.json"), b = temp("b.json");
  EXPECT_EQ(cli({"--json", a.string(), "--threads", "1", "examples", "ex2", "--check", "qsep"}).code, 2);
  EXPECT_EQ(cli({"--json", b.string(), "--threads", "4", "examples", "ex2", "--check", "qsep"}).code, 2);
  EXPECT_EQ(slurp(a), slurp(b));
  const auto j = nlohmann::json::parse(slurp(a));
  EXPECT_EQ(j["status"], "refuted");
  EXPECT_EQ(j["witness"]["lhs"], 2.0);
}

TEST(Cli, FlagsAfterSubcommand) {
  const auto r = cli({"examples", "ex1", "--check", "qsep", "--grid", "5", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, Counterexample) {
  const auto path = temp("cex.json");
  const auto r = cli({"counterexample", "sep", "builtin:ex1", "--refine", "--json", path.string()});
  EXPECT_EQ(r.code, 2);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_GT(j["witness"]["margin"].get<double>(), 0.0);
  EXPECT_GT(j["samples_checked"].get<std::size_t>(), 0u);
  EXPECT_EQ(cli({"counterexample", "qsep", "builtin:ex1"}).code, 0);
}

TEST(Cli, SolveAndDump) {
  const auto path = temp("solve.json");
  EXPECT_EQ(cli({"solve", "builtin:nlpp_strict", "--json", path.string()}).code, 0);
  const auto j = nlohmann::json::parse(slurp(path));
  EXPECT_TRUE(j.contains("result"));
  EXPECT_EQ(j["result"]["starts"].size(), 32u);
  const auto d = cli({"examples", "ex2", "--dump"});
  EXPECT_EQ(d.code, 0);
  EXPECT_EQ(nlohmann::json::parse(d.out)["E"], "-s^2");
}

TEST(Cli, ToleranceFlag) {
  EXPECT_EQ(cli({"--tol", "-1", "examples", "ex1", "--check", "qsep"}).code, 1);
  EXPECT_EQ(cli({"--tol", "1e-6", "examples", "ex1", "--check", "qsep"}).code, 0);
}
