#include <cmath>

#include <gtest/gtest.h>

#include "util.hpp"

using namespace qsep;

TEST(Nlpp, FeasibleSet) {
  const auto pf = load_builtin("nlpp_strict");
  ASSERT_TRUE(pf.nlpp);
  const SetSpec X = feasible_set(*pf.nlpp);
  EXPECT_TRUE(is_member(X, pt({0.5})));
  EXPECT_FALSE(is_member(X, pt({0.95})));
  EXPECT_FALSE(is_member(X, pt({1.5})));
}

TEST(Nlpp, AssumptionsStrict) {
  const auto pf = load_builtin("nlpp_strict");
  const auto r = certify_assumptions(*pf.nlpp, pf.plan);
  EXPECT_TRUE(r.certified());
  for (const char* stage : {"e_image_subset", "sei_set", "shift_feasible", "qsep[h0]",
                            "strict_qsep[h0]"})
    EXPECT_NE(r.find(stage), nullptr) << stage;
}

TEST(Nlpp, AssumptionsControlFail) {
  const auto pf = load_builtin("nlpp_control");
  const auto r = certify_assumptions(*pf.nlpp, pf.plan);
  EXPECT_EQ(r.status, Status::HypothesisFailed);
  EXPECT_FALSE(r.stage.empty());
}

TEST(Nlpp, LocalSearchQuadratic) {
  NlppProblem P;
  P.objective = ScalarFn::parse("(s - 0.3)^2 + (t + 0.2)^2", {"s", "t"});
  P.E = VectorMap::identity(2);
  P.psi = PairMap::difference(2);
  P.box = Box::uniform(2, -1, 1);
  const auto r = local_search(P, pt({0.9, 0.9}), 0.5);
  EXPECT_NEAR(r.minimizer[0], 0.3, 1e-6);
  EXPECT_NEAR(r.minimizer[1], -0.2, 1e-6);
  EXPECT_GT(r.local_ball_radius, 0.0);
  EXPECT_THROW(local_search(P, pt({2, 0}), 0.5), std::exception);
}

TEST(Nlpp, ConstraintActive) {
  // min -s subject to s^2 <= 0.25: the optimum sits on the constraint at s = 0.5.
  NlppProblem P;
  P.objective = ScalarFn::parse("-s", {"s"});
  P.constraints = {ScalarFn::parse("s^2 - 0.25", {"s"})};
  P.E = VectorMap::identity(1);
  P.psi = PairMap::difference(1);
  P.box = Box::uniform(1, -1, 1);
  const auto res = solve(P, small_plan(), 8);
  EXPECT_NEAR(res.minimizer[0], 0.5, 1e-6);
  EXPECT_LE(res.feasibility_residual, 1e-9);
}

TEST(Nlpp, StartsAreFeasibleAndDeterministic) {
  const auto pf = load_builtin("nlpp_strict");
  const auto a = feasible_starts(*pf.nlpp, 16);
  const auto b = feasible_starts(*pf.nlpp, 16);
  ASSERT_EQ(a.size(), 16u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(is_member(feasible_set(*pf.nlpp), a[i]));
    EXPECT_EQ(a[i], b[i]);
  }
}

TEST(Nlpp, SolveStrictReachesScanBest) {
  const auto pf = load_builtin("nlpp_strict");
  const auto res = solve(*pf.nlpp, pf.plan, 32);
  EXPECT_TRUE(res.report.certified());
  EXPECT_EQ(res.starts.size(), 32u);
  // Oracle: h0 = s^2 on [-0.9, 0.9] has its minimum 0 at 0.
  EXPECT_NEAR(res.global_scan_best, 0.0, 1e-12);
  for (const auto& s : res.starts) EXPECT_LE(s.value - res.global_scan_best, 1e-6);
}

TEST(Nlpp, ControlHasTwoBasins) {
  const auto pf = load_builtin("nlpp_control");
  const auto res = solve(*pf.nlpp, pf.plan, 32);
  double lo = 1e9, hi = -1e9;
  for (const auto& s : res.starts) {
    lo = std::min(lo, s.minimizer[0]);
    hi = std::max(hi, s.minimizer[0]);
  }
  EXPECT_NEAR(lo, -1.0, 1e-6);
  EXPECT_NEAR(hi, 1.0, 1e-6);
  EXPECT_EQ(res.scan_clusters, 2u);
}
