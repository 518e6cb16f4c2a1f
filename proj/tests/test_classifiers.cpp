#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "util.hpp"

using namespace qsep;

namespace {

ProblemTriple univariate(const std::string& h, double lo, double hi) {
  ProblemTriple P;
  P.h = ScalarFn::parse(h, {"s"});
  P.E = VectorMap::identity(1);
  P.psi = PairMap::difference(1);
  P.S = SetSpec(Box::uniform(1, lo, hi));
  // alpha t + t leaves a bounded interval, so only the alpha = 0 path is closed.
  P.pin_alpha_zero = true;
  return P;
}

void expect_recomputes(Property p, const ProblemTriple& P, const CertReport& r) {
  ASSERT_TRUE(r.witness);
  const auto o = recompute_witness(p, P, *r.witness);
  EXPECT_TRUE(o.violated);
  EXPECT_NEAR(o.lhs, r.witness->lhs, 1e-12);
  EXPECT_NEAR(o.rhs, r.witness->rhs, 1e-12);
  EXPECT_NEAR(o.margin, r.witness->margin, 1e-12);
}

}  // namespace

TEST(Classifiers, PropertyNames) {
  for (auto p : {Property::Sep, Property::Qsep, Property::StrictQsep, Property::EPreinvex,
                 Property::EPrequasiInvex, Property::Sei, Property::Qsei, Property::Psei,
                 Property::ConditionA})
    EXPECT_EQ(property_from_string(to_string(p)), p);
  EXPECT_THROW(property_from_string("convex"), std::invalid_argument);
}

TEST(Classifiers, Ex1Sides) {
  const auto pf = load_builtin("ex1");
  // By hand: alpha t + E t = 1.5, alpha s + E s = 0, Psi(0, 1.5) = -1.5, point = 1.5 - 0.75 = 0.75.
  const Sides sep = sep_sides(pf.triple, pt({0}), pt({1}), 0.5, 0.5);
  EXPECT_EQ(sep.lhs, 1.0);  // h(3/4) = 1
  EXPECT_EQ(sep.rhs, 0.5);  // (h(0) + h(1)) / 2
  const Sides q = qsep_sides(pf.triple, pt({0}), pt({1}), 0.5, 0.5);
  EXPECT_EQ(q.rhs, 1.0);
}

TEST(Classifiers, Ex1Statuses) {
  const auto pf = load_builtin("ex1");
  const auto sep = check_sep(pf.triple, pf.plan);
  ASSERT_TRUE(sep.refuted());
  EXPECT_EQ(sep.witness->s[0], 0.0);
  EXPECT_EQ(sep.witness->t[0], 1.0);
  expect_recomputes(Property::Sep, pf.triple, sep);
  const auto qsep = check_qsep(pf.triple, pf.plan);
  EXPECT_TRUE(qsep.certified());
  EXPECT_EQ(qsep.violations, 0u);
  ASSERT_NE(qsep.find("sei_set"), nullptr);
  EXPECT_TRUE(qsep.find("sei_set")->certified());
}

TEST(Classifiers, WitnessesRecompute) {
  for (const char* name : {"ex1", "ex2", "ex_qsei", "ex_psei"}) {
    SCOPED_TRACE(name);
    const auto pf = load_builtin(name);
    for (auto p : {Property::Sep, Property::Qsep, Property::StrictQsep, Property::Sei,
                   Property::Qsei, Property::Psei}) {
      if (uses_gradient(p) != (std::string(name).rfind("ex_", 0) == 0)) continue;
      auto plan = pf.plan;
      plan.grid_per_axis = 9;
      const auto r = check(p, pf.triple, plan);
      if (r.refuted()) expect_recomputes(p, pf.triple, r);
    }
  }
}

TEST(Classifiers, ThreadCountInvariant) {
  const auto pf = load_builtin("ex2");
  set_thread_count(1);
  const auto a = check_qsep(pf.triple, pf.plan);
  set_thread_count(3);
  const auto b = check_qsep(pf.triple, pf.plan);
  set_thread_count(0);
  EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
}

TEST(Classifiers, ConvexQuadraticIsSep) {
  const auto P = univariate("s^2 - s", -1, 2);
  EXPECT_TRUE(check_sep(P, small_plan()).certified());
  EXPECT_TRUE(check_sei(P, small_plan()).certified());
}

TEST(Classifiers, QuasiconvexNotConvex) {
  // Monotone with an upward jump: quasiconvex, not convex.
  const auto P = univariate("if s < 0 then -1 else s^3", -1, 1);
  EXPECT_TRUE(check_qsep(P, small_plan()).certified());
  const auto sep = check_sep(P, small_plan());
  EXPECT_TRUE(sep.refuted());
  expect_recomputes(Property::Sep, P, sep);
}

TEST(Classifiers, StrictQsep) {
  EXPECT_TRUE(check_strict_qsep(univariate("s^2", -1, 1), small_plan()).certified());
  // Flat stretch: h(E s) != h(E t) with the path point on the plateau at the larger value.
  const auto flat = univariate("max(s, 0)", -1, 1);
  EXPECT_TRUE(check_qsep(flat, small_plan()).certified());
  EXPECT_TRUE(check_strict_qsep(flat, small_plan()).certified());
  const auto step = univariate("if s < 0 then 0 else 1", -1, 1);
  EXPECT_TRUE(check_qsep(step, small_plan()).certified());
  EXPECT_TRUE(check_strict_qsep(step, small_plan()).refuted());
}

TEST(Classifiers, GradientVsFiniteDifference) {
  const auto h = ScalarFn::parse("s^3 + t^3", {"s", "t"});
  const Point x = pt({-0.7, -1.3});
  const Point g = fd_gradient(h, x);
  EXPECT_NEAR(g[0], 3 * 0.49, 1e-6);
  EXPECT_NEAR(g[1], 3 * 1.69, 1e-6);
  // One-sided stencil at a constraint face.
  const Box box = Box::uniform(2, -2, 0);
  const Point edge = fd_gradient(h, pt({0, -1}), &box);
  EXPECT_NEAR(edge[0], 0.0, 1e-5);
  EXPECT_NEAR(edge[1], 3.0, 1e-5);
}

TEST(Classifiers, PathLeavingSetThrows) {
  auto P = univariate("s", 0, 1);
  P.psi = PairMap::parse("s1 - s2 + 5", pair_variables({"s"}), 1);
  CheckOptions o;
  o.attach_prerequisite = false;
  EXPECT_THROW(check_qsep(P, small_plan(), o), std::runtime_error);
  P.closed_domain = false;
  EXPECT_NO_THROW(check_qsep(P, small_plan(), o));
}

TEST(Classifiers, RecoverVbar) {
  auto P = univariate("s", -1, 1);
  P.E = VectorMap::parse("-s/2", {"s"}, 1);
  const Point v = recover_vbar(P, pt({0.3}));
  EXPECT_NEAR(v[0], -0.6, 1e-12);
  EXPECT_THROW(recover_vbar(P, pt({3.0})), ConditionAError);
}

TEST(Classifiers, ConditionAForDifference) {
  // E = id, Psi = a - b. A1 residual at alpha = 0: Psi(b, v) = b - v = -lambda d with v = b + lambda d.
  auto P = univariate("s", -2, 2);
  const auto r = condition_a_residuals(P, pt({1}), pt({-1}), 0.0, 0.5);
  EXPECT_NEAR(r.a1, 0.0, 1e-12);
  EXPECT_NEAR(r.a2, 0.0, 1e-12);
  // Both identities hold for every s, t, lambda once alpha = 0.
  P.pin_alpha_zero = true;
  EXPECT_TRUE(check_condition_a(P, small_plan(7, 50)).certified());
}

TEST(Classifiers, CounterexampleRefinement) {
  const auto pf = load_builtin("ex1");
  std::size_t checked = 0;
  const auto plain = find_counterexample(Property::Sep, pf.triple, pf.plan, false,
                                         default_tolerance(), &checked);
  const auto refined = find_counterexample(Property::Sep, pf.triple, pf.plan, true);
  ASSERT_TRUE(plain && refined);
  EXPECT_GT(checked, 0u);
  EXPECT_GE(refined->margin, plain->margin);
  const auto o = evaluate_sample(Property::Sep, pf.triple, refined->s, refined->t,
                                 refined->alpha, refined->lambda);
  EXPECT_EQ(o.margin, refined->margin);
  EXPECT_FALSE(find_counterexample(Property::Qsep, pf.triple, pf.plan, false));
}

// Brute-force quasiconvexity on a fine grid: f(x) <= max(f(a), f(b)) for a < x < b.
TEST(Classifiers, QuasiconvexOracleAgreement) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 6; ++k) {
    const double c1 = u(rng), c2 = u(rng), c3 = u(rng);
    auto f = [&](double x) { return c3 * x * x * x + c2 * x * x + c1 * x; };
    const int N = 201;
    bool quasi = true;
    for (int i = 0; i < N && quasi; ++i)
      for (int j = i + 2; j < N && quasi; ++j) {
        const double a = -1 + 2.0 * i / (N - 1), b = -1 + 2.0 * j / (N - 1);
        const double m = std::max(f(a), f(b));
        for (int q = i + 1; q < j; ++q) {
          const double x = -1 + 2.0 * q / (N - 1);
          if (f(x) > m + 1e-9 * std::max(1.0, std::abs(m))) {
            quasi = false;
            break;
          }
        }
      }
    auto P = univariate(format_real(c3) + "*s^3 + " + format_real(c2) + "*s^2 + " +
                            format_real(c1) + "*s",
                        -1, 1);
    P.pin_alpha_zero = true;
    EXPECT_EQ(check_qsep(P, SamplingPlan{}).certified(), quasi) << k;
  }
}
