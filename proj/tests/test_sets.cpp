#include <gtest/gtest.h>

#include "qsep/sets.hpp"
#include "util.hpp"

using namespace qsep;

namespace {

SetSpec interval(double lo, double hi) { return SetSpec(Box::uniform(1, lo, hi)); }

}  // namespace

TEST(Sets, PathPoint) {
  const auto E = VectorMap::parse("-s^2", {"s"}, 1);
  const auto psi = PairMap::difference(1);
  // alpha t + E t + lambda (alpha s + E s - alpha t - E t)
  const Point p = strong_path_point(E, psi, pt({2}), pt({1}), 0.5, 0.25);
  const double at = 0.5 - 1, as = 1 - 4;
  EXPECT_DOUBLE_EQ(p[0], at + 0.25 * (as - at));
}

TEST(Sets, ConvexIntervalIsEInvex) {
  const auto r = check_e_invex(interval(-1, 2), VectorMap::identity(1), PairMap::difference(1),
                               small_plan());
  EXPECT_TRUE(r.certified());
  EXPECT_GT(r.samples_checked, 0u);
}

TEST(Sets, GapRefutes) {
  // [-2, -1] union [1, 2]: the midpoint of -1 and 1 falls in the gap.
  const auto g = ScalarFn::parse("1 - s^2", {"s"});
  const SetSpec S = interval(-2, 2).with_predicate(g);
  const auto r = check_e_invex(S, VectorMap::identity(1), PairMap::difference(1), small_plan());
  ASSERT_TRUE(r.refuted());
  ASSERT_TRUE(r.witness);
  const Point p = strong_path_point(VectorMap::identity(1), PairMap::difference(1), r.witness->s,
                                    r.witness->t, r.witness->alpha, r.witness->lambda);
  EXPECT_GT(1 - p[0] * p[0], 0.0);
  EXPECT_NEAR(recompute_set_witness(r.property, S, VectorMap::identity(1),
                                    PairMap::difference(1), *r.witness),
              r.witness->lhs, 1e-12);
}

TEST(Sets, StrongFormNeedsAlpha) {
  // alpha t + t leaves [0, 1] for t = 1, alpha > 0.
  const SetSpec S = interval(0, 1);
  const auto id = VectorMap::identity(1);
  const auto psi = PairMap::difference(1);
  EXPECT_TRUE(check_e_invex(S, id, psi, small_plan()).certified());
  EXPECT_TRUE(check_strongly_e_invex(S, id, psi, small_plan()).refuted());
  EXPECT_TRUE(check_strongly_e_invex(S, id, psi, small_plan(), AlphaMode::ZeroOnly).certified());
}

TEST(Sets, EImage) {
  const auto half = VectorMap::parse("s/2", {"s"}, 1);
  const auto dbl = VectorMap::parse("2*s", {"s"}, 1);
  EXPECT_TRUE(check_e_image_subset(interval(-1, 1), half, small_plan()).certified());
  EXPECT_TRUE(check_e_image_subset(interval(-1, 1), dbl, small_plan()).refuted());
}

TEST(Sets, SublevelAndIntersect) {
  const auto h = ScalarFn::parse("s^2", {"s"});
  const SetSpec K = sublevel_set(h, 1.0, interval(-3, 3));
  EXPECT_TRUE(is_member(K, pt({0.5})));
  EXPECT_FALSE(is_member(K, pt({1.5})));
  const SetSpec both = intersect(K, interval(0, 5));
  EXPECT_TRUE(is_member(both, pt({0.5})));
  EXPECT_FALSE(is_member(both, pt({-0.5})));
  EXPECT_TRUE(intersect(interval(0, 1), interval(2, 3)).is_empty());
}

TEST(Sets, WindowRole) {
  const SetSpec w(Box::uniform(1, 0, 1), {}, BoxRole::Window);
  EXPECT_TRUE(is_member(w, pt({5})));
  EXPECT_FALSE(is_member(interval(0, 1), pt({5})));
}

TEST(Sampling, AxisValues) {
  const auto v = axis_values(-1, 2, 4);
  EXPECT_EQ(v.front(), -1.0);
  EXPECT_EQ(v.back(), 2.0);
  EXPECT_NE(std::find(v.begin(), v.end(), 0.0), v.end());
}

TEST(Sampling, ReductionIndependentOfThreads) {
  auto eval = [](std::size_t i) {
    SampleOutcome o;
    o.margin = static_cast<double>((i * 7919) % 1000);
    o.violated = o.margin > 500;
    return o;
  };
  auto describe = [](std::size_t i) { return std::to_string(i); };
  set_thread_count(1);
  const auto a = reduce_samples(10000, 0, eval, describe);
  set_thread_count(4);
  const auto b = reduce_samples(10000, 0, eval, describe);
  set_thread_count(0);
  EXPECT_EQ(a.violations, b.violations);
  EXPECT_EQ(a.witness_index, b.witness_index);
  // Oracle: first index reaching the maximum margin.
  std::size_t best = 0;
  for (std::size_t i = 0; i < 10000; ++i)
    if (eval(i).margin > eval(best).margin) best = i;
  EXPECT_EQ(*a.witness_index, best);
}

TEST(Sampling, ProbeWins) {
  auto eval = [](std::size_t i) {
    SampleOutcome o;
    o.violated = true;
    o.margin = i == 1 ? 0.1 : 5.0;
    return o;
  };
  auto describe = [](std::size_t i) { return std::to_string(i); };
  // Index 0 is a non-violating probe in the second case.
  EXPECT_EQ(*reduce_samples(10, 2, eval, describe).witness_index, 0u);
  auto eval2 = [&](std::size_t i) {
    auto o = eval(i);
    if (i == 0) o.violated = false;
    return o;
  };
  EXPECT_EQ(*reduce_samples(10, 2, eval2, describe).witness_index, 1u);
}
