#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "qsep/expr.hpp"
#include "qsep/function.hpp"
#include "util.hpp"

using qsep::EvalError;
using qsep::Expr;
using qsep::ParseError;

namespace {

double ev(const std::string& src, std::vector<double> args,
          std::vector<std::string> vars = {"s", "t"}) {
  return Expr::parse(src, std::move(vars)).eval(args);
}

// A random expression as source text paired with a direct evaluator.
struct Gen {
  std::string src;
  std::function<double(double, double)> f;
};

Gen random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
  switch (pick(rng)) {
    case 0: return {"s", [](double s, double) { return s; }};
    case 1: return {"t", [](double, double t) { return t; }};
    case 2: {
      const double c = std::uniform_int_distribution<int>(-20, 20)(rng) / 4.0;
      return {qsep::format_real(c), [c](double, double) { return c; }};
    }
    case 3: {
      auto a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
      return {"(" + a.src + " + " + b.src + ")",
              [a, b](double s, double t) { return a.f(s, t) + b.f(s, t); }};
    }
    case 4: {
      auto a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
      return {"(" + a.src + " - " + b.src + ")",
              [a, b](double s, double t) { return a.f(s, t) - b.f(s, t); }};
    }
    case 5: {
      auto a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
      return {"(" + a.src + " * " + b.src + ")",
              [a, b](double s, double t) { return a.f(s, t) * b.f(s, t); }};
    }
    case 6: {
      auto a = random_expr(rng, depth - 1);
      return {"-(" + a.src + ")", [a](double s, double t) { return -a.f(s, t); }};
    }
    case 7: {
      auto a = random_expr(rng, depth - 1);
      const int k = std::uniform_int_distribution<int>(0, 3)(rng);
      return {"(" + a.src + ")^" + std::to_string(k),
              [a, k](double s, double t) {
                double r = 1.0;
                for (int j = 0; j < k; ++j) r *= a.f(s, t);
                return r;
              }};
    }
    case 8: {
      auto a = random_expr(rng, depth - 1);
      return {"abs(" + a.src + ")", [a](double s, double t) { return std::abs(a.f(s, t)); }};
    }
    case 9: {
      auto a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
      return {"max(" + a.src + ", " + b.src + ")",
              [a, b](double s, double t) { return std::max(a.f(s, t), b.f(s, t)); }};
    }
    case 10: {
      auto a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
      return {"min(" + a.src + ", " + b.src + ")",
              [a, b](double s, double t) { return std::min(a.f(s, t), b.f(s, t)); }};
    }
    default: {
      auto g = random_expr(rng, depth - 1), a = random_expr(rng, depth - 1),
           b = random_expr(rng, depth - 1);
      return {"(if " + g.src + " <= 0 then " + a.src + " else " + b.src + ")",
              [g, a, b](double s, double t) {
                return g.f(s, t) <= 0 ? a.f(s, t) : b.f(s, t);
              }};
    }
  }
}

}  // namespace

TEST(Expr, Arithmetic) {
  EXPECT_EQ(ev("1 + 2 * 3", {0, 0}), 7.0);
  EXPECT_EQ(ev("-s^2", {3, 0}), -9.0);
  EXPECT_EQ(ev("(2^3)^2", {0, 0}), 64.0);
  EXPECT_THROW(ev("2^3^2", {0, 0}), ParseError);
  EXPECT_EQ(ev("s / t", {1, 4}), 0.25);
  EXPECT_EQ(ev("abs(s) + max(s, t) - min(s, t)", {-2, 5}), 9.0);
}

TEST(Expr, Piecewise) {
  const auto h = Expr::parse("if s > 0 then 1 else -s", {"s"});
  EXPECT_EQ(h.eval(std::vector<double>{0.75}), 1.0);
  EXPECT_EQ(h.eval(std::vector<double>{0.0}), 0.0);
  EXPECT_EQ(h.eval(std::vector<double>{-2.0}), 2.0);
  EXPECT_EQ(ev("if s != t then -t else 0", {1, 1}), 0.0);
  EXPECT_EQ(ev("if s != t then -t else 0", {1, 3}), -3.0);
}

TEST(Expr, Vector) {
  const auto e = Expr::parse("[s - t, 3*s^2]", {"s", "t"});
  EXPECT_EQ(e.output_dim(), 2u);
  const auto v = e.eval_vector(std::vector<double>{2, 5});
  EXPECT_EQ(v[0], -3.0);
  EXPECT_EQ(v[1], 12.0);
  EXPECT_THROW(Expr::parse("[s, t]", {"s", "t"}, 1), ParseError);
}

TEST(Expr, Errors) {
  EXPECT_THROW(Expr::parse("s + u", {"s"}), ParseError);
  EXPECT_THROW(Expr::parse("s +", {"s"}), ParseError);
  EXPECT_THROW(Expr::parse("if s > 0 then 1", {"s"}), ParseError);
  EXPECT_THROW(Expr::parse("s^t", {"s", "t"}), ParseError);
  EXPECT_THROW(ev("1 / s", {0, 0}), EvalError);
  try {
    Expr::parse("s + $", {"s"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(Expr, DependsOn) {
  const auto e = Expr::parse("[0, t]", {"s", "t"});
  EXPECT_FALSE(e.depends_on(0, 0));
  EXPECT_FALSE(e.depends_on(1, 0));
  EXPECT_TRUE(e.depends_on(1, 1));
}

// 1000 random expressions: the parsed value matches the generator's own
// evaluator, and to_string() parses back to the same function.
TEST(Expr, RoundTripProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const Gen g = random_expr(rng, 4);
    SCOPED_TRACE(g.src);
    const Expr e = Expr::parse(g.src, {"s", "t"});
    const Expr back = Expr::parse(e.to_string(), {"s", "t"});
    EXPECT_EQ(back.to_string(), e.to_string());
    for (int k = 0; k < 5; ++k) {
      const std::vector<double> x{u(rng), u(rng)};
      const double want = g.f(x[0], x[1]);
      EXPECT_EQ(e.eval(x), want);
      EXPECT_EQ(back.eval(x), want);
    }
  }
}

TEST(Expr, FormatRealRoundTrips) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng) / 3.0;
    EXPECT_EQ(std::stod(qsep::format_real(x)), x);
  }
}

TEST(Function, Maps) {
  const auto h = qsep::ScalarFn::parse("s^3 + t^3", {"s", "t"});
  EXPECT_EQ(h(pt({-1.0, 2.0})), 7.0);
  const auto id = qsep::VectorMap::identity(2);
  EXPECT_TRUE(id.is_separable());
  const auto psi = qsep::PairMap::parse("[s1 - s2, t1 - t2]",
                                        qsep::pair_variables({"s", "t"}), 2);
  const auto d = psi(pt({1.0, 2.0}), pt({0.5, -1.0}));
  EXPECT_EQ(d[0], 0.5);
  EXPECT_EQ(d[1], 3.0);
}
