#include <cmath>

#include <gtest/gtest.h>

#include "monoembed/exprmap.hpp"

using namespace monoembed;

TEST(ExprParse, WellFormed) {
  const auto e = Expression::parse("x1*exp(0.5 - x3) + 1", 3);
  EXPECT_EQ(e.arity(), 3u);
  EXPECT_NEAR(e(Point{1, 1, 1}), std::exp(-0.5) + 1.0, 1e-15);
  EXPECT_NEAR(e(Point{1, 1, 1}), 1.60653, 1e-5);
}

TEST(ExprParse, SyntaxErrorOffset) {
  try {
    Expression::parse("x1 ++ 2", 1);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(Expression::parse("", 1), ParseError);
  EXPECT_THROW(Expression::parse("(x1", 1), ParseError);
  EXPECT_THROW(Expression::parse("x1)", 1), ParseError);
  EXPECT_THROW(Expression::parse("foo(x1)", 1), ParseError);
  EXPECT_THROW(Expression::parse("x1 2", 1), ParseError);
}

TEST(ExprParse, VariableRange) {
  EXPECT_THROW(Expression::parse("x3", 2), ParseError);
  EXPECT_THROW(Expression::parse("x0", 2), ParseError);
  EXPECT_NO_THROW(Expression::parse("x2", 2));
}

TEST(ExprParse, RationalExampleTwo) {
  const auto e = Expression::parse("(1+3*x1+6*x2+x3)/(1+2*x1+4*x2+30*x3)", 3);
  const double t = 1.0 / 3.0;
  EXPECT_NEAR(e(Point{t, t, t}), t, 1e-15);
  EXPECT_NEAR(e(Point{1, 2, 3}), (1.0 + 3 + 12 + 3) / (1.0 + 2 + 8 + 90), 1e-15);
}

TEST(ExprEval, PrecedenceAndAssociativity) {
  auto v = [](const char* s) { return Expression::parse(s, 1)(Point{2.0}); };
  EXPECT_EQ(v("1 + 2 * 3"), 7);
  EXPECT_EQ(v("(1 + 2) * 3"), 9);
  EXPECT_EQ(v("2 ^ 3 ^ 2"), 512);
  EXPECT_EQ(v("-x1 ^ 2"), -4);
  EXPECT_EQ(v("8 / 2 / 2"), 2);
  EXPECT_EQ(v("10 - 3 - 2"), 5);
  EXPECT_EQ(v("x1 ^ -1"), 0.5);
  EXPECT_EQ(v("1.5e1 + x1"), 17);
  EXPECT_EQ(v("sqrt(x1 * 8)"), 4);
  EXPECT_NEAR(v("ln(exp(x1))"), 2, 1e-15);
}

TEST(ExprEval, Projection) {
  const auto e = Expression::parse("x2", 3);
  EXPECT_EQ(e(Point{1, 7.25, 3}), 7.25);
}

TEST(ExprEval, DomainErrors) {
  auto fails = [](const char* s, double x) {
    try {
      Expression::parse(s, 1)(Point{x});
    } catch (const ExprDomainError& e) {
      EXPECT_EQ(e.point(), Point{x});
      return true;
    }
    return false;
  };
  EXPECT_TRUE(fails("1 / x1", 0));
  EXPECT_TRUE(fails("ln(x1)", 0));
  EXPECT_TRUE(fails("sqrt(x1 - 1)", 0));
  EXPECT_TRUE(fails("(x1 - 1) ^ 0.5", 0));
  EXPECT_TRUE(fails("exp(x1)", 1000));
  EXPECT_FALSE(fails("(x1 - 1) ^ 2", 0));
}

TEST(ExprPrint, RoundTrip) {
  for (const char* s : {"x1*exp(0.5 - x3) + 1", "(1+3*x1+6*x2+x3)/(1+2*x1+4*x2+30*x3)",
                        "-x1^2^-x2", "sqrt(ln(1 + x1)) - 0.1"}) {
    const auto e = Expression::parse(s, 3);
    const auto again = Expression::parse(e.to_string(), 3);
    EXPECT_EQ(e, again) << s << " -> " << e.to_string();
  }
}

TEST(ExprMap, WrapsAsMapSpec) {
  const auto e = Expression::parse("x1*exp(0.5 - x2) + 1", 2);
  const MapSpec f = expression_map(e, MonotonicityPattern{1, -1});
  EXPECT_EQ(f(Point{1, 3}), std::exp(-2.5) + 1.0);
  EXPECT_THROW(expression_map(e, MonotonicityPattern{1}), InvalidArgument);
}

TEST(InferPattern, RationalExampleTwo) {
  const auto e = Expression::parse("(1+3*x1+6*x2+x3)/(1+2*x1+4*x2+30*x3)", 3);
  const auto inf = infer_pattern(e, {0, 10}, 1000, 1);
  ASSERT_TRUE(inf.pattern);
  EXPECT_EQ(*inf.pattern, MonotonicityPattern({1, 1, -1}));
  EXPECT_TRUE(inf.constant_arguments.empty());
}

TEST(InferPattern, MissingArgumentIsConstant) {
  const auto inf = infer_pattern(Expression::parse("x1", 2), {0, 1}, 200, 2);
  ASSERT_TRUE(inf.pattern);
  EXPECT_EQ(*inf.pattern, MonotonicityPattern({1, 1}));
  EXPECT_EQ(inf.constant_arguments, std::vector<std::size_t>{2});
}

TEST(InferPattern, NonMonotoneWitness) {
  const auto e = Expression::parse("x1*x1 - x1", 1);
  const auto inf = infer_pattern(e, {0, 2}, 1000, 3);
  EXPECT_FALSE(inf.pattern);
  ASSERT_TRUE(inf.witness);
  EXPECT_EQ(inf.witness->argument, 1u);
  EXPECT_THROW(infer_pattern(e, {0, 2}, 10, 3), InvalidArgument);
}
