#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "degen/expression.hpp"

using degen::Expression;

namespace {

double eval(const char* text, std::vector<double> vars = {}, std::vector<std::string> names = {}) {
    return Expression::compile(text, names)(vars);
}

} // namespace

TEST(Expression, Precedence) {
    EXPECT_DOUBLE_EQ(eval("1 + 2 * 3"), 7.0);
    EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3"), 9.0);
    EXPECT_DOUBLE_EQ(eval("2 ^ 3 ^ 2"), 512.0);
    EXPECT_DOUBLE_EQ(eval("-2 ^ 2"), -4.0);
    EXPECT_DOUBLE_EQ(eval("8 / 4 / 2"), 1.0);
    EXPECT_DOUBLE_EQ(eval("1e-3 * 2.5E2"), 0.25);
}

TEST(Expression, Functions) {
    EXPECT_DOUBLE_EQ(eval("sqrt(16) + cbrt(-27) + abs(-2)"), 3.0);
    EXPECT_DOUBLE_EQ(eval("max(1, min(5, 3))"), 3.0);
    EXPECT_DOUBLE_EQ(eval("pow(2, 10)"), 1024.0);
    EXPECT_NEAR(eval("sin(pi / 2)"), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(eval("sign(-3)"), -1.0);
}

TEST(Expression, Variables) {
    const auto e = Expression::compile("x1^2 + y - r", {"x1", "x2", "r"});
    const std::vector<double> v{3.0, 4.0, 5.0};
    EXPECT_DOUBLE_EQ(e(v), 9.0 + 4.0 - 5.0);
    EXPECT_EQ(e.arity(), 3u);
}

TEST(Expression, Errors) {
    EXPECT_THROW(Expression::compile("1 +", {}), degen::Error);
    EXPECT_THROW(Expression::compile("foo(1)", {}), degen::Error);
    EXPECT_THROW(Expression::compile("q + 1", {"x1"}), degen::Error);
    EXPECT_THROW(Expression::compile("(1 + 2", {}), degen::Error);
    EXPECT_THROW(Expression::compile("1 2", {}), degen::Error);
    EXPECT_THROW(Expression::compile("max(1)", {}), degen::Error);
}
