#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rootiter/expr.hpp"

using namespace rootiter;

namespace {

BigReal eval_at(const char* src, const char* x, const PrecisionContext& ctx) {
    return evaluate_expr(parse_expression(src), parse_decimal(x, ctx));
}

} // namespace

TEST_CASE("operator precedence and associativity") {
    PrecisionContext ctx(256);
    CHECK(eval_at("2^3^2", "1", ctx) == BigReal(512, ctx));     // right-assoc power
    CHECK(eval_at("-x^2", "3", ctx) == BigReal(-9, ctx));       // unary minus binds looser
    CHECK(eval_at("2+3*4", "0", ctx) == BigReal(14, ctx));
    CHECK(eval_at("2*x-6/3", "5", ctx) == BigReal(8, ctx));
    CHECK(eval_at("(2+3)*4", "0", ctx) == BigReal(20, ctx));
    CHECK(eval_at("10-4-3", "0", ctx) == BigReal(3, ctx));      // left-assoc minus
    CHECK(eval_at("2*-x", "7", ctx) == BigReal(-14, ctx));
}

TEST_CASE("elementary functions and errors") {
    PrecisionContext ctx(256);
    CHECK(eval_at("ln(exp(x))", "2", ctx) == BigReal(2, ctx));
    CHECK(eval_at("sin(x)^2+cos(x)^2", "0.7", ctx).to_double() ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(parse_expression("sin(y)"), ParseError);      // unknown identifier
    CHECK_THROWS_AS(parse_expression("2+*3"), ParseError);        // syntax
    CHECK_THROWS_AS(parse_expression("sin(x"), ParseError);       // unbalanced
    CHECK_THROWS_AS(eval_at("ln(x)", "-1", ctx), DomainError);
}

TEST_CASE("to_string round trip preserves value") {
    PrecisionContext ctx(256);
    for (const char* src : {"exp(x)*sin(x)+ln(1+x^2)", "-x^2+2^3^2", "(x+1)*exp(sin(x))-x^2*exp(cos(x))-1",
                            "1/(x^2-1)-1", "cos(x)^2-x/5"}) {
        ExprPtr e = parse_expression(src);
        ExprPtr back = parse_expression(to_string(e));
        BigReal x = parse_decimal("0.37", ctx);
        CHECK(evaluate_expr(e, x) == evaluate_expr(back, x));
    }
}

TEST_CASE("symbolic derivative agrees with central differences") {
    PrecisionContext ctx(4096);
    long digits = ctx.decimal_digits(); // ~1233
    BigReal h = parse_decimal("1e-300", ctx);
    for (const char* src : {"exp(x)*sin(x)+ln(1+x^2)", "x^15+x^4+4*x^2-15",
                            "exp(-x^2+x+2)-cos(x+1)+x^3+1", "exp(sin(x))-x+1",
                            "cos(x)^2-x/5", "1/(x^2-1)-1"}) {
        ExprPtr e = parse_expression(src);
        ExprPtr d = differentiate(e);
        BigReal x = parse_decimal("0.7", ctx);
        BigReal fd = (evaluate_expr(e, x + h) - evaluate_expr(e, x - h)) / (h + h);
        BigReal sym = evaluate_expr(d, x);
        BigReal err = abs(fd - sym);
        // central difference error ~ h^2 = 1e-600; roundoff ~ 1e-933
        CHECK((err.is_zero() || floor_log10(err) < -550));
        (void)digits;
    }
}

TEST_CASE("derivative closed forms") {
    PrecisionContext ctx(256);
    BigReal x = parse_decimal("1.5", ctx);
    // d/dx (2x+1) = 2
    CHECK(evaluate_expr(differentiate(parse_expression("2*x+1")), x) == BigReal(2, ctx));
    // d/dx x^4 = 4x^3
    CHECK(evaluate_expr(differentiate(parse_expression("x^4")), x) ==
          BigReal(4, ctx) * pow_int(x, 3));
    // d/dx exp(x) = exp(x)
    CHECK(evaluate_expr(differentiate(parse_expression("exp(x)")), x) == exp(x));
}
