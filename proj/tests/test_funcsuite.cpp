#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rootiter/funcsuite.hpp"

using namespace rootiter;

namespace {

struct RootCheck {
    const char* id;
    const char* printed; // published root prefix
    double tol;          // half-ulp scale of the printed digits
};

} // namespace

TEST_CASE("suite has twelve functions with the published roots") {
    PrecisionContext ctx(512);
    auto suite = builtin_suite(ctx);
    REQUIRE(suite.size() == 12);

    static const RootCheck checks[] = {
        {"f1", "0", 1e-100},         {"f2", "1.148538", 1e-6},
        {"f3", "2", 1e-100},         {"f4", "-1", 1e-100},
        {"f5", "0", 1e-100},         {"f6", "1.40449165", 1e-8},
        {"f7", "1.517427", 1e-6},    {"f8", "1.414214", 1e-6},
        {"f9", "4.15259074", 1e-8},  {"f10", "1.08598268", 1e-8},
        {"f11", "0.591448093", 1e-9}, {"f12", "2.63066415", 1e-8},
    };
    for (size_t i = 0; i < suite.size(); ++i) {
        CAPTURE(suite[i].id);
        CHECK(suite[i].id == checks[i].id);
        BigReal printed = parse_decimal(checks[i].printed, ctx);
        BigReal gap = abs(suite[i].reference_root - printed);
        CHECK((gap.is_zero() || gap.to_double() < checks[i].tol));
    }
    // f8's root is exactly sqrt(2)
    BigReal sqrt2 = nth_root(BigReal(2, ctx), 2);
    BigReal d = abs(suite[7].reference_root - sqrt2);
    CHECK((d.is_zero() || floor_log10(d) < -(ctx.decimal_digits() - 15)));
}

TEST_CASE("reference roots have negligible residual") {
    PrecisionContext ctx(512);
    long digits = ctx.decimal_digits();
    for (const TestFunction& f : builtin_suite(ctx)) {
        CAPTURE(f.id);
        BigReal r = evaluate_expr(f.body, f.reference_root);
        CHECK((r.is_zero() || floor_log10(abs(r)) < -(digits - 25)));
        BigReal dr = evaluate_expr(f.derivative, f.reference_root);
        CHECK(!dr.is_zero()); // simple roots only
    }
}

TEST_CASE("refine_root reconverges from a perturbed seed") {
    PrecisionContext ctx(512);
    auto suite = builtin_suite(ctx);
    const TestFunction& f = suite[1]; // f2
    BigReal seed = f.reference_root + parse_decimal("1e-3", ctx);
    BigReal again = refine_root(f, seed, ctx.decimal_digits() - 10);
    BigReal gap = abs(again - f.reference_root);
    CHECK((gap.is_zero() || floor_log10(gap) < -(ctx.decimal_digits() - 20)));
}

TEST_CASE("evaluation ticks the counter once per call") {
    PrecisionContext ctx(256);
    auto suite = builtin_suite(ctx);
    EvalCounter counter;
    BigReal x = suite[0].default_x0;
    evaluate(suite[0], x, counter);
    evaluate_derivative(suite[0], x, counter);
    evaluate(suite[0], x, counter);
    CHECK(counter.count == 3);
}
