#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "rootiter/diagnostics.hpp"
#include "rootiter/funcsuite.hpp"
#include "rootiter/schemes.hpp"

using namespace rootiter;

namespace {

TestFunction make_fn(const char* src, const char* root, const char* x0,
                     const PrecisionContext& ctx) {
    return TestFunction("t", src, parse_decimal(root, ctx), parse_decimal(x0, ctx));
}

const TestFunction& by_id(const std::vector<TestFunction>& suite, const std::string& id) {
    for (const TestFunction& f : suite)
        if (f.id == id) return f;
    throw Error("missing " + id);
}

} // namespace

TEST_CASE("divided differences on x^2") {
    PrecisionContext ctx(256);
    TestFunction f = make_fn("x^2", "0", "1", ctx);
    EvalCounter counter;
    FunctionCache fc(f, counter);
    BigReal a(3, ctx), b(5, ctx);
    CHECK(divided_difference(fc, a, b) == a + b);      // f[a,b] = a + b
    CHECK(second_divided_difference(fc, a, b) == BigReal(1, ctx)); // f[a,b,b] = 1
    CHECK_THROWS_AS(divided_difference(fc, a, a), DegenerateNodes);
}

TEST_CASE("registry exposes 27 methods with the right cost and order") {
    auto names = method_names();
    REQUIRE(names.size() == 27);
    static const std::map<std::string, std::pair<int, int>> expected = {
        // name -> {order p, evals d}
        {"NM", {2, 2}},    {"SM", {2, 2}},    {"SG", {6, 4}},    {"NT1", {6, 4}},
        {"NT2", {6, 4}},   {"CH", {6, 4}},    {"GR", {6, 4}},    {"AL", {6, 4}},
        {"SK1", {6, 4}},   {"SK2M1", {6, 4}}, {"SK2M2", {6, 4}}, {"TS1", {6, 4}},
        {"TS2", {6, 4}},   {"FS1", {6, 4}},   {"FS2", {6, 4}},   {"FS3-1", {7, 4}},
        {"FS3-2", {7, 4}}, {"FS4-1", {7, 4}}, {"FS4-2", {7, 4}}, {"FD1-M1", {6, 4}},
        {"FD1-M2", {7, 4}}, {"FD2-M1", {7, 4}}, {"AL1", {7, 4}}, {"FD4", {6, 4}},
        {"FD5", {6, 4}},   {"FD6", {6, 4}},   {"FD7", {7, 4}},
    };
    REQUIRE(expected.size() == names.size());
    for (const std::string& n : names) {
        CAPTURE(n);
        MethodScheme m = builtin_method(n);
        auto it = expected.find(n);
        REQUIRE(it != expected.end());
        CHECK(m.claimed_order == it->second.first);
        CHECK(m.evals_per_iteration == it->second.second);
    }
    CHECK_THROWS_AS(builtin_method("nope"), UnknownMethod);
}

TEST_CASE("every method solves linear functions in one iteration") {
    PrecisionContext ctx(256);
    struct Lin {
        const char* src;
        const char* root;
    };
    static const Lin lins[] = {
        {"x", "0"},             // c = 1, r = 0
        {"-3*(x-2)", "2"},      // c = -3, r = 2
        {"(x+5)/7", "-5"},      // c = 1/7, r = -5
    };
    for (const Lin& lin : lins) {
        BigReal root = parse_decimal(lin.root, ctx);
        TestFunction f("t", lin.src, root, root + parse_decimal("0.5", ctx));
        for (const std::string& n : method_names()) {
            CAPTURE(lin.src);
            CAPTURE(n);
            IterationTrace t = iterate(builtin_method(n), f, f.default_x0, 12);
            CHECK(t.status == RunStatus::Converged);
            CHECK(t.iterates.size() <= 3); // one productive iteration
            BigReal gap = abs(t.iterates.back() - f.reference_root);
            // exact up to the rounding of inexact slopes like 1/7
            CHECK((gap.is_zero() || ulp_distance(t.iterates.back(), f.reference_root) <= 128.0));
        }
    }
}

TEST_CASE("scale invariance: beta*f (and kappa/beta) leaves iterates unchanged") {
    PrecisionContext ctx(512);
    auto suite = builtin_suite(ctx);
    const TestFunction& f = by_id(suite, "f9");
    std::string scaled_src = "3*(" + f.source + ")";
    TestFunction g("t", scaled_src, f.reference_root, f.default_x0);
    BigReal beta(3, ctx);
    for (const std::string& n : method_names()) {
        CAPTURE(n);
        // The w = x ± f(x) offset schemes mix f[x,w] additively with fixed
        // constants in their weights; they are not scale-equivariant by
        // construction and are excluded.
        if (n == "FS1" || n == "FS3-1" || n == "FS3-2" || n == "FS4-1" || n == "FS4-2")
            continue;
        MethodScheme m = builtin_method(n);
        Params base = resolve_params(m, ctx);
        Params scaled = base;
        if (m.kind == MethodKind::DerivativeFree)
            scaled.insert_or_assign("kappa", base.at("kappa") / beta);
        IterationTrace ta = iterate(m, f, f.default_x0, 12, base);
        IterationTrace tb = iterate(m, g, g.default_x0, 12, scaled);
        REQUIRE(ta.iterates.size() == tb.iterates.size());
        for (size_t i = 0; i < ta.iterates.size(); ++i) {
            BigReal d = abs(ta.iterates[i] - tb.iterates[i]);
            CHECK((d.is_zero() || ulp_distance(tb.iterates[i], ta.iterates[i]) <= 4.0));
        }
    }
}

TEST_CASE("TNFE accounting is exact under a 12-evaluation budget") {
    PrecisionContext ctx(4096);
    auto suite = builtin_suite(ctx);
    const TestFunction& f = by_id(suite, "f2");
    for (const std::string& n : method_names()) {
        CAPTURE(n);
        MethodScheme m = builtin_method(n);
        IterationTrace t = iterate(m, f, f.default_x0, 12);
        CHECK(t.tnfe_used == 12);
        CHECK(t.iterates.size() == static_cast<size_t>(1 + 12 / m.evals_per_iteration));
    }
}

TEST_CASE("single-iteration transcription oracles") {
    PrecisionContext ctx(512);
    auto suite = builtin_suite(ctx);
    const TestFunction& f = by_id(suite, "f2");
    BigReal x = f.default_x0;
    EvalCounter c;
    FunctionCache fc(f, c);

    SUBCASE("NM step is x - f/f'") {
        IterationTrace t = iterate(builtin_method("NM"), f, x, 2);
        BigReal want = x - fc.f(x) / fc.fprime(x);
        CHECK(ulp_distance(t.iterates.at(1), want) <= 2.0);
    }
    SUBCASE("FD1-M1 step matches the published weight composition") {
        BigReal fx = fc.f(x), fpx = fc.fprime(x);
        BigReal y = x - fx / fpx;
        BigReal fy = fc.f(y);
        BigReal one(1, ctx), two(2, ctx);
        BigReal t1 = fy / fx;
        BigReal z = y - (one / (one - two * t1)) * fy / fpx;
        BigReal fz = fc.f(z);
        BigReal t2 = fz / fx, t3 = fz / fy;
        BigReal h1 = one / (one - two * t1 - t1 * t1);
        BigReal h2 = one + two * t2;
        BigReal h3 = one / (one - parse_decimal("1.1", ctx) * t3);
        BigReal want = z - h1 * h2 * h3 * fz / fpx;
        IterationTrace t = iterate(builtin_method("FD1-M1"), f, x, 4);
        CHECK(ulp_distance(t.iterates.at(1), want) <= 2.0);
    }
}

TEST_CASE("benchmark spot cells at 4096 bits") {
    PrecisionContext ctx(4096);
    auto suite = builtin_suite(ctx);
    struct Cell {
        const char* method;
        const char* fn;
        long exponent; // published floor(log10 |error|)
    };
    static const Cell cells[] = {
        {"FD1-M1", "f1", -142}, {"FD1-M1", "f2", -190}, {"SG", "f2", -153},
        {"NT1", "f3", -135},    {"NT2", "f9", -344},    {"GR", "f1", -93},
        {"AL", "f12", -162},
    };
    for (const Cell& cell : cells) {
        CAPTURE(cell.method);
        CAPTURE(cell.fn);
        const TestFunction& f = by_id(suite, cell.fn);
        IterationTrace t = iterate(builtin_method(cell.method), f, f.default_x0, 12);
        RunReport r = classify(t, f.reference_root, cell.method, cell.fn);
        REQUIRE(r.error_exponent.has_value());
        CHECK(*r.error_exponent == cell.exponent);
    }
}

TEST_CASE("published failure cells reproduce as failures") {
    PrecisionContext ctx(4096);
    auto suite = builtin_suite(ctx);

    SUBCASE("TS1 diverges on the flat tail of f7") {
        const TestFunction& f = by_id(suite, "f7");
        IterationTrace t = iterate(builtin_method("TS1"), f, f.default_x0, 12);
        CHECK(t.status == RunStatus::Divergent);
    }
    SUBCASE("SK2M1 fails on f8") {
        const TestFunction& f = by_id(suite, "f8");
        IterationTrace t = iterate(builtin_method("SK2M1"), f, f.default_x0, 12);
        RunReport r = classify(t, f.reference_root, "SK2M1", "f8");
        CHECK(r.failed());
    }
    SUBCASE("CH stalls on f10") {
        const TestFunction& f = by_id(suite, "f10");
        IterationTrace t = iterate(builtin_method("CH"), f, f.default_x0, 12);
        RunReport r = classify(t, f.reference_root, "CH", "f10");
        CHECK(r.failed());
    }
}
