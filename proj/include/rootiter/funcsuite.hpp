#ifndef ROOTITER_FUNCSUITE_HPP
#define ROOTITER_FUNCSUITE_HPP

#include <string>
#include <vector>

#include "rootiter/bigreal.hpp"
#include "rootiter/errors.hpp"
#include "rootiter/expr.hpp"

namespace rootiter {

/// Counts f/f' evaluations toward the TNFE budget.  One counter per solver
/// run; never shared between runs.
struct EvalCounter {
    long count = 0;
    void tick() { ++count; }
};

/// A benchmark function: expression body, cached symbolic derivative, a
/// high-precision reference root and the standard starting point.
struct TestFunction {
    std::string id;
    std::string source;
    ExprPtr body;
    ExprPtr derivative;
    BigReal reference_root;
    BigReal default_x0;

    TestFunction(std::string id_, std::string source_, const BigReal& root, const BigReal& x0)
        : id(std::move(id_)),
          source(std::move(source_)),
          body(parse_expression(source)),
          derivative(differentiate(body)),
          reference_root(root),
          default_x0(x0) {}

    TestFunction(std::string id_, ExprPtr body_, const BigReal& root, const BigReal& x0)
        : id(std::move(id_)),
          source(to_string(body_)),
          body(std::move(body_)),
          derivative(differentiate(body)),
          reference_root(root),
          default_x0(x0) {}
};

inline BigReal evaluate(const TestFunction& f, const BigReal& x, EvalCounter& counter) {
    counter.tick();
    return evaluate_expr(f.body, x);
}

inline BigReal evaluate_derivative(const TestFunction& f, const BigReal& x, EvalCounter& counter) {
    counter.tick();
    return evaluate_expr(f.derivative, x);
}

/// Newton refinement of a simple root.  Starts at low precision and doubles
/// it as the iterate contracts, so the cost is dominated by the final steps.
inline BigReal refine_root(const ExprPtr& body, const ExprPtr& derivative, const BigReal& seed,
                           long target_digits) {
    long target_bits = static_cast<long>((target_digits + 10) * 3.33) + 64;
    long bits = std::max(128L, std::min(target_bits, 256L));
    BigReal x = seed;
    for (int rounds = 0; rounds < 200; ++rounds) {
        PrecisionContext ctx(bits);
        // re-round the iterate into the current working precision
        x = x + BigReal(ctx);
        BigReal fx = evaluate_expr(body, x);
        if (fx.is_zero()) {
            if (bits >= target_bits) break;
            bits = std::min(2 * bits, target_bits);
            continue;
        }
        BigReal dfx = evaluate_expr(derivative, x);
        if (dfx.is_zero()) throw MultipleRootSuspected("f' vanished during root refinement");
        BigReal step = fx / dfx;
        x = x - step;
        bool settled = step.is_zero() ||
                       floor_log10(abs(step)) < -(PrecisionContext(bits).decimal_digits() - 8);
        if (settled) {
            if (bits >= target_bits) break;
            bits = std::min(2 * bits, target_bits);
        }
        if (rounds == 199) throw NoConvergence("root refinement did not contract");
    }
    PrecisionContext ctx(target_bits);
    x = x + BigReal(ctx);
    BigReal fx = evaluate_expr(body, x);
    if (!fx.is_zero() && floor_log10(abs(fx)) > -target_digits + 10)
        throw NoConvergence("refined root residual too large");
    BigReal dfx = evaluate_expr(derivative, x);
    if (dfx.is_zero() || (!dfx.is_zero() && floor_log10(abs(dfx)) < -target_digits / 2))
        throw MultipleRootSuspected("|f'| too small at refined root");
    return x;
}

inline BigReal refine_root(const TestFunction& f, const BigReal& seed, long target_digits) {
    return refine_root(f.body, f.derivative, seed, target_digits);
}

/// The twelve-function benchmark suite.  Roots are refined at ctx precision
/// from the published seeds; starting points are the standard ones (f4 uses
/// -0.5 throughout, see the report notes).
inline std::vector<TestFunction> builtin_suite(const PrecisionContext& ctx) {
    struct Entry {
        const char* id;
        const char* source;
        const char* seed; // starting point, also the root-refinement seed
        const char* root_seed;
    };
    static const Entry entries[] = {
        {"f1", "exp(x)*sin(x)+ln(1+x^2)", "0.25", "0"},
        {"f2", "x^15+x^4+4*x^2-15", "1.1", "1.1485"},
        {"f3", "(x-2)*(x^10+x+1)*exp(-x-1)", "2.1", "2"},
        {"f4", "exp(-x^2+x+2)-cos(x+1)+x^3+1", "-0.5", "-1"},
        {"f5", "(x+1)*exp(sin(x))-x^2*exp(cos(x))-1", "0.25", "0"},
        {"f6", "sin(x)^2-x^2+1", "1.2", "1.4045"},
        {"f7", "10*exp(-x^2)-1", "1.0", "1.5174"},
        {"f8", "1/(x^2-1)-1", "1.6", "1.4142"},
        {"f9", "ln(x^2+x+2)-x+1", "4.4", "4.1526"},
        {"f10", "cos(x)^2-x/5", "1.5", "1.086"},
        {"f11", "x^10-2*x^3-x+1", "0.25", "0.5914"},
        {"f12", "exp(sin(x))-x+1", "2.0", "2.6307"},
    };
    long target_digits = ctx.decimal_digits() - 10;
    std::vector<TestFunction> suite;
    suite.reserve(12);
    for (const Entry& e : entries) {
        ExprPtr body = parse_expression(e.source);
        ExprPtr deriv = differentiate(body);
        BigReal seed = parse_decimal(e.root_seed, ctx);
        BigReal root = refine_root(body, deriv, seed, target_digits);
        suite.emplace_back(e.id, e.source, root, parse_decimal(e.seed, ctx));
    }
    return suite;
}

} // namespace rootiter

#endif
