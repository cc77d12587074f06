#ifndef ROOTITER_SCHEMES_HPP
#define ROOTITER_SCHEMES_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rootiter/bigreal.hpp"
#include "rootiter/errors.hpp"
#include "rootiter/funcsuite.hpp"

namespace rootiter {

// Control-flow signal: an evaluation point hit the root exactly.  The run
// terminates Converged at that point.
struct ExactRootFound {
    BigReal root;
};

// Control-flow signal: an evaluation point escaped the search region or a
// value went non-finite.  The run terminates Divergent.
struct DivergedSignal {};

enum class RunStatus { Converged, BudgetExhausted, Divergent, DegenerateStep, DomainError };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "converged";
        case RunStatus::BudgetExhausted: return "budget-exhausted";
        case RunStatus::Divergent: return "divergent";
        case RunStatus::DegenerateStep: return "degenerate-step";
        case RunStatus::DomainError: return "domain-error";
    }
    return "?";
}

struct IterationTrace {
    std::vector<BigReal> iterates;
    std::vector<BigReal> residuals; // f(x_n), same length as iterates
    long tnfe_used = 0;
    RunStatus status = RunStatus::BudgetExhausted;
};

/// Memoizing evaluation front end for one solver run.  Every distinct point
/// is evaluated (and counted) once; repeated requests inside an iteration
/// hit the cache, so TNFE accounting is exact.
class FunctionCache {
  public:
    FunctionCache(const TestFunction& f, EvalCounter& counter) : f_(f), counter_(counter) {}

    BigReal f(const BigReal& x) {
        auto it = fv_.find(x);
        if (it != fv_.end()) return it->second;
        guard(x);
        BigReal v = evaluate(f_, x, counter_);
        if (!v.is_finite()) throw DivergedSignal{};
        fv_.emplace(x, v);
        if (v.is_zero()) throw ExactRootFound{x};
        return v;
    }

    BigReal fprime(const BigReal& x) {
        auto it = dv_.find(x);
        if (it != dv_.end()) return it->second;
        guard(x);
        BigReal v = evaluate_derivative(f_, x, counter_);
        if (!v.is_finite()) throw DivergedSignal{};
        dv_.emplace(x, v);
        return v;
    }

    /// Residual lookup that never touches the TNFE counter.  Prefers the
    /// counted cache so recorded residuals are the values the method saw.
    BigReal residual(const BigReal& x) const {
        auto it = fv_.find(x);
        if (it != fv_.end()) return it->second;
        return evaluate_expr(f_.body, x);
    }

    const TestFunction& function() const { return f_; }
    long count() const { return counter_.count; }

    /// Evaluated point with the smallest |f|, if any.  Used to salvage the
    /// best sub-step when an iteration collapses at roundoff level.
    const BigReal* best_point() const {
        const BigReal* best = nullptr;
        const BigReal* bestv = nullptr;
        for (const auto& [p, v] : fv_) {
            if (!best || abs(v) < abs(*bestv)) {
                best = &p;
                bestv = &v;
            }
        }
        return best;
    }

  private:
    static void guard(const BigReal& x) {
        PrecisionContext ctx = x.context();
        if (!x.is_finite() || abs(x) > BigReal(100000000L, ctx)) throw DivergedSignal{};
    }

    struct Less {
        bool operator()(const BigReal& a, const BigReal& b) const { return a < b; }
    };
    const TestFunction& f_;
    EvalCounter& counter_;
    std::map<BigReal, BigReal, Less> fv_, dv_;
};

namespace detail {

inline BigReal safe_div(const BigReal& num, const BigReal& den) {
    if (den.is_zero()) throw SingularStep("zero denominator in iteration step");
    return num / den;
}

inline void check_nodes(const BigReal& a, const BigReal& b) {
    BigReal gap = abs(a - b);
    if (gap.is_zero()) throw DegenerateNodes("coincident divided-difference nodes");
    PrecisionContext ctx = a.context();
    BigReal scale = abs(a);
    if (scale < BigReal(1, ctx)) scale = BigReal(1, ctx);
    long digits = ctx.decimal_digits();
    if (floor_log10(gap / scale) < -digits + 4)
        throw DegenerateNodes("divided-difference nodes below resolvable spacing");
}

} // namespace detail

/// f[a, b] = (f(b) - f(a)) / (b - a), with cached f-values.
inline BigReal divided_difference(FunctionCache& fc, const BigReal& a, const BigReal& b) {
    detail::check_nodes(a, b);
    BigReal fa = fc.f(a);
    BigReal fb = fc.f(b);
    return (fb - fa) / (b - a);
}

inline BigReal divided_difference(const TestFunction& f, const BigReal& a, const BigReal& b,
                                  EvalCounter& counter) {
    FunctionCache fc(f, counter);
    return divided_difference(fc, a, b);
}

/// f[z, x, x] = (f[z, x] - f'(x)) / (z - x).
inline BigReal second_divided_difference(FunctionCache& fc, const BigReal& z, const BigReal& x) {
    detail::check_nodes(z, x);
    return (divided_difference(fc, z, x) - fc.fprime(x)) / (z - x);
}

inline BigReal second_divided_difference(const TestFunction& f, const BigReal& z, const BigReal& x,
                                         EvalCounter& counter) {
    FunctionCache fc(f, counter);
    return second_divided_difference(fc, z, x);
}

/// Weight function with its declared value/derivative conditions at the
/// origin.  Conditions are finite-difference checked once, at registration.
struct WeightFn {
    int arity = 1;
    std::function<BigReal(const std::vector<BigReal>&)> eval;
    // (derivative multi-index, required value as decimal text)
    std::vector<std::pair<std::vector<int>, std::string>> declared_conditions;
};

inline void validate_weight(const std::string& name, const WeightFn& w,
                            const PrecisionContext& ctx) {
    std::vector<BigReal> zeros(static_cast<size_t>(w.arity), BigReal(ctx));
    long digits = ctx.decimal_digits();
    for (const auto& [idx, text] : w.declared_conditions) {
        BigReal want = parse_decimal(text, ctx);
        int order = 0;
        int var = -1;
        for (size_t i = 0; i < idx.size(); ++i) {
            order += idx[i];
            if (idx[i] > 0) var = static_cast<int>(i);
        }
        BigReal got(ctx);
        BigReal tol(ctx);
        if (order == 0) {
            got = w.eval(zeros);
            tol = pow(BigReal(10, ctx), BigReal(-digits + 8, ctx));
        } else if (order == 1) {
            // central difference: truncation O(h^2), roundoff O(eps/h)
            BigReal h = pow(BigReal(10, ctx), BigReal(-digits / 3, ctx));
            auto up = zeros, dn = zeros;
            up[var] += h;
            dn[var] -= h;
            got = (w.eval(up) - w.eval(dn)) / (BigReal(2, ctx) * h);
            tol = pow(BigReal(10, ctx), BigReal(-digits / 2, ctx));
        } else if (order == 2 && idx[var] == 2) {
            // second difference loses 2h digits to cancellation: wider h, tol
            BigReal h = pow(BigReal(10, ctx), BigReal(-digits / 4, ctx));
            auto up = zeros, dn = zeros;
            up[var] += h;
            dn[var] -= h;
            got = (w.eval(up) - BigReal(2, ctx) * w.eval(zeros) + w.eval(dn)) / (h * h);
            tol = pow(BigReal(10, ctx), BigReal(-digits / 3, ctx));
        } else {
            throw Error("unsupported declared condition on weight " + name);
        }
        BigReal err = abs(got - want);
        BigReal scale = abs(want) < BigReal(1, ctx) ? BigReal(1, ctx) : abs(want);
        if (err > tol * scale)
            throw Error("weight " + name + " violates a declared condition");
    }
}

using Params = std::map<std::string, BigReal>;

namespace detail {

inline const BigReal& param(const Params& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw Error("missing parameter " + key);
    return it->second;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Family steppers.  Each performs one full multi-step iteration.
// ---------------------------------------------------------------------------

/// Derivative-based three-step family: Newton step, weighted second step
/// G(t1), weighted third step H(t1, t2, t3), all over a single f'(x_n).
inline BigReal step_fd1(const BigReal& x, FunctionCache& fc, const WeightFn& G,
                        const WeightFn& H) {
    using detail::safe_div;
    BigReal fx = fc.f(x);
    BigReal dfx = fc.fprime(x);
    BigReal y = x - safe_div(fx, dfx);
    BigReal fy = fc.f(y);
    BigReal t1 = fy / fx;
    BigReal z = y - G.eval({t1}) * safe_div(fy, dfx);
    BigReal fz = fc.f(z);
    BigReal t2 = fz / fx;
    BigReal t3 = fz / fy;
    return z - H.eval({t1, t2, t3}) * safe_div(fz, dfx);
}

/// Derivative-based family with a divided-difference third step; covers the
/// one-parameter weight A(t1) schemes.
inline BigReal step_fd2(const BigReal& x, FunctionCache& fc, const WeightFn& A) {
    using detail::safe_div;
    BigReal fx = fc.f(x);
    BigReal dfx = fc.fprime(x);
    BigReal y = x - safe_div(fx, dfx);
    BigReal fy = fc.f(y);
    BigReal t1 = fy / fx;
    BigReal z = y - A.eval({t1}) * safe_div(fy, dfx);
    BigReal fz = fc.f(z);
    BigReal dzy = divided_difference(fc, z, y);
    BigReal dzxx = second_divided_difference(fc, z, x);
    return z - safe_div(fz, dzy + dzxx * (z - y));
}

namespace detail {

// Shared derivative-free front end: offset point, secant Newton step, then
// the g-weighted combination of derivative surrogates applied to f(y).
struct FreeState {
    BigReal x, w, y, fx, fw, fy, dxw, t1, t2;
};

inline FreeState free_front(const BigReal& x, FunctionCache& fc, const BigReal& kappa) {
    FreeState s{x, x, x, x, x, x, x, x, x};
    s.fx = fc.f(x);
    s.w = x - kappa * s.fx;
    s.dxw = divided_difference(fc, x, s.w);
    s.fw = fc.f(s.w);
    s.y = x - safe_div(s.fx, s.dxw);
    s.fy = fc.f(s.y);
    s.t1 = s.fy / s.fx;
    s.t2 = s.fy / s.fw;
    return s;
}

inline BigReal free_second_step(FunctionCache& fc, const FreeState& s, const BigReal& g1,
                                const BigReal& g2, const WeightFn* G0, const WeightFn* G1,
                                const WeightFn* G2) {
    PrecisionContext ctx = s.x.context();
    BigReal g0 = BigReal(1, ctx) - g1 - g2;
    BigReal corr(ctx);
    if (!g0.is_zero())
        corr += g0 * G0->eval({s.t1}) / divided_difference(fc, s.y, s.w);
    if (!g1.is_zero())
        corr += g1 * G1->eval({s.t2}) / divided_difference(fc, s.x, s.y);
    if (!g2.is_zero()) corr += g2 * G2->eval({s.t1, s.t2}) / s.dxw;
    return s.y - corr * s.fy;
}

} // namespace detail

/// Derivative-free two-step (optimal fourth-order) family.
inline BigReal step_fd3(const BigReal& x, FunctionCache& fc, const BigReal& kappa,
                        const BigReal& g1, const BigReal& g2, const WeightFn* G0,
                        const WeightFn* G1, const WeightFn* G2) {
    detail::FreeState s = detail::free_front(x, fc, kappa);
    return detail::free_second_step(fc, s, g1, g2, G0, G1, G2);
}

/// Derivative-free three-step family: fourth step combines six weighted
/// derivative surrogates S0..S5 applied to f(z).
inline BigReal step_fd4(const BigReal& x, FunctionCache& fc, const BigReal& kappa,
                        const BigReal& g1, const BigReal& g2, const WeightFn* G0,
                        const WeightFn* G1, const WeightFn* G2,
                        const std::vector<BigReal>& h, // h1..h5
                        const std::vector<const WeightFn*>& S) { // S0..S5
    detail::FreeState s = detail::free_front(x, fc, kappa);
    BigReal z = detail::free_second_step(fc, s, g1, g2, G0, G1, G2);
    BigReal fz = fc.f(z);
    BigReal t3 = fz / s.fx;
    BigReal t4 = fz / s.fw;
    BigReal t5 = fz / s.fy;
    PrecisionContext ctx = x.context();
    BigReal h0 = BigReal(1, ctx) - h[0] - h[1] - h[2] - h[3] - h[4];
    BigReal corr(ctx);
    if (!h0.is_zero()) corr += h0 * S[0]->eval({t3, t4, t5}) / divided_difference(fc, s.y, z);
    if (!h[0].is_zero())
        corr += h[0] * S[1]->eval({s.t1, t3, t4, t5}) / divided_difference(fc, z, s.w);
    if (!h[1].is_zero())
        corr += h[1] * S[2]->eval({s.t2, t3, t4, t5}) / divided_difference(fc, z, s.x);
    if (!h[2].is_zero())
        corr += h[2] * S[3]->eval({s.t2, t3, t4, t5}) / divided_difference(fc, s.x, s.y);
    if (!h[3].is_zero())
        corr += h[3] * S[4]->eval({s.t1, t3, t4, t5}) / divided_difference(fc, s.y, s.w);
    if (!h[4].is_zero())
        corr += h[4] * S[5]->eval({s.t1, s.t2, t3, t4, t5}) / s.dxw;
    return z - corr * fz;
}

/// Derivative-free three-step family whose fourth step divides by an
/// h-blended combination of five divided differences.
inline BigReal step_fd5(const BigReal& x, FunctionCache& fc, const BigReal& kappa,
                        const BigReal& g1, const BigReal& g2, const WeightFn* G0,
                        const WeightFn* G1, const WeightFn* G2, const BigReal& hblend,
                        const WeightFn& H) {
    detail::FreeState s = detail::free_front(x, fc, kappa);
    BigReal z = detail::free_second_step(fc, s, g1, g2, G0, G1, G2);
    BigReal fz = fc.f(z);
    BigReal t3 = fz / s.fx;
    BigReal t4 = fz / s.fw;
    BigReal t5 = fz / s.fy;
    PrecisionContext ctx = x.context();
    BigReal one(1, ctx);
    BigReal den = divided_difference(fc, z, s.y);
    if (hblend != one) den -= (hblend - one) * divided_difference(fc, z, s.w);
    if (!hblend.is_zero()) {
        den += hblend * divided_difference(fc, z, s.x);
        den -= hblend * divided_difference(fc, s.y, s.x);
    }
    if (hblend != one) den += (hblend - one) * divided_difference(fc, s.y, s.w);
    return z - H.eval({t3, t4, t5}) * detail::safe_div(fz, den);
}

/// Derivative-free counterpart of the divided-difference third step of the
/// A(t1) family.
inline BigReal step_fd6(const BigReal& x, FunctionCache& fc, const BigReal& kappa,
                        const BigReal& g1, const BigReal& g2, const WeightFn* G0,
                        const WeightFn* G1, const WeightFn* G2, const WeightFn& H) {
    detail::FreeState s = detail::free_front(x, fc, kappa);
    BigReal z = detail::free_second_step(fc, s, g1, g2, G0, G1, G2);
    BigReal fz = fc.f(z);
    BigReal t3 = fz / s.fx;
    BigReal t4 = fz / s.fw;
    BigReal t5 = fz / s.fy;
    BigReal den = divided_difference(fc, z, s.y) +
                  (divided_difference(fc, z, s.x) - divided_difference(fc, s.w, s.x)) *
                      detail::safe_div(z - s.y, z - s.x);
    return z - H.eval({t3, t4, t5}) * detail::safe_div(fz, den);
}

// ---------------------------------------------------------------------------
// Method registry
// ---------------------------------------------------------------------------

enum class MethodKind { DerivativeBased, DerivativeFree };

/// Declarative description of one registered iteration scheme.
struct MethodScheme {
    std::string name;
    MethodKind kind = MethodKind::DerivativeBased;
    int evals_per_iteration = 0; // d
    int claimed_order = 0;       // p
    std::vector<std::pair<std::string, std::string>> param_defaults;
    std::map<std::string, WeightFn> weights;
    std::function<BigReal(const BigReal&, FunctionCache&, const Params&)> stepper;
};

namespace detail {

inline BigReal w_one(const std::vector<BigReal>& t) {
    return BigReal(1, t[0].context());
}

// 1 / (1 - c*t[i]) with rational c = cn/cd
inline WeightFn w_inv_linear(int arity, int i, long cn, long cd,
                             std::vector<std::pair<std::vector<int>, std::string>> decl) {
    WeightFn w;
    w.arity = arity;
    w.eval = [i, cn, cd](const std::vector<BigReal>& t) {
        PrecisionContext ctx = t[0].context();
        return safe_div(BigReal(1, ctx), BigReal(1, ctx) - BigReal::ratio(cn, cd, ctx) * t[i]);
    };
    w.declared_conditions = std::move(decl);
    return w;
}

} // namespace detail

inline std::vector<std::string> method_names() {
    return {"NM",    "SM",    "SG",    "NT1",   "NT2",   "CH",     "GR",     "AL",    "SK1",
            "SK2M1", "SK2M2", "TS1",   "TS2",   "FS1",   "FS2",    "FS3-1",  "FS3-2", "FS4-1",
            "FS4-2", "FD1-M1", "FD1-M2", "FD2-M1", "AL1", "FD4",   "FD5",    "FD6",   "FD7"};
}

inline MethodScheme builtin_method(const std::string& name) {
    using detail::param;
    using detail::safe_div;
    MethodScheme m;
    m.name = name;
    m.kind = MethodKind::DerivativeBased;

    auto dd = [](FunctionCache& fc, const BigReal& a, const BigReal& b) {
        return divided_difference(fc, a, b);
    };

    if (name == "NM") {
        m.evals_per_iteration = 2;
        m.claimed_order = 2;
        m.stepper = [](const BigReal& x, FunctionCache& fc, const Params&) {
            return x - safe_div(fc.f(x), fc.fprime(x));
        };
    } else if (name == "SM") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 2;
        m.claimed_order = 2;
        m.param_defaults = {{"kappa", "0.01"}};
        m.stepper = [dd](const BigReal& x, FunctionCache& fc, const Params& p) {
            BigReal fx = fc.f(x);
            BigReal w = x - param(p, "kappa") * fx;
            return x - safe_div(fx, dd(fc, x, w));
        };
    } else if (name == "SG") {
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"a", "-1"}};
        m.stepper = [](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            const BigReal& a = param(p, "a");
            BigReal two(2, ctx);
            BigReal fx = fc.f(x), dfx = fc.fprime(x);
            BigReal y = x - safe_div(fx, dfx);
            BigReal fy = fc.f(y);
            BigReal z = y - safe_div(fx, fx - two * fy) * safe_div(fy, dfx);
            BigReal fz = fc.f(z);
            return z - safe_div(fx + a * fy, fx + (a - two) * fy) * safe_div(fz, dfx);
        };
    } else if (name == "NT1") {
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"a", "-1"}};
        m.stepper = [](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            const BigReal& a = param(p, "a");
            BigReal two(2, ctx), three(3, ctx);
            BigReal fx = fc.f(x), dfx = fc.fprime(x);
            BigReal y = x - safe_div(fx, dfx);
            BigReal fy = fc.f(y);
            BigReal z = y - safe_div(fx + a * fy, fx + (a - two) * fy) * safe_div(fy, dfx);
            BigReal fz = fc.f(z);
            return z - safe_div(fx - fy, fx - three * fy) * safe_div(fz, dfx);
        };
    } else if (name == "NT2") {
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.stepper = [](const BigReal& x, FunctionCache& fc, const Params&) {
            PrecisionContext ctx = x.context();
            BigReal one(1, ctx);
            BigReal fx = fc.f(x), dfx = fc.fprime(x);
            BigReal y = x - safe_div(fx, dfx);
            BigReal fy = fc.f(y);
            BigReal u = one - fy / fx;
            BigReal z = y - safe_div(fy, dfx) * safe_div(one, u * u);
            BigReal fz = fc.f(z);
            BigReal v = one - fy / fx - fz / fx;
            return z - safe_div(fz, dfx) * safe_div(one, v * v);
        };
    } else if (name == "CH") {
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        WeightFn H;
        H.arity = 1;
        H.eval = [](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            return BigReal(1, ctx) + BigReal(2, ctx) * t[0];
        };
        H.declared_conditions = {{{0}, "1"}, {{1}, "2"}};
        m.weights["H"] = H;
        m.stepper = [H](const BigReal& x, FunctionCache& fc, const Params&) {
            PrecisionContext ctx = x.context();
            BigReal two(2, ctx);
            BigReal fx = fc.f(x), dfx = fc.fprime(x);
            BigReal y = x - safe_div(fx, dfx);
            BigReal fy = fc.f(y);
            BigReal z = y - safe_div(fx, fx - two * fy) * safe_div(fy, dfx);
            BigReal fz = fc.f(z);
            return z - H.eval({fy / fx}) * safe_div(fz, dfx);
        };
    } else if (name == "GR") {
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.stepper = [](const BigReal& x, FunctionCache& fc, const Params&) {
            PrecisionContext ctx = x.context();
            BigReal two(2, ctx);
            BigReal fx = fc.f(x), dfx = fc.fprime(x);
            BigReal y = x - safe_div(fx, dfx);
            BigReal fy = fc.f(y);
            BigReal ratio = safe_div(fx, fx - two * fy);
            BigReal z = y - ratio * safe_div(fy, dfx);
            BigReal fz = fc.f(z);
            return z - ratio * safe_div(fz, dfx);
        };
    } else if (name == "AL" || name == "AL1" || name == "FD2-M1") {
        m.evals_per_iteration = 4;
        m.claimed_order = name == "AL" ? 6 : 7;
        WeightFn A;
        A.arity = 1;
        if (name == "AL") {
            m.param_defaults = {{"theta", "-1.01"}};
            // left generic in theta; the stepper builds A from the live value
        } else if (name == "AL1") {
            A.eval = [](const std::vector<BigReal>& t) {
                PrecisionContext ctx = t[0].context();
                BigReal one(1, ctx);
                return safe_div(one + t[0], one - t[0]);
            };
            A.declared_conditions = {{{0}, "1"}, {{1}, "2"}};
            m.weights["A"] = A;
        } else {
            A.eval = [](const std::vector<BigReal>& t) {
                PrecisionContext ctx = t[0].context();
                BigReal one(1, ctx);
                BigReal u = one - t[0];
                return safe_div(one, u * u);
            };
            A.declared_conditions = {{{0}, "1"}, {{1}, "2"}};
            m.weights["A"] = A;
        }
        bool generic_theta = name == "AL";
        m.stepper = [A, generic_theta](const BigReal& x, FunctionCache& fc, const Params& p) {
            WeightFn W = A;
            if (generic_theta) {
                BigReal theta = param(p, "theta");
                W.arity = 1;
                W.eval = [theta](const std::vector<BigReal>& t) {
                    PrecisionContext ctx = t[0].context();
                    BigReal one(1, ctx);
                    return safe_div(one - theta * t[0], one - t[0]);
                };
            }
            return step_fd2(x, fc, W);
        };
    } else if (name == "SK1") {
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"a1", "2"}, {"b1", "2"}, {"mu1", "1"}, {"mu2", "0"}};
        m.stepper = [](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal one(1, ctx);
            BigReal fx = fc.f(x), dfx = fc.fprime(x);
            BigReal y = x - safe_div(fx, dfx);
            BigReal fy = fc.f(y);
            BigReal z = y - safe_div(fy, dfx) * (one + param(p, "a1") * (fy / fx));
            BigReal fz = fc.f(z);
            BigReal s = (param(p, "mu1") * fy + param(p, "mu2") * fz) / fx;
            return z - safe_div(fz, dfx) * (one + param(p, "b1") * s);
        };
    } else if (name == "SK2M1" || name == "SK2M2") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        if (name == "SK2M1")
            m.param_defaults = {{"kappa", "0.01"}, {"alpha", "2.5"}, {"beta", "2.5"}, {"eta", "1"}};
        else
            m.param_defaults = {{"kappa", "0.01"}, {"alpha", "1"}, {"beta", "1"}, {"eta", "1"}};
        m.stepper = [dd](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal one(1, ctx);
            BigReal fx = fc.f(x);
            BigReal w = x - param(p, "kappa") * fx;
            BigReal dxw = dd(fc, x, w);
            BigReal fw = fc.f(w);
            BigReal y = x - safe_div(fx, dxw);
            BigReal fy = fc.f(y);
            BigReal t1 = fy / fx;
            BigReal t2 = fy / fw;
            BigReal bracket =
                one + t1 + param(p, "alpha") * t1 * t1 + t2 + param(p, "beta") * t2 * t2;
            BigReal z = y - safe_div(fy, dxw) * bracket;
            BigReal fz = fc.f(z);
            return z - safe_div(fz, dxw) * (bracket + param(p, "eta") * safe_div(fz, fy));
        };
    } else if (name == "TS1" || name == "TS2") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"kappa", "-1"}, {"lambda", "1"}};
        bool secant_tail = name == "TS2";
        m.stepper = [dd, secant_tail](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal one(1, ctx);
            BigReal fx = fc.f(x);
            BigReal w = x - param(p, "kappa") * fx; // kappa = -1: w = x + f(x)
            BigReal dxw = dd(fc, x, w);
            BigReal fw = fc.f(w);
            BigReal y = x - safe_div(fx, dxw);
            BigReal fy = fc.f(y);
            // (1 - fy/(lambda fw))^(-lambda), lambda a nonzero integer
            long lambda = std::lround(param(p, "lambda").to_double());
            if (lambda == 0) throw Error("TS methods need a nonzero integer lambda");
            BigReal base = one - safe_div(fy, BigReal(lambda, ctx) * fw);
            if (base.is_zero()) throw SingularStep("TS weight base vanished");
            BigReal W = pow_int(base, -lambda);
            BigReal dxy = dd(fc, x, y);
            BigReal z = y - W * safe_div(fy, dxy);
            BigReal fz = fc.f(z);
            if (secant_tail) return z - safe_div(fz, dd(fc, y, z));
            return z - W * safe_div(fz, dxy);
        };
    } else if (name == "FS1") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"kappa", "-1"}};
        m.stepper = [dd](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal one(1, ctx), two(2, ctx);
            BigReal fx = fc.f(x);
            BigReal w = x - param(p, "kappa") * fx;
            BigReal dxw = dd(fc, x, w);
            BigReal fw = fc.f(w);
            BigReal y = x - safe_div(fx, dxw);
            BigReal fy = fc.f(y);
            BigReal t1 = fy / fx;
            BigReal z = x - safe_div(fx, dxw) * (one + t1 * (one + two * t1));
            BigReal fz = fc.f(z);
            BigReal dyz = dd(fc, y, z);
            return z - safe_div(fz, dyz) * (one - safe_div(one + dxw, dxw) * safe_div(fz, fw));
        };
    } else if (name == "FS2") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"kappa", "0.01"}}; // the offset parameter beta
        m.stepper = [dd](const BigReal& x, FunctionCache& fc, const Params& p) {
            BigReal fx = fc.f(x);
            BigReal w = x - param(p, "kappa") * fx;
            BigReal dxw = dd(fc, x, w);
            BigReal y = x - safe_div(fx, dxw);
            BigReal fy = fc.f(y);
            BigReal z = y - safe_div(fy, dd(fc, w, y));
            BigReal fz = fc.f(z);
            BigReal den = dd(fc, w, z) + dd(fc, z, y) - dd(fc, w, y);
            return z - safe_div(fz, den);
        };
    } else if (name == "FS3-1" || name == "FS3-2" || name == "FS4-1" || name == "FS4-2") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 7;
        bool plus_offset = name == "FS3-1" || name == "FS4-1"; // w = x + f(x)
        bool fs3 = name == "FS3-1" || name == "FS3-2";
        bool has_free = name != "FS4-2";
        m.param_defaults = {{"kappa", plus_offset ? "-1" : "1"}};
        if (has_free) {
            m.param_defaults.emplace_back("p1", "0"); // gamma / rho / omega
            m.param_defaults.emplace_back("p2", "0"); // delta / tau / phi
        }
        m.stepper = [dd, plus_offset, fs3, has_free](const BigReal& x, FunctionCache& fc,
                                                     const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal one(1, ctx), two(2, ctx), three(3, ctx);
            BigReal fx = fc.f(x);
            BigReal w = x - param(p, "kappa") * fx;
            BigReal dxw = dd(fc, x, w);
            BigReal fw = fc.f(w);
            BigReal y = x - safe_div(fx, dxw);
            BigReal fy = fc.f(y);
            BigReal z = y - safe_div(fy, dd(fc, x, y) + dd(fc, y, w) - dxw);
            BigReal fz = fc.f(z);
            BigReal bracket(ctx);
            if (fs3) {
                BigReal q = plus_offset ? safe_div(two + dxw, (one + dxw) * (one + dxw))
                                        : safe_div(two - dxw, (one - dxw) * (one - dxw));
                bracket = one + fy / fw + safe_div(fz, fy) + q * (fy / fx) * (fy / fx);
            } else {
                BigReal q = plus_offset ? two + dxw * (three + dxw) : two + dxw * (dxw - three);
                bracket = one + safe_div(fz, fy) + fy / fx + q * (fy / fw) * (fy / fw);
            }
            if (has_free)
                bracket += param(p, "p1") * (fz / fx) + param(p, "p2") * safe_div(fz, fw);
            BigReal den = fs3 ? dd(fc, x, z) : dd(fc, w, z);
            return z - safe_div(fz, den) * bracket;
        };
    } else if (name == "FD1-M1" || name == "FD1-M2") {
        m.evals_per_iteration = 4;
        m.claimed_order = name == "FD1-M1" ? 6 : 7;
        bool seventh = name == "FD1-M2";
        WeightFn G = detail::w_inv_linear(1, 0, 2, 1, {{{0}, "1"}, {{1}, "2"}, {{2}, "8"}});
        WeightFn H;
        H.arity = 3;
        H.eval = [seventh](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            BigReal one(1, ctx), two(2, ctx);
            BigReal h1 = safe_div(one, one - two * t[0] - t[0] * t[0]);
            BigReal h2 = one + (seventh ? BigReal::ratio(21, 10, ctx) : two) * t[1];
            BigReal h3 = safe_div(
                one, one - (seventh ? one : BigReal::ratio(11, 10, ctx)) * t[2]);
            return h1 * h2 * h3;
        };
        H.declared_conditions = {{{0, 0, 0}, "1"}, {{1, 0, 0}, "2"}, {{2, 0, 0}, "10"}};
        if (seventh) {
            H.declared_conditions.push_back({{0, 0, 1}, "1"});
            H.declared_conditions.push_back({{0, 1, 0}, "2.1"});
        } else {
            H.declared_conditions.push_back({{0, 0, 1}, "1.1"});
            H.declared_conditions.push_back({{0, 1, 0}, "2"});
        }
        m.weights["G"] = G;
        m.weights["H"] = H;
        m.stepper = [G, H](const BigReal& x, FunctionCache& fc, const Params&) {
            return step_fd1(x, fc, G, H);
        };
    } else if (name == "FD4") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"kappa", "0.01"}};
        WeightFn G2;
        G2.arity = 2;
        G2.eval = [](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            BigReal one(1, ctx), two(2, ctx);
            return safe_div(one + t[0] - t[1], one - two * t[1]);
        };
        G2.declared_conditions = {{{0, 0}, "1"}, {{1, 0}, "1"}, {{0, 1}, "1"}};
        WeightFn S0;
        S0.arity = 3;
        S0.eval = [](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            BigReal one(1, ctx), two(2, ctx);
            return safe_div(one, one - t[2] - two * t[0] - two * t[1]);
        };
        S0.declared_conditions = {{{0, 0, 0}, "1"}};
        WeightFn S2;
        S2.arity = 4;
        S2.eval = [](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            BigReal one(1, ctx), two(2, ctx), three(3, ctx);
            return safe_div(one - two * t[0], one - three * t[0]);
        };
        S2.declared_conditions = {{{0, 0, 0, 0}, "1"}, {{1, 0, 0, 0}, "1"}};
        m.weights["G2"] = G2;
        m.weights["S0"] = S0;
        m.weights["S2"] = S2;
        m.stepper = [G2, S0, S2](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal zero(ctx), one(1, ctx), half = BigReal::ratio(1, 2, ctx);
            std::vector<BigReal> h = {zero, half, zero, zero, zero};
            std::vector<const WeightFn*> S = {&S0, nullptr, &S2, nullptr, nullptr, nullptr};
            return step_fd4(x, fc, param(p, "kappa"), zero, one, nullptr, nullptr, &G2, h, S);
        };
    } else if (name == "FD5") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"kappa", "0.01"}};
        WeightFn G1 = detail::w_inv_linear(1, 0, 1, 1, {{{0}, "1"}, {{1}, "1"}});
        WeightFn H = detail::w_inv_linear(3, 2, 1, 10, {{{0, 0, 0}, "1"}, {{0, 0, 1}, "0.1"}});
        m.weights["G1"] = G1;
        m.weights["H"] = H;
        m.stepper = [G1, H](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal zero(ctx), one(1, ctx);
            return step_fd5(x, fc, param(p, "kappa"), one, zero, nullptr, &G1, nullptr, zero, H);
        };
    } else if (name == "FD6") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 6;
        m.param_defaults = {{"kappa", "0.01"}};
        WeightFn G2;
        G2.arity = 2;
        G2.eval = [](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            BigReal one(1, ctx), two(2, ctx);
            return safe_div(one - t[0] + t[1], one - two * t[0]);
        };
        G2.declared_conditions = {{{0, 0}, "1"}, {{1, 0}, "1"}, {{0, 1}, "1"}};
        WeightFn H = detail::w_inv_linear(3, 2, 1, 10, {{{0, 0, 0}, "1"}, {{0, 0, 1}, "0.1"}});
        m.weights["G2"] = G2;
        m.weights["H"] = H;
        m.stepper = [G2, H](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal zero(ctx), one(1, ctx);
            return step_fd6(x, fc, param(p, "kappa"), zero, one, nullptr, nullptr, &G2, H);
        };
    } else if (name == "FD7") {
        m.kind = MethodKind::DerivativeFree;
        m.evals_per_iteration = 4;
        m.claimed_order = 7;
        m.param_defaults = {{"kappa", "0.01"}};
        WeightFn G0;
        G0.arity = 1;
        G0.eval = [](const std::vector<BigReal>& t) {
            PrecisionContext ctx = t[0].context();
            BigReal one(1, ctx), two(2, ctx), three(3, ctx);
            return safe_div(one - two * t[0], one - three * t[0]);
        };
        G0.declared_conditions = {{{0}, "1"}, {{1}, "1"}};
        WeightFn H = detail::w_inv_linear(
            3, 0, 1, 1, {{{0, 0, 0}, "1"}, {{1, 0, 0}, "1"}, {{0, 0, 1}, "0"}});
        m.weights["G0"] = G0;
        m.weights["H"] = H;
        m.stepper = [G0, H](const BigReal& x, FunctionCache& fc, const Params& p) {
            PrecisionContext ctx = x.context();
            BigReal zero(ctx), one(1, ctx);
            return step_fd5(x, fc, param(p, "kappa"), zero, zero, &G0, nullptr, nullptr, one, H);
        };
    } else {
        throw UnknownMethod("unknown method '" + name + "'");
    }

    PrecisionContext check_ctx(256);
    for (const auto& [wname, w] : m.weights) validate_weight(m.name + "." + wname, w, check_ctx);
    return m;
}

inline Params resolve_params(const MethodScheme& m, const PrecisionContext& ctx,
                             const Params& overrides = {}) {
    Params p;
    for (const auto& [k, v] : m.param_defaults) p.emplace(k, parse_decimal(v, ctx));
    for (const auto& [k, v] : overrides) p.insert_or_assign(k, v);
    return p;
}

/// Run the method from x0 under a TNFE budget.  All failure modes are
/// encoded in the trace status; nothing is thrown.
inline IterationTrace iterate(const MethodScheme& m, const TestFunction& f, const BigReal& x0,
                              long tnfe_budget, const Params& overrides = {}) {
    PrecisionContext ctx = x0.context();
    Params params = resolve_params(m, ctx, overrides);
    EvalCounter counter;
    FunctionCache fc(f, counter);
    IterationTrace trace;
    trace.iterates.push_back(x0);
    BigReal x = x0;
    int rising = 0;
    long digits = ctx.decimal_digits();

    // A step that collapses (coincident nodes / zero denominator) after the
    // iterate already reached roundoff level is convergence, not failure:
    // salvage the best evaluated point instead of discarding the iteration.
    auto salvage = [&](RunStatus fallback) {
        const BigReal* best = fc.best_point();
        if (best && !(*best == trace.iterates.back())) {
            BigReal r = fc.residual(*best);
            if (abs(r) < abs(fc.residual(trace.iterates.back())))
                trace.iterates.push_back(*best);
        }
        BigReal r = fc.residual(trace.iterates.back());
        if (r.is_zero() || floor_log10(abs(r)) < -(digits - 30))
            trace.status = RunStatus::Converged;
        else if (floor_log10(abs(r)) > -digits / 2)
            // the derivative surrogate vanished far from any root: the run
            // escaped into a flat region, which is divergence
            trace.status = RunStatus::Divergent;
        else
            trace.status = fallback;
    };

    while (counter.count + m.evals_per_iteration <= tnfe_budget) {
        BigReal xn = x;
        try {
            xn = m.stepper(x, fc, params);
        } catch (const ExactRootFound& hit) {
            if (!(hit.root == x)) trace.iterates.push_back(hit.root);
            trace.status = RunStatus::Converged;
            break;
        } catch (const DivergedSignal&) {
            trace.status = RunStatus::Divergent;
            break;
        } catch (const DegenerateNodes&) {
            salvage(RunStatus::DegenerateStep);
            break;
        } catch (const SingularStep&) {
            salvage(RunStatus::DegenerateStep);
            break;
        } catch (const DomainError&) {
            trace.status = RunStatus::DomainError;
            break;
        }
        // f(x) is now cached; record its residual before moving on
        trace.residuals.push_back(fc.residual(x));
        if (trace.residuals.size() >= 2) {
            const BigReal& cur = trace.residuals.back();
            const BigReal& prev = trace.residuals[trace.residuals.size() - 2];
            PrecisionContext c2 = cur.context();
            if (abs(cur) > BigReal(10, c2) * abs(prev))
                ++rising;
            else
                rising = 0;
        }
        trace.iterates.push_back(xn);
        if (!xn.is_finite() || abs(xn) > BigReal(100000000L, ctx)) {
            trace.status = RunStatus::Divergent;
            break;
        }
        if (rising >= 3) {
            trace.status = RunStatus::Divergent;
            break;
        }
        x = xn;
    }
    // complete the residual column for every recorded iterate
    while (trace.residuals.size() < trace.iterates.size()) {
        try {
            trace.residuals.push_back(fc.residual(trace.iterates[trace.residuals.size()]));
        } catch (const Error&) {
            trace.iterates.pop_back();
            if (trace.status == RunStatus::BudgetExhausted) trace.status = RunStatus::Divergent;
        }
    }
    trace.tnfe_used = counter.count;
    if (trace.status == RunStatus::BudgetExhausted && !trace.residuals.empty() &&
        trace.residuals.back().is_zero())
        trace.status = RunStatus::Converged;
    return trace;
}

} // namespace rootiter

#endif
