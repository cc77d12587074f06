// Acceptance gate: one pass/fail line per criterion, exit nonzero if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "rootiter/diagnostics.hpp"
#include "rootiter/funcsuite.hpp"
#include "rootiter/orderlab/families.hpp"
#include "rootiter/schemes.hpp"

using namespace rootiter;
namespace ol = rootiter::orderlab;

namespace {

struct Harness {
    PrecisionContext ctx{4096};
    std::vector<TestFunction> suite = builtin_suite(ctx);
    std::map<std::string, RunReport> cache;
    int checks = 0, failures = 0;

    const TestFunction& fn(const std::string& id) {
        for (const TestFunction& f : suite)
            if (f.id == id) return f;
        throw Error("missing " + id);
    }

    const RunReport& run(const std::string& method, const std::string& id,
                         const char* kappa = nullptr) {
        std::string key = method + "/" + id + "/" + (kappa ? kappa : "");
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const TestFunction& f = fn(id);
        Params overrides;
        if (kappa) overrides.emplace("kappa", parse_decimal(kappa, ctx));
        IterationTrace t = iterate(builtin_method(method), f, f.default_x0, 12, overrides);
        return cache.emplace(key, classify(t, f.reference_root, method, id)).first->second;
    }

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failures;
            std::printf("    FAILED check: %s\n", what.c_str());
        }
    }
};

const char* kFn[12] = {"f1", "f2", "f3", "f4",  "f5",  "f6",
                       "f7", "f8", "f9", "f10", "f11", "f12"};

bool exponent_close(const RunReport& r, long want) {
    if (!r.error_exponent) return false;
    long tol = std::max(1L, static_cast<long>(std::ceil(0.1 * std::abs(double(want)))));
    return std::labs(*r.error_exponent - want) <= tol;
}

bool coc_close(const RunReport& r, double target, double tol) {
    return r.coc && std::fabs(*r.coc - target) <= tol;
}

int report(int n, const char* what, int failures_before, int failures_after) {
    bool ok = failures_after == failures_before;
    std::printf("criterion %d: %s — %s\n", n, ok ? "PASS" : "FAIL", what);
    return ok ? 0 : 1;
}

// ----- published table data ------------------------------------------------

// Table of error exponents per function row; LONG_MIN-like sentinel 1 marks a
// published failure cell.
constexpr long FAILCELL = 1;

const char* kT2Methods[7] = {"FD1-M1", "SG", "NT1", "NT2", "CH", "GR", "AL"};
const long kT2[12][7] = {
    {-142, -121, -127, -84, -82, -93, -141},   {-190, -153, -122, -95, -104, -141, -123},
    {-181, -135, -135, -93, -94, -109, -147},  {-218, -181, -143, -173, -174, -207, -191},
    {-247, -184, -165, -213, -162, -243, -215}, {-215, -181, -173, -123, -123, -154, -180},
    {-123, -95, -113, -69, -67, -76, -118},    {-181, -157, -97, -59, -103, -147, -60},
    {-402, -366, -387, -344, -341, -353, -432}, {-56, -53, -64, -31, FAILCELL, -56, -58},
    {-115, -97, -91, -53, -45, -89, -92},      {-173, -132, -138, -117, -115, -126, -162},
};

const double kT3[12][7] = {
    {5.9999, 5.9994, 6.0003, 5.9989, 5.9987, 5.9995, 5.9965},
    {6.0000, 6.0000, 5.9999, 5.9997, 5.9998, 6.0000, 5.9933},
    {6.0000, 6.0000, 5.9999, 5.9995, 5.9996, 5.9999, 6.0012},
    {6.0000, 6.0000, 6.0000, 6.0000, 6.0000, 6.0000, 5.9998},
    {6.0000, 6.0000, 5.9999, 6.0000, 5.9999, 6.0000, 5.9999},
    {6.0000, 6.0000, 5.9999, 5.9999, 5.9999, 6.0000, 5.9998},
    {5.9999, 5.9992, 6.0001, 5.9974, 5.9972, 5.9991, 5.9860},
    {6.0000, 6.0000, 6.0001, 5.9985, 5.9999, 6.0000, 6.0971},
    {6.0000, 6.0000, 6.0000, 6.0000, 6.0000, 6.0000, 6.0000},
    {5.9806, 6.0038, 6.0098, 5.8343, 3.4125, 5.9880, 6.1207},
    {5.9999, 5.9981, 6.0001, 5.9909, 5.9856, 6.0000, 6.0120},
    {6.0000, 6.0000, 6.0000, 6.0002, 6.0002, 6.0001, 5.9981},
};

const char* kT4Methods[3] = {"FD1-M2", "FD2-M1", "AL1"};
const long kT4[12][3] = {
    {-182, -177, -167}, {-263, -172, -145}, {-223, -177, -178}, {-297, -247, -233},
    {-307, -306, -273}, {-304, -246, -222}, {-156, -145, -136}, {-240, -102, -67},
    {-662, -567, -561}, {-77, -82, -64},    {-162, -141, -103}, {-242, -196, -193},
};

const char* kT5Methods[3] = {"FD4", "FD5", "FD6"};
const long kT5[12][3] = {
    {-172, -158, -172}, {-190, -297, -221}, {-107, -203, -168}, {-220, -198, -213},
    {-247, -248, -215}, {-200, -186, -247}, {-140, -130, -146}, {-168, -90, -165},
    {-466, -392, -404}, {-70, -70, -65},    {-118, -118, -169}, {-189, -149, -144},
};

const long kT7[12] = {-378, -388, -266, -262, -303, -353, -213, -174, -689, -262, -212, -271};

const char* t7_kappa(int row) {
    if (row == 0) return "1.0";  // f1
    if (row == 9) return "-1.0"; // f10
    return "0.01";
}

} // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    Harness h;
    int exit_code = 0;

    // ----- criterion 1: Table 2 error exponents ----------------------------
    {
        int before = h.failures;
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 7; ++c) {
                const std::string m = kT2Methods[c];
                const RunReport& rep = h.run(m, kFn[r]);
                std::string what = "T2 " + m + "/" + kFn[r];
                if (m == "CH") // status-only column
                    h.expect(rep.failed() == (kT2[r][c] == FAILCELL), what + " status");
                else
                    h.expect(exponent_close(rep, kT2[r][c]), what + " exponent");
            }
        exit_code |= report(1, "Table 2 error exponents (CH status-only)", before, h.failures);
    }

    // ----- criterion 2: Table 3 COC ---------------------------------------
    {
        int before = h.failures;
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 7; ++c) {
                const std::string m = kT2Methods[c];
                const RunReport& rep = h.run(m, kFn[r]);
                std::string what = "T3 " + m + "/" + kFn[r];
                if (m == "CH" && r == 9) // published anomaly 3.4125
                    h.expect(!rep.coc || *rep.coc < 5.0, what + " anomalous");
                else if (m == "AL" && r == 7) {
                    // The table itself prints 6.0971 here, outside the 6±0.05
                    // band every other regular cell satisfies; require the
                    // printed value to be reproduced instead.
                    h.expect(coc_close(rep, kT3[r][c], 0.05), what + " (printed 6.0971)");
                    if (rep.coc)
                        std::printf("    note: AL/f8 COC measured %.4f vs printed 6.0971\n",
                                    *rep.coc);
                } else if (kT3[r][c] >= 5.9 && kT3[r][c] <= 6.1)
                    h.expect(coc_close(rep, 6.0, 0.05), what);
            }
        exit_code |= report(2, "Table 3 COC within 0.05 of 6", before, h.failures);
    }

    // ----- criterion 3: Table 4 exponents and COC --------------------------
    {
        int before = h.failures;
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 3; ++c) {
                const std::string m = kT4Methods[c];
                const RunReport& rep = h.run(m, kFn[r]);
                std::string what = "T4 " + m + "/" + kFn[r];
                h.expect(exponent_close(rep, kT4[r][c]), what + " exponent");
                if (r == 9) // f10 row: accept >= 6.8
                    h.expect(rep.coc && *rep.coc >= 6.8, what + " coc>=6.8");
                else
                    h.expect(coc_close(rep, 7.0, 0.05), what + " coc");
            }
        exit_code |= report(3, "Table 4 exponents and seventh-order COC", before, h.failures);
    }

    // ----- criterion 4: Tables 5/6 ----------------------------------------
    {
        int before = h.failures;
        for (int r = 0; r < 12; ++r)
            for (int c = 0; c < 3; ++c) {
                const std::string m = kT5Methods[c];
                const RunReport& rep = h.run(m, kFn[r]);
                h.expect(exponent_close(rep, kT5[r][c]),
                         "T5 " + m + "/" + std::string(kFn[r]) + " exponent");
            }
        for (const char* m : {"TS1", "TS2", "FS1"})
            h.expect(h.run(m, "f7").status == RunStatus::Divergent,
                     std::string("T5 ") + m + "/f7 dgt");
        for (const char* id : {"f8", "f10", "f11"})
            h.expect(h.run("SK2M1", id).failed(), std::string("T5 SK2M1/") + id + " fails");
        h.expect(h.run("SK2M2", "f10").failed(), "T5 SK2M2/f10 fails");
        exit_code |= report(4, "Tables 5/6 FD4-FD6 exponents and failure cells", before,
                            h.failures);
    }

    // ----- criterion 5: Table 7 FD7 with per-row kappa ---------------------
    {
        int before = h.failures;
        for (int r = 0; r < 12; ++r) {
            const RunReport& rep = h.run("FD7", kFn[r], t7_kappa(r));
            std::string what = "T7 FD7/" + std::string(kFn[r]);
            h.expect(exponent_close(rep, kT7[r]), what + " exponent");
            if (r == 0) // paper prints COC 10 on f1; require >= 6.9
                h.expect(rep.coc && *rep.coc >= 6.9, what + " coc>=6.9");
            else
                h.expect(coc_close(rep, 7.0, 0.05), what + " coc");
        }
        exit_code |= report(5, "Table 7 FD7 exponents and COC", before, h.failures);
    }

    // ----- criterion 6: symbolic order certification -----------------------
    {
        int before = h.failures;
        auto t0 = std::chrono::steady_clock::now();
        struct Want {
            const char* family;
            ol::ConditionSet cond;
            int at_least;
        };
        static const Want wants[] = {
            {"FD1", ol::ConditionSet::Base, 6},   {"FD1", ol::ConditionSet::Seventh, 7},
            {"FD2", ol::ConditionSet::Base, 6},   {"FD2", ol::ConditionSet::Seventh, 7},
            {"FD4", ol::ConditionSet::Base, 6},   {"FD5", ol::ConditionSet::Base, 6},
            {"FD5", ol::ConditionSet::Seventh, 7}, {"FD6", ol::ConditionSet::Base, 6},
        };
        for (const Want& w : wants) {
            ol::OrderCertificate cert = ol::verify_family(w.family, w.cond);
            h.expect(cert.order >= w.at_least,
                     std::string(w.family) + "/" + ol::to_string(w.cond) + " order");
        }
        h.expect(ol::verify_family("FD3", ol::ConditionSet::Base).order == 4, "FD3/base == 4");
        {
            ol::OrderCertificate cert = ol::verify_family("FD2", ol::ConditionSet::Base, 7);
            ol::Poly c2 = ol::Poly::sym("c2"), c3 = ol::Poly::sym("c3"),
                     M0 = ol::Poly::sym("M0");
            ol::Poly want = c2 * c2 * c2 * (M0 - ol::Poly::integer(2)) *
                            (M0 * c2 * c2 + c3 * mpq_class(2) - c2 * c2 * mpq_class(2));
            h.expect(cert.leading == ol::Coef(want), "FD2 leading e^6 identity");
        }
        {
            ol::Series y = ol::nm_error(4);
            ol::Poly c2 = ol::Poly::sym("c2"), c3 = ol::Poly::sym("c3");
            h.expect(y.at(2) == ol::Coef(c2), "NM e^2 = c2");
            h.expect(y.at(3) == ol::Coef((c3 - c2 * c2) * mpq_class(2)),
                     "NM e^3 = 2(c3-c2^2)");
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("    symbolic certification wall time: %.1f s\n", secs);
        h.expect(secs < 60.0, "symbolic certification completes in seconds");
        exit_code |= report(6, "symbolic order certificates (exact)", before, h.failures);
    }

    // ----- criterion 7: printed-series cross-checks ------------------------
    {
        int before = h.failures;
        using ol::Coef;
        using ol::Poly;
        auto C = [](int k) { return Poly::sym("c" + std::to_string(k)); };
        auto term = [&](long a, std::initializer_list<std::pair<int, int>> fs) {
            Poly p = Poly::integer(a);
            for (auto [k, e] : fs)
                for (int i = 0; i < e; ++i) p *= C(k);
            return p;
        };
        ol::Series y = ol::nm_error(7);
        h.expect(y.at(2) == Coef(C(2)), "y e^2");
        h.expect(y.at(3) == Coef(term(2, {{3, 1}}) + term(-2, {{2, 2}})), "y e^3");
        h.expect(y.at(4) == Coef(term(3, {{4, 1}}) + term(-7, {{2, 1}, {3, 1}}) +
                                 term(4, {{2, 3}})),
                 "y e^4");
        h.expect(y.at(5) == Coef(term(4, {{5, 1}}) + term(-10, {{2, 1}, {4, 1}}) +
                                 term(-6, {{3, 2}}) + term(20, {{3, 1}, {2, 2}}) +
                                 term(-8, {{2, 4}})),
                 "y e^5");
        h.expect(y.at(6) == Coef(term(-17, {{3, 1}, {4, 1}}) + term(33, {{2, 1}, {3, 2}}) +
                                 term(-52, {{3, 1}, {2, 3}}) + term(28, {{4, 1}, {2, 2}}) +
                                 term(-13, {{2, 1}, {5, 1}}) + term(5, {{6, 1}}) +
                                 term(16, {{2, 5}})),
                 "y e^6");
        ol::Series fy = ol::compose_f(y);
        Poly c1 = C(1);
        h.expect(fy.at(2) == Coef(c1 * C(2)), "f(y) e^2");
        h.expect(fy.at(3) == Coef(c1 * (term(2, {{3, 1}}) + term(-2, {{2, 2}}))), "f(y) e^3");
        h.expect(fy.at(4) == Coef(c1 * (term(3, {{4, 1}}) + term(-7, {{2, 1}, {3, 1}}) +
                                        term(5, {{2, 3}}))),
                 "f(y) e^4");
        h.expect(fy.at(5) == Coef(c1 * (term(4, {{5, 1}}) + term(-10, {{2, 1}, {4, 1}}) +
                                        term(-6, {{3, 2}}) + term(24, {{3, 1}, {2, 2}}) +
                                        term(-12, {{2, 4}}))),
                 "f(y) e^5");
        h.expect(fy.at(6) == Coef(c1 * (term(37, {{2, 1}, {3, 2}}) + term(-73, {{3, 1}, {2, 3}}) +
                                        term(28, {{2, 5}}) + term(34, {{4, 1}, {2, 2}}) +
                                        term(-17, {{3, 1}, {4, 1}}) +
                                        term(-13, {{2, 1}, {5, 1}}) + term(5, {{6, 1}}))),
                 "f(y) e^6");
        {
            ol::Series err = ol::fd3_error(5, ol::fd3_generic(ol::ConditionSet::None));
            Poly fac = Poly::sym("g0") + Poly::sym("g1") + Poly::sym("g2") - Poly::integer(1);
            h.expect(err.at(2).num.try_divide(fac).has_value(), "FD3 e^2 factor");
            h.expect(err.at(3).num.try_divide(fac).has_value(), "FD3 e^3 factor");
        }
        {
            ol::Series err = ol::fd5_error(7, ol::fd5_generic(ol::ConditionSet::Base));
            h.expect(err.at(6).num.try_divide(Poly::sym("a8")).has_value(),
                     "FD5 e^6 divisible by a8");
        }
        exit_code |= report(7, "printed-series cross-checks (exact)", before, h.failures);
    }

    // ----- criterion 8: property suite -------------------------------------
    {
        int before = h.failures;
        PrecisionContext sctx(512);
        // linear one-step exactness for all registered methods
        struct Lin {
            const char* src;
            const char* root;
        };
        static const Lin lins[] = {{"x", "0"}, {"-3*(x-2)", "2"}, {"(x+5)/7", "-5"}};
        for (const Lin& lin : lins) {
            BigReal root = parse_decimal(lin.root, sctx);
            TestFunction f("lin", lin.src, root, root + parse_decimal("0.5", sctx));
            for (const std::string& n : method_names()) {
                IterationTrace t = iterate(builtin_method(n), f, f.default_x0, 12);
                // exact up to the rounding of inexact slopes like 1/7
                bool exact = t.status == RunStatus::Converged && t.iterates.size() <= 3 &&
                             (t.iterates.back() == root ||
                              ulp_distance(t.iterates.back(), root) <= 128.0);
                h.expect(exact, "linear exactness " + n + " on " + lin.src);
            }
        }
        // scale / coupled invariance to 4 ulp
        {
            auto small_suite = builtin_suite(sctx);
            const TestFunction& f = small_suite[8]; // f9
            TestFunction g("scaled", "3*(" + f.source + ")", f.reference_root, f.default_x0);
            BigReal beta(3, sctx);
            for (const std::string& n : method_names()) {
                // offset schemes with f[x,w] mixed additively into fixed
                // weight constants are not scale-equivariant by construction
                if (n == "FS1" || n == "FS3-1" || n == "FS3-2" || n == "FS4-1" || n == "FS4-2")
                    continue;
                MethodScheme m = builtin_method(n);
                Params base = resolve_params(m, sctx);
                Params scaled = base;
                if (m.kind == MethodKind::DerivativeFree)
                    scaled.insert_or_assign("kappa", base.at("kappa") / beta);
                IterationTrace ta = iterate(m, f, f.default_x0, 12, base);
                IterationTrace tb = iterate(m, g, g.default_x0, 12, scaled);
                bool ok = ta.iterates.size() == tb.iterates.size();
                for (size_t i = 0; ok && i < ta.iterates.size(); ++i)
                    ok = ta.iterates[i] == tb.iterates[i] ||
                         ulp_distance(tb.iterates[i], ta.iterates[i]) <= 4.0;
                h.expect(ok, "scale invariance " + n);
            }
        }
        // TNFE accounting exact at 4096 bits
        for (const std::string& n : method_names()) {
            MethodScheme m = builtin_method(n);
            const TestFunction& f = h.fn("f2");
            IterationTrace t = iterate(m, f, f.default_x0, 12);
            h.expect(t.tnfe_used == 12, "TNFE exact " + n);
        }
        // synthetic COC
        {
            BigReal alpha = parse_decimal("1.25", h.ctx);
            for (int p : {2, 3, 6, 7}) {
                BigReal e = parse_decimal("1e-3", h.ctx);
                IterationTrace t;
                t.status = RunStatus::Converged;
                t.iterates.push_back(alpha + BigReal(1, h.ctx));
                for (int n = 0; n < 3; ++n) {
                    t.iterates.push_back(alpha + e);
                    e = pow_int(e, p);
                }
                auto q = coc(t, alpha);
                h.expect(q && std::fabs(*q - p) < 1e-6, "synthetic COC p=" + std::to_string(p));
            }
        }
        // parser/differentiator finite-difference agreement on every function
        {
            BigReal step = parse_decimal("1e-300", h.ctx);
            for (const TestFunction& f : h.suite) {
                BigReal x = f.default_x0;
                BigReal fd = (evaluate_expr(f.body, x + step) - evaluate_expr(f.body, x - step)) /
                             (step + step);
                BigReal sym = evaluate_expr(f.derivative, x);
                BigReal err = abs(fd - sym);
                h.expect(err.is_zero() || floor_log10(err) < -550, "derivative FD check " + f.id);
            }
        }
        exit_code |= report(8, "property suite", before, h.failures);
    }

    std::printf("%d checks, %d failures\n", h.checks, h.failures);
    return exit_code;
}
