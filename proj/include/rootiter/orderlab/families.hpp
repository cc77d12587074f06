#ifndef ROOTITER_ORDERLAB_FAMILIES_HPP
#define ROOTITER_ORDERLAB_FAMILIES_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "rootiter/errors.hpp"
#include "rootiter/orderlab/series.hpp"

namespace rootiter::orderlab {

/// Which weight-function constraints to impose before expanding:
/// None keeps only the normalizations W(0)=1, Base imposes the conditions
/// that certify the family's nominal order, Seventh adds the extra
/// constraints that lift eligible families one order higher.
enum class ConditionSet { None, Base, Seventh };

inline const char* to_string(ConditionSet c) {
    switch (c) {
        case ConditionSet::None: return "none";
        case ConditionSet::Base: return "base";
        case ConditionSet::Seventh: return "seventh";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Exact divided differences of the truncated Taylor model.  For offset
// series a = x-alpha, b = w-alpha and f(alpha+u) = c1*sum_k ck u^k,
//   f[a,b]   = c1 * sum_{k>=1} ck * sum_{i+j=k-1} a^i b^j
//   f[a,b,b] = c1 * sum_{k>=2} ck * sum_{j<=k-2} (k-1-j) a^j b^{k-2-j}
// Being polynomial identities, these lose no validity to cancellation.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<Series> series_powers(const Series& s, int up_to) {
    std::vector<Series> p;
    p.push_back(Series::constant(s.T, Coef::one()));
    for (int i = 1; i <= up_to; ++i) p.push_back(p.back() * s);
    return p;
}

inline Coef ck(int k) { return Coef(Poly::sym("c" + std::to_string(k))); }

} // namespace detail

inline Series dd_offset(const Series& a, const Series& b) {
    int T = a.T;
    auto pa = detail::series_powers(a, T - 1);
    auto pb = detail::series_powers(b, T - 1);
    Series total = Series::constant(T, Coef::one()); // k = 1 term
    for (int k = 2; k <= T; ++k) {
        Series h = Series::constant(T, Coef::zero());
        for (int i = 0; i <= k - 1; ++i) h += pa[static_cast<size_t>(i)] * pb[static_cast<size_t>(k - 1 - i)];
        total += h * detail::ck(k);
    }
    return total * Coef(Poly::sym("c1"));
}

/// f[a,b,b]; with b = x this is the f[z,x,x] appearing in the schemes.
inline Series dd2_offset(const Series& a, const Series& b) {
    int T = a.T;
    auto pa = detail::series_powers(a, T - 2 >= 0 ? T - 2 : 0);
    auto pb = detail::series_powers(b, T - 2 >= 0 ? T - 2 : 0);
    Series total = Series::constant(T, Coef::zero());
    for (int k = 2; k <= T; ++k) {
        Series h = Series::constant(T, Coef::zero());
        for (int j = 0; j <= k - 2; ++j)
            h += pa[static_cast<size_t>(j)] * pb[static_cast<size_t>(k - 2 - j)] * Coef(mpq_class(k - 1 - j));
        total += h * detail::ck(k);
    }
    return total * Coef(Poly::sym("c1"));
}

// ---------------------------------------------------------------------------
// Weight functions as series transformers.
// ---------------------------------------------------------------------------

using WeightFn = std::function<Series(const std::vector<Series>&)>;

inline WeightFn generic_weight(WeightSpec spec, int extra_valuation) {
    return [spec = std::move(spec), extra_valuation](const std::vector<Series>& args) {
        return expand_weight(spec, args, extra_valuation);
    };
}

inline WeightFn unit_weight() {
    return [](const std::vector<Series>& args) {
        return Series::constant(args.at(0).T, Coef::one());
    };
}

/// 1/(1 - t) applied to the single argument (lambda = 1 geometric weight).
inline WeightFn geometric_weight() {
    return [](const std::vector<Series>& args) {
        Series one = Series::constant(args.at(0).T, Coef::one());
        return one / (one - args.at(0));
    };
}

// ---------------------------------------------------------------------------
// Derivative-based three-point family and its special case.
// ---------------------------------------------------------------------------

inline Series nm_error(int T) {
    Series e = Series::variable(T);
    return e - compose_f(e) / compose_f(e, true);
}

struct FD1Spec {
    WeightFn G; // G(t1)
    WeightFn H; // H(t1, t2, t3)
};

inline FD1Spec fd1_generic(ConditionSet cond) {
    WeightSpec G;
    G.prefix = "G";
    G.pins[{0}] = 1;
    if (cond != ConditionSet::None) G.pins[{1}] = 2;
    G.names[{2}] = "M0";
    G.names[{3}] = "M1";
    G.names[{4}] = "M2";
    WeightSpec H;
    H.prefix = "H";
    H.pins[{0, 0, 0}] = 1;
    if (cond != ConditionSet::None) H.pins[{1, 0, 0}] = 2;
    H.names[{0, 1, 0}] = "R0";
    H.names[{0, 0, 1}] = "R1";
    H.names[{2, 0, 0}] = "R2";
    H.names[{0, 2, 0}] = "R3";
    H.names[{0, 0, 2}] = "R4";
    if (cond == ConditionSet::Seventh) {
        H.pins[{0, 0, 1}] = 1;                                      // R1 = 1
        H.poly_pins[{2, 0, 0}] = Poly::sym("M0") + Poly::integer(1); // R2 = M0 + 1
    }
    return {generic_weight(std::move(G), 2), generic_weight(std::move(H), 4)};
}

inline Series fd1_error(int T, const FD1Spec& s) {
    Series e = Series::variable(T);
    Series fx = compose_f(e), fpx = compose_f(e, true);
    Series y = e - fx / fpx;
    Series fy = compose_f(y);
    Series t1 = fy / fx;
    Series z = y - s.G({t1}) * (fy / fpx);
    Series fz = compose_f(z);
    Series t2 = fz / fx, t3 = fz / fy;
    return z - s.H({t1, t2, t3}) * (fz / fpx);
}

struct FD2Spec {
    WeightFn A; // A(t1)
};

inline FD2Spec fd2_generic(ConditionSet cond) {
    WeightSpec A;
    A.prefix = "A";
    A.pins[{0}] = 1;
    if (cond == ConditionSet::Seventh)
        A.pins[{1}] = 2;
    else
        A.names[{1}] = "M0";
    A.names[{2}] = "M1";
    A.names[{3}] = "M2";
    return {generic_weight(std::move(A), 2)};
}

inline Series fd2_error(int T, const FD2Spec& s) {
    Series e = Series::variable(T);
    Series fx = compose_f(e), fpx = compose_f(e, true);
    Series y = e - fx / fpx;
    Series fy = compose_f(y);
    Series t1 = fy / fx;
    Series z = y - s.A({t1}) * (fy / fpx);
    Series fz = compose_f(z);
    Series den = dd_offset(z, y) + dd2_offset(z, e) * (z - y);
    return z - fz / den;
}

// ---------------------------------------------------------------------------
// Derivative-free families: shared two-step front end.
// ---------------------------------------------------------------------------

struct DFFront {
    Series e, fx, w, fw, dxw, y, fy, t1, t2;
};

inline DFFront df_front(int T, const Coef& kappa) {
    Series e = Series::variable(T);
    Series fx = compose_f(e);
    Series w = e - fx * kappa;
    Series fw = compose_f(w);
    Series dxw = dd_offset(e, w);
    Series y = e - fx / dxw;
    Series fy = compose_f(y);
    Series t1 = fy / fx;
    Series t2 = fy / fw;
    return {std::move(e),  std::move(fx), std::move(w),  std::move(fw), std::move(dxw),
            std::move(y),  std::move(fy), std::move(t1), std::move(t2)};
}

struct FrontWeights {
    Coef g0, g1, g2;
    WeightFn G0, G1, G2; // G0(t1), G1(t2), G2(t1, t2)
};

/// Generic front-end weights with the standard value/slope normalizations
/// imposed.  Name arguments label the quadratic coefficients; cross may be
/// null to leave the t1*t2 coefficient auto-named.
inline FrontWeights front_weights_generic(const Coef& g0, const Coef& g1, const Coef& g2,
                                          const char* q0, const char* q1, const char* q2a,
                                          const char* q2b, const char* cross) {
    WeightSpec G0;
    G0.prefix = "G0";
    G0.pins[{0}] = 1;
    G0.pins[{1}] = 1;
    G0.names[{2}] = q0;
    WeightSpec G1;
    G1.prefix = "G1";
    G1.pins[{0}] = 1;
    G1.pins[{1}] = 1;
    G1.names[{2}] = q1;
    WeightSpec G2;
    G2.prefix = "G2";
    G2.pins[{0, 0}] = 1;
    G2.pins[{1, 0}] = 1;
    G2.pins[{0, 1}] = 1;
    G2.names[{2, 0}] = q2a;
    G2.names[{0, 2}] = q2b;
    if (cross) G2.names[{1, 1}] = cross;
    return {g0, g1, g2, generic_weight(std::move(G0), 2), generic_weight(std::move(G1), 2),
            generic_weight(std::move(G2), 2)};
}

/// z = y - [g0 G0/f[y,w] + g1 G1/f[y,x] + g2 G2/f[x,w]] f(y).
inline Series df_third_step(const DFFront& F, const FrontWeights& W) {
    int T = F.e.T;
    Series corr = Series::constant(T, Coef::zero());
    if (!W.g0.is_zero()) corr += W.G0({F.t1}) * W.g0 / dd_offset(F.y, F.w);
    if (!W.g1.is_zero()) corr += W.G1({F.t2}) * W.g1 / dd_offset(F.y, F.e);
    if (!W.g2.is_zero()) corr += W.G2({F.t1, F.t2}) * W.g2 / F.dxw;
    return F.y - corr * F.fy;
}

// ---- FD3: optimal fourth-order scheme ----

struct FD3Spec {
    Coef kappa;
    FrontWeights W;
};

inline FD3Spec fd3_generic(ConditionSet cond) {
    Coef g1(Poly::sym("g1")), g2(Poly::sym("g2"));
    Coef g0 = cond == ConditionSet::None ? Coef(Poly::sym("g0")) : Coef::one() - g1 - g2;
    return {Coef(Poly::sym("kappa")),
            front_weights_generic(g0, g1, g2, "L1", "M1", "N1", "N2", nullptr)};
}

inline Series fd3_error(int T, const FD3Spec& s) {
    return df_third_step(df_front(T, s.kappa), s.W);
}

// ---- FD4: six-branch fourth step ----

struct FD4Spec {
    Coef kappa;
    FrontWeights W;
    std::array<Coef, 5> h;  // h1..h5 (h0 = 1 - sum)
    std::array<WeightFn, 6> S;
};

inline FD4Spec fd4_generic() {
    FD4Spec s;
    s.kappa = Coef(Poly::sym("kappa"));
    Coef g1(Poly::sym("g1")), g2(Poly::sym("g2"));
    s.W = front_weights_generic(Coef::one() - g1 - g2, g1, g2, "L1", "M1", "N1", "N2", nullptr);
    for (int i = 0; i < 5; ++i) s.h[static_cast<size_t>(i)] = Coef(Poly::sym("h" + std::to_string(i + 1)));
    auto named = [](const char* prefix, std::vector<std::pair<WeightMono, const char*>> names,
                    std::vector<WeightMono> slope_pins) {
        WeightSpec w;
        w.prefix = prefix;
        size_t arity = names.front().first.size();
        w.pins[WeightMono(arity, 0)] = 1;
        for (const auto& m : slope_pins) w.pins[m] = 1;
        for (auto& [m, n] : names) w.names[m] = n;
        return generic_weight(std::move(w), 4);
    };
    // S0(t3,t4,t5)
    s.S[0] = named("S0", {{{1, 0, 0}, "a1"}, {{0, 1, 0}, "a2"}, {{0, 0, 1}, "a3"}}, {});
    // S1(t1,t3,t4,t5), slope in t1
    s.S[1] = named("S1",
                   {{{2, 0, 0, 0}, "b1"}, {{0, 1, 0, 0}, "b2"}, {{0, 0, 1, 0}, "b3"}, {{0, 0, 0, 1}, "b4"}},
                   {{1, 0, 0, 0}});
    // S2(t2,t3,t4,t5), slope in t2
    s.S[2] = named("S2",
                   {{{2, 0, 0, 0}, "b5"}, {{0, 1, 0, 0}, "b6"}, {{0, 0, 1, 0}, "b7"}, {{0, 0, 0, 1}, "b8"}},
                   {{1, 0, 0, 0}});
    // S3(t2,t3,t4,t5), slope in t2
    s.S[3] = named("S3",
                   {{{2, 0, 0, 0}, "b9"}, {{0, 1, 0, 0}, "b10"}, {{0, 0, 1, 0}, "b11"}, {{0, 0, 0, 1}, "b12"}},
                   {{1, 0, 0, 0}});
    // S4(t1,t3,t4,t5), slope in t1
    s.S[4] = named("S4",
                   {{{2, 0, 0, 0}, "b13"}, {{0, 1, 0, 0}, "b14"}, {{0, 0, 1, 0}, "b15"}, {{0, 0, 0, 1}, "b16"}},
                   {{1, 0, 0, 0}});
    // S5(t1,t2,t3,t4,t5), slopes in t1 and t2
    s.S[5] = named("S5",
                   {{{2, 0, 0, 0, 0}, "b17"},
                    {{0, 2, 0, 0, 0}, "b18"},
                    {{0, 0, 1, 0, 0}, "b19"},
                    {{0, 0, 0, 1, 0}, "b20"},
                    {{0, 0, 0, 0, 1}, "b21"}},
                   {{1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}});
    return s;
}

inline Series fd4_error(int T, const FD4Spec& s) {
    DFFront F = df_front(T, s.kappa);
    Series z = df_third_step(F, s.W);
    Series fz = compose_f(z);
    Series t3 = fz / F.fx, t4 = fz / F.fw, t5 = fz / F.fy;
    Coef h0 = Coef::one();
    for (const Coef& hi : s.h) h0 -= hi;
    Series corr = Series::constant(T, Coef::zero());
    auto add = [&](const Coef& g, const WeightFn& Wf, const std::vector<Series>& args,
                   const Series& den) {
        if (!g.is_zero()) corr += Wf(args) * g / den;
    };
    add(h0, s.S[0], {t3, t4, t5}, dd_offset(F.y, z));
    add(s.h[0], s.S[1], {F.t1, t3, t4, t5}, dd_offset(z, F.w));
    add(s.h[1], s.S[2], {F.t2, t3, t4, t5}, dd_offset(z, F.e));
    add(s.h[2], s.S[3], {F.t2, t3, t4, t5}, dd_offset(F.e, F.y));
    add(s.h[3], s.S[4], {F.t1, t3, t4, t5}, dd_offset(F.y, F.w));
    add(s.h[4], s.S[5], {F.t1, F.t2, t3, t4, t5}, F.dxw);
    return z - corr * fz;
}

// ---- FD5 / FD6: blended fourth-step denominators ----

inline WeightFn fourth_step_weight_generic(ConditionSet cond) {
    WeightSpec H;
    H.prefix = "HF";
    H.pins[{0, 0, 0}] = 1;
    H.names[{1, 0, 0}] = "a6";
    H.names[{0, 1, 0}] = "a7";
    if (cond == ConditionSet::Seventh)
        H.pins[{0, 0, 1}] = 0; // a8 = 0
    else
        H.names[{0, 0, 1}] = "a8";
    return generic_weight(std::move(H), 4);
}

struct FD5Spec {
    Coef kappa;
    FrontWeights W;
    Coef h;
    WeightFn H; // H(t3, t4, t5)
};

inline FD5Spec fd5_generic(ConditionSet cond) {
    Coef g1(Poly::sym("g1")), g2(Poly::sym("g2"));
    return {Coef(Poly::sym("kappa")),
            front_weights_generic(Coef::one() - g1 - g2, g1, g2, "a1", "a2", "a3", "a4", "a5"),
            Coef(Poly::sym("h")), fourth_step_weight_generic(cond)};
}

inline Series fd5_error(int T, const FD5Spec& s) {
    DFFront F = df_front(T, s.kappa);
    Series z = df_third_step(F, s.W);
    Series fz = compose_f(z);
    Series t3 = fz / F.fx, t4 = fz / F.fw, t5 = fz / F.fy;
    Coef hm1 = s.h - Coef::one();
    Series den = dd_offset(z, F.y) - dd_offset(z, F.w) * hm1 + dd_offset(z, F.e) * s.h -
                 dd_offset(F.y, F.e) * s.h + dd_offset(F.y, F.w) * hm1;
    return z - s.H({t3, t4, t5}) * fz / den;
}

struct FD6Spec {
    Coef kappa;
    FrontWeights W;
    WeightFn H; // H(t3, t4, t5)
};

inline FD6Spec fd6_generic() {
    Coef g1(Poly::sym("g1")), g2(Poly::sym("g2"));
    return {Coef(Poly::sym("kappa")),
            front_weights_generic(Coef::one() - g1 - g2, g1, g2, "a1", "a2", "a3", "a4", "a5"),
            fourth_step_weight_generic(ConditionSet::Base)};
}

inline Series fd6_error(int T, const FD6Spec& s) {
    DFFront F = df_front(T, s.kappa);
    Series z = df_third_step(F, s.W);
    Series fz = compose_f(z);
    Series t3 = fz / F.fx, t4 = fz / F.fw, t5 = fz / F.fy;
    Series den = dd_offset(z, F.y) +
                 (dd_offset(z, F.e) - dd_offset(F.w, F.e)) * ((z - F.y) / (z - F.e));
    return z - s.H({t3, t4, t5}) * fz / den;
}

// ---------------------------------------------------------------------------
// Literal transcriptions of two published four-step schemes, used as
// independent oracles for the specialization checks below.
// ---------------------------------------------------------------------------

/// w = x + f(x); y = x - f(x)^2/(f(w)-f(x)); z = y - (1-t2)^{-1} f(y)/f[x,y];
/// next = z - f(z)/f[z,y].
inline Series thukral_fourstep_error(int T) {
    Series e = Series::variable(T);
    Series fx = compose_f(e);
    Series w = e + fx;
    Series fw = compose_f(w);
    Series y = e - (fx * fx) / (fw - fx);
    Series fy = compose_f(y);
    Series one = Series::constant(T, Coef::one());
    Series t2 = fy / fw;
    Series z = y - (one / (one - t2)) * (fy / dd_offset(e, y));
    Series fz = compose_f(z);
    return z - fz / dd_offset(z, y);
}

/// FD4 specialized to the same scheme: kappa=-1, g1=1, g2=0, G1=1/(1-t2),
/// all h_i = 0, S0 = 1.
inline Series fd4_error_specialized(int T) {
    FD4Spec s;
    s.kappa = Coef(mpq_class(-1));
    s.W = {Coef::zero(), Coef::one(), Coef::zero(), unit_weight(), geometric_weight(),
           unit_weight()};
    for (auto& hi : s.h) hi = Coef::zero();
    for (auto& Si : s.S) Si = unit_weight();
    return fd4_error(T, s);
}

/// w = x - kappa f(x); y = x - f(x)/f[x,w]; z = y - f(y)/f[w,y];
/// next = z - f(z)/(f[w,z] + f[z,y] - f[w,y]).
inline Series soleymani_fourstep_error(int T) {
    Coef kappa(Poly::sym("kappa"));
    Series e = Series::variable(T);
    Series fx = compose_f(e);
    Series w = e - fx * kappa;
    Series fw = compose_f(w);
    Series y = e - fx / dd_offset(e, w);
    Series fy = compose_f(y);
    Series z = y - fy / dd_offset(w, y);
    Series fz = compose_f(z);
    return z - fz / (dd_offset(w, z) + dd_offset(z, y) - dd_offset(w, y));
}

/// FD5 specialized to the same scheme: h = 0, g1 = g2 = 0, G0 = 1, H = 1.
inline Series fd5_error_specialized(int T) {
    FD5Spec s;
    s.kappa = Coef(Poly::sym("kappa"));
    s.W = {Coef::one(), Coef::zero(), Coef::zero(), unit_weight(), unit_weight(), unit_weight()};
    s.h = Coef::zero();
    s.H = unit_weight();
    return fd5_error(T, s);
}

// ---------------------------------------------------------------------------
// Order certification.
// ---------------------------------------------------------------------------

struct OrderCertificate {
    std::string family;
    ConditionSet conditions = ConditionSet::Base;
    int truncation = 0;
    int checked_through = 0; // validity bound of the error series
    int order = 0;           // index of the first nonzero coefficient
    Coef leading;
    std::vector<std::string> coefficient_lines;
};

inline OrderCertificate certify_order(const Series& err) {
    OrderCertificate cert;
    cert.truncation = err.T;
    cert.checked_through = err.valid;
    for (int k = 1; k <= err.valid; ++k) {
        const Coef& ck = err.c[static_cast<size_t>(k)];
        if (ck.is_zero()) {
            cert.coefficient_lines.push_back("e^" + std::to_string(k) + ": 0");
        } else {
            cert.order = k;
            cert.leading = ck;
            cert.coefficient_lines.push_back("e^" + std::to_string(k) + ": " + ck.to_string());
            break;
        }
    }
    if (cert.order == 0)
        throw TruncationTooLow("error series vanishes through e^" + std::to_string(err.valid) +
                               "; raise the truncation order");
    return cert;
}

inline int default_truncation(const std::string& family, ConditionSet cond) {
    if (family == "NM") return 4;
    if (family == "FD3") return 5;
    if (family == "FD1" || family == "FD2") return 8;
    if (family == "FD5") return cond == ConditionSet::Seventh ? 8 : 7;
    return 7; // FD4, FD6
}

/// Nominal order the family certifies under the given conditions; 0 when no
/// claim is made (conditions "none").
inline int claimed_order(const std::string& family, ConditionSet cond) {
    if (cond == ConditionSet::None) return 0;
    if (family == "NM") return 2;
    if (family == "FD3") return 4;
    bool seventh = cond == ConditionSet::Seventh;
    if (family == "FD1" || family == "FD2" || family == "FD5") return seventh ? 7 : 6;
    if (family == "FD4" || family == "FD6") return 6;
    throw Error("unknown family: " + family);
}

inline Series family_error(const std::string& family, ConditionSet cond, int T) {
    if (family == "NM") return nm_error(T);
    if (family == "FD1") return fd1_error(T, fd1_generic(cond));
    if (family == "FD2") return fd2_error(T, fd2_generic(cond));
    if (family == "FD3") return fd3_error(T, fd3_generic(cond));
    if (family == "FD4") return fd4_error(T, fd4_generic());
    if (family == "FD5") return fd5_error(T, fd5_generic(cond));
    if (family == "FD6") return fd6_error(T, fd6_generic());
    throw Error("unknown family: " + family);
}

inline std::vector<std::string> family_names() {
    return {"NM", "FD1", "FD2", "FD3", "FD4", "FD5", "FD6"};
}

inline OrderCertificate verify_family(const std::string& family, ConditionSet cond, int T = 0) {
    if (T == 0) T = default_truncation(family, cond);
    OrderCertificate cert = certify_order(family_error(family, cond, T));
    cert.family = family;
    cert.conditions = cond;
    return cert;
}

} // namespace rootiter::orderlab

#endif
