#ifndef ROOTITER_ORDERLAB_SERIES_HPP
#define ROOTITER_ORDERLAB_SERIES_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rootiter/errors.hpp"
#include "rootiter/orderlab/poly.hpp"

namespace rootiter::orderlab {

/// Factors that may legally appear in coefficient denominators (c1, 1-kappa*c1
/// and similar units of the local ring).  Registered on first sighting so the
/// same factor is always reduced against the same atom.
inline std::vector<Poly>& denominator_atoms() {
    static std::vector<Poly> atoms;
    return atoms;
}

/// Coefficient of an error series: polynomial numerator over a multiset of
/// monic polynomial factors.  Arithmetic keeps everything exact; reduce()
/// cancels factors that divide the numerator exactly.
class Coef {
  public:
    Poly num;
    std::map<Poly, int, PolyCmp> den;

    Coef() = default;
    explicit Coef(Poly p) : num(std::move(p)) {}
    explicit Coef(const mpq_class& q) : num(Poly::rational(q)) {}

    static Coef zero() { return Coef(); }
    static Coef one() { return Coef(mpq_class(1)); }

    bool is_zero() const { return num.is_zero(); }

    void reduce() {
        if (num.is_zero()) {
            den.clear();
            return;
        }
        for (auto it = den.begin(); it != den.end();) {
            while (it->second > 0) {
                auto q = num.try_divide(it->first);
                if (!q) break;
                num = std::move(*q);
                --it->second;
            }
            it = it->second == 0 ? den.erase(it) : std::next(it);
        }
    }

    /// Numerator scaled onto the given common denominator.
    Poly scaled_to(const std::map<Poly, int, PolyCmp>& common) const {
        Poly out = num;
        for (const auto& [f, m] : common) {
            auto it = den.find(f);
            int have = it == den.end() ? 0 : it->second;
            for (int k = have; k < m; ++k) out *= f;
        }
        return out;
    }

    friend Coef operator+(const Coef& a, const Coef& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        Coef r;
        r.den = a.den;
        for (const auto& [f, m] : b.den) {
            auto [it, inserted] = r.den.emplace(f, m);
            if (!inserted && it->second < m) it->second = m;
        }
        r.num = a.scaled_to(r.den) + b.scaled_to(r.den);
        r.reduce();
        return r;
    }
    friend Coef operator-(const Coef& a) {
        Coef r(a);
        r.num = -r.num;
        return r;
    }
    friend Coef operator-(const Coef& a, const Coef& b) { return a + (-b); }
    friend Coef operator*(const Coef& a, const Coef& b) {
        if (a.is_zero() || b.is_zero()) return Coef();
        Coef r;
        r.num = a.num * b.num;
        r.den = a.den;
        for (const auto& [f, m] : b.den) r.den[f] += m;
        r.reduce();
        return r;
    }
    Coef& operator+=(const Coef& b) { return *this = *this + b; }
    Coef& operator-=(const Coef& b) { return *this = *this - b; }
    Coef& operator*=(const Coef& b) { return *this = *this * b; }

    /// Split a numerator into denominator atoms; the rational leading factor
    /// stays in the numerator of the quotient.
    friend Coef operator/(const Coef& a, const Coef& b) {
        if (b.is_zero()) throw Error("division by a zero series coefficient");
        Coef r;
        r.num = a.num;
        r.den = a.den;
        for (const auto& [f, m] : b.den) {
            Poly factor = f; // moves to the numerator
            for (int k = 0; k < m; ++k) r.num *= factor;
        }
        // factor b.num into registered atoms
        Poly rest = b.num;
        if (!rest.is_constant()) {
            // pull out per-symbol monomial content first (e.g. plain c1 or c2)
            Mono content = rest.t.begin()->first;
            for (const auto& [mono, q] : rest.t) {
                (void)q;
                for (size_t i = 0; i < content.size(); ++i) {
                    int e = i < mono.size() ? mono[i] : 0;
                    if (e < content[i]) content[i] = e;
                }
            }
            mono_trim(content);
            if (!content.empty()) {
                Poly cmono;
                cmono.t.emplace(content, mpq_class(1));
                rest = *rest.try_divide(cmono);
                for (size_t i = 0; i < content.size(); ++i)
                    for (int k = 0; k < content[i]; ++k)
                        r.den[Poly::sym(symbol_names()[i])] += 1;
            }
        }
        // make monic
        if (rest.is_zero()) throw Error("division by a zero series coefficient");
        mpq_class lead = rest.leading().second;
        rest = rest * (1 / lead);
        r.num = r.num * (1 / lead);
        if (!rest.is_constant()) {
            for (const Poly& atom : denominator_atoms()) {
                while (true) {
                    auto q = rest.try_divide(atom);
                    if (!q) break;
                    rest = std::move(*q);
                    r.den[atom] += 1;
                }
                if (rest.is_constant()) break;
            }
            if (!rest.is_constant()) {
                denominator_atoms().push_back(rest);
                r.den[rest] += 1;
                rest = Poly::integer(1);
            }
        }
        if (!(rest == Poly::integer(1))) {
            // leftover rational from atom cancellation
            r.num = r.num * (1 / rest.leading().second);
        }
        r.reduce();
        return r;
    }
    Coef& operator/=(const Coef& b) { return *this = *this / b; }

    friend bool operator==(const Coef& a, const Coef& b) { return (a - b).is_zero(); }
    friend bool operator!=(const Coef& a, const Coef& b) { return !(a == b); }

    std::string to_string() const {
        std::string n = num.to_string();
        if (den.empty()) return n;
        std::string d;
        for (const auto& [f, m] : den) {
            if (!d.empty()) d += "*";
            bool paren = f.t.size() > 1;
            d += paren ? "(" + f.to_string() + ")" : f.to_string();
            if (m > 1) d += "^" + std::to_string(m);
        }
        return "(" + n + ") / (" + d + ")";
    }
};

/// Truncated power series in the error variable e.  `valid` is the largest
/// index whose coefficient is trustworthy; operations propagate it so that
/// division never silently fabricates high-order terms.
class Series {
  public:
    int T = 0;
    int valid = 0;
    std::vector<Coef> c;

    Series() = default;
    explicit Series(int T_) : T(T_), valid(T_), c(static_cast<size_t>(T_) + 1) {}

    static Series variable(int T) {
        Series s(T);
        if (T >= 1) s.c[1] = Coef::one();
        return s;
    }
    static Series constant(int T, Coef v) {
        Series s(T);
        s.c[0] = std::move(v);
        return s;
    }

    const Coef& at(int k) const {
        if (k < 0 || k > T) throw Error("series index out of range");
        if (k > valid)
            throw TruncationTooLow("coefficient " + std::to_string(k) +
                                   " beyond validity bound " + std::to_string(valid));
        return c[static_cast<size_t>(k)];
    }

    /// Index of the first nonzero valid coefficient.  When every known
    /// coefficient vanishes this returns valid+1, a sound lower bound on the
    /// true valuation.
    int valuation() const {
        for (int k = 0; k <= valid; ++k)
            if (!c[static_cast<size_t>(k)].is_zero()) return k;
        return valid + 1;
    }

    friend Series operator+(const Series& a, const Series& b) {
        Series r(a.T);
        r.valid = std::min(a.valid, b.valid);
        for (int k = 0; k <= r.valid; ++k)
            r.c[static_cast<size_t>(k)] = a.c[static_cast<size_t>(k)] + b.c[static_cast<size_t>(k)];
        return r;
    }
    friend Series operator-(const Series& a, const Series& b) {
        Series r(a.T);
        r.valid = std::min(a.valid, b.valid);
        for (int k = 0; k <= r.valid; ++k)
            r.c[static_cast<size_t>(k)] = a.c[static_cast<size_t>(k)] - b.c[static_cast<size_t>(k)];
        return r;
    }
    friend Series operator-(const Series& a) {
        Series r(a.T);
        r.valid = a.valid;
        for (int k = 0; k <= r.valid; ++k) r.c[static_cast<size_t>(k)] = -a.c[static_cast<size_t>(k)];
        return r;
    }
    friend Series operator*(const Series& a, const Series& b) {
        Series r(a.T);
        int va = a.valuation(), vb = b.valuation();
        r.valid = std::min(a.T, std::min(a.valid + vb, b.valid + va));
        for (int k = 0; k <= r.valid; ++k) {
            Coef acc;
            for (int i = std::max(va, k - b.valid); i <= std::min(k - vb, a.valid); ++i)
                acc += a.c[static_cast<size_t>(i)] * b.c[static_cast<size_t>(k - i)];
            r.c[static_cast<size_t>(k)] = std::move(acc);
        }
        return r;
    }
    friend Series operator*(const Series& a, const Coef& q) {
        Series r(a.T);
        r.valid = a.valid;
        for (int k = 0; k <= r.valid; ++k) r.c[static_cast<size_t>(k)] = a.c[static_cast<size_t>(k)] * q;
        return r;
    }
    friend Series operator/(const Series& a, const Series& b) {
        int vb = b.valuation();
        if (vb > b.valid)
            throw NonInvertibleLeadingCoefficient("series division by zero (to validity bound)");
        // numerator must vanish at least as fast
        for (int k = 0; k < vb && k <= a.valid; ++k)
            if (!a.c[static_cast<size_t>(k)].is_zero())
                throw Error("series quotient has a pole");
        Series r(a.T);
        r.valid = std::min(a.valid, b.valid) - vb;
        if (r.valid < 0) throw TruncationTooLow("series quotient has no valid coefficients");
        const Coef& d0 = b.c[static_cast<size_t>(vb)];
        for (int k = 0; k <= r.valid; ++k) {
            Coef acc = k + vb <= a.valid ? a.c[static_cast<size_t>(k + vb)] : Coef();
            for (int j = 1; j <= k; ++j) {
                if (vb + j > b.valid) break;
                acc -= b.c[static_cast<size_t>(vb + j)] * r.c[static_cast<size_t>(k - j)];
            }
            r.c[static_cast<size_t>(k)] = acc / d0;
        }
        return r;
    }
    Series& operator+=(const Series& b) { return *this = *this + b; }
    Series& operator-=(const Series& b) { return *this = *this - b; }
    Series& operator*=(const Series& b) { return *this = *this * b; }
    Series& operator/=(const Series& b) { return *this = *this / b; }

    std::string to_string() const {
        std::string out;
        for (int k = 0; k <= valid; ++k) {
            if (c[static_cast<size_t>(k)].is_zero()) continue;
            if (!out.empty()) out += " + ";
            out += "[" + c[static_cast<size_t>(k)].to_string() + "]*e^" + std::to_string(k);
        }
        if (out.empty()) out = "0";
        out += " + O(e^" + std::to_string(valid + 1) + ")";
        return out;
    }
};

/// f(alpha + u) = c1*(u + c2 u^2 + ... + cT u^T) for a simple root alpha,
/// composed exactly with the series u.  With derivative=true this yields
/// f'(alpha + u) = c1*(1 + 2 c2 u + ... + T cT u^{T-1}).
inline Series compose_f(const Series& u, bool derivative = false) {
    int T = u.T;
    Series acc = Series::constant(T, Coef::zero());
    if (derivative) {
        for (int k = T; k >= 2; --k) {
            Coef ck(Poly::sym("c" + std::to_string(k)) * mpq_class(k));
            acc = acc * u + Series::constant(T, ck);
        }
        acc = acc * u + Series::constant(T, Coef::one());
    } else {
        for (int k = T; k >= 2; --k) {
            Coef ck(Poly::sym("c" + std::to_string(k)));
            acc = acc * u + Series::constant(T, ck);
        }
        acc = (acc * u + Series::constant(T, Coef::one())) * u;
    }
    return acc * Coef(Poly::sym("c1"));
}

/// One term of a weight-function expansion: exponents per argument.
using WeightMono = std::vector<int>;

/// Generic multivariate weight H(t_1,...,t_m) expanded as a sum of monomials
/// in the argument series.  Every monomial whose valuation can reach the
/// truncation bound is included; coefficients come from `pins` (imposed
/// rational values), `names` (named free symbols), or are auto-named
/// `prefix#i.j...`.  `extra_valuation` is the valuation of whatever the
/// weight multiplies, so deeper monomials can be dropped soundly.
struct WeightSpec {
    std::map<WeightMono, mpq_class> pins;
    std::map<WeightMono, Poly> poly_pins; // pinned polynomial values (e.g. M0+1)
    std::map<WeightMono, std::string> names;
    std::string prefix = "w";
};

inline Series expand_weight(const WeightSpec& spec, const std::vector<Series>& args,
                            int extra_valuation) {
    if (args.empty()) throw Error("weight function needs at least one argument");
    int T = args[0].T;
    std::vector<int> val(args.size());
    for (size_t i = 0; i < args.size(); ++i) {
        val[i] = args[i].valuation();
        if (val[i] < 1) throw Error("weight argument must vanish at the root");
    }
    int budget = T - extra_valuation;
    Series total = Series::constant(T, Coef::zero());
    // cache powers of each argument
    std::vector<std::vector<Series>> pows(args.size());
    for (size_t i = 0; i < args.size(); ++i) {
        pows[i].push_back(Series::constant(T, Coef::one()));
        for (int p = 1; p * val[i] <= budget; ++p) pows[i].push_back(pows[i].back() * args[i]);
    }
    // enumerate exponent vectors with sum(m_i * val_i) <= budget
    WeightMono m(args.size(), 0);
    std::function<void(size_t, int)> walk = [&](size_t i, int used) {
        if (i == args.size()) {
            Coef coef;
            if (auto it = spec.pins.find(m); it != spec.pins.end()) {
                if (it->second == 0) return;
                coef = Coef(it->second);
            } else if (auto ip = spec.poly_pins.find(m); ip != spec.poly_pins.end()) {
                if (ip->second.is_zero()) return;
                coef = Coef(ip->second);
            } else if (auto in = spec.names.find(m); in != spec.names.end()) {
                coef = Coef(Poly::sym(in->second));
            } else {
                std::string name = spec.prefix;
                for (int e : m) name += "_" + std::to_string(e);
                coef = Coef(Poly::sym(name));
            }
            Series term = Series::constant(T, coef);
            for (size_t j = 0; j < args.size(); ++j)
                if (m[j] > 0) term *= pows[j][static_cast<size_t>(m[j])];
            total += term;
            return;
        }
        for (int e = 0; used + e * val[i] <= budget; ++e) {
            m[i] = e;
            walk(i + 1, used + e * val[i]);
        }
        m[i] = 0;
    };
    walk(0, 0);
    return total;
}

/// Closed-form helper: 1 / (1 + q*t) as a series in t.
inline Series geometric(const Series& t, const mpq_class& q) {
    Series den = Series::constant(t.T, Coef::one()) + t * Coef(q);
    return Series::constant(t.T, Coef::one()) / den;
}

} // namespace rootiter::orderlab

#endif
