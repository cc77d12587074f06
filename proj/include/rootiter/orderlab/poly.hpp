#ifndef ROOTITER_ORDERLAB_POLY_HPP
#define ROOTITER_ORDERLAB_POLY_HPP

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rootiter/errors.hpp"

namespace rootiter::orderlab {

/// Global interning table for coefficient-ring symbols (c1, c2, ..., kappa,
/// weight parameters).  Ids are stable for the process lifetime.
inline std::vector<std::string>& symbol_names() {
    static std::vector<std::string> names;
    return names;
}

inline int symbol_id(const std::string& name) {
    static std::map<std::string, int> index;
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(symbol_names().size());
    symbol_names().push_back(name);
    index.emplace(name, id);
    return id;
}

/// Monomial: exponent per symbol id, trailing zeros trimmed.
using Mono = std::vector<int>;

inline void mono_trim(Mono& m) {
    while (!m.empty() && m.back() == 0) m.pop_back();
}

inline Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

/// a / b if b divides a elementwise.
inline std::optional<Mono> mono_div(const Mono& a, const Mono& b) {
    if (b.size() > a.size()) {
        for (size_t i = a.size(); i < b.size(); ++i)
            if (b[i] > 0) return std::nullopt;
    }
    Mono r(a);
    for (size_t i = 0; i < b.size() && i < a.size(); ++i) {
        r[i] -= b[i];
        if (r[i] < 0) return std::nullopt;
    }
    mono_trim(r);
    return r;
}

inline int mono_degree(const Mono& m) {
    int d = 0;
    for (int e : m) d += e;
    return d;
}

/// Graded-lexicographic order (termination-safe for exact division).
struct MonoCmp {
    bool operator()(const Mono& a, const Mono& b) const {
        int da = mono_degree(a), db = mono_degree(b);
        if (da != db) return da < db;
        size_t n = std::max(a.size(), b.size());
        for (size_t i = 0; i < n; ++i) {
            int ea = i < a.size() ? a[i] : 0;
            int eb = i < b.size() ? b[i] : 0;
            if (ea != eb) return ea < eb;
        }
        return false;
    }
};

/// Sparse multivariate polynomial over exact rationals.
class Poly {
  public:
    std::map<Mono, mpq_class, MonoCmp> t;

    Poly() = default;

    static Poly rational(const mpq_class& q) {
        Poly p;
        if (q != 0) p.t.emplace(Mono{}, q);
        return p;
    }
    static Poly integer(long n) { return rational(mpq_class(n)); }
    static Poly sym(const std::string& name, int exponent = 1) {
        int id = symbol_id(name);
        Mono m(static_cast<size_t>(id) + 1, 0);
        m[static_cast<size_t>(id)] = exponent;
        Poly p;
        p.t.emplace(std::move(m), mpq_class(1));
        return p;
    }

    bool is_zero() const { return t.empty(); }
    bool is_constant() const { return t.empty() || (t.size() == 1 && t.begin()->first.empty()); }

    void add_term(const Mono& m, const mpq_class& q) {
        if (q == 0) return;
        auto [it, inserted] = t.emplace(m, q);
        if (!inserted) {
            it->second += q;
            if (it->second == 0) t.erase(it);
        }
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        Poly r(a);
        for (const auto& [m, q] : b.t) r.add_term(m, q);
        return r;
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        Poly r(a);
        for (const auto& [m, q] : b.t) r.add_term(m, -q);
        return r;
    }
    friend Poly operator-(const Poly& a) { return Poly() - a; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly r;
        for (const auto& [ma, qa] : a.t)
            for (const auto& [mb, qb] : b.t) r.add_term(mono_mul(ma, mb), qa * qb);
        return r;
    }
    Poly& operator+=(const Poly& b) { return *this = *this + b; }
    Poly& operator-=(const Poly& b) { return *this = *this - b; }
    Poly& operator*=(const Poly& b) { return *this = *this * b; }

    friend Poly operator*(const Poly& a, const mpq_class& q) {
        if (q == 0) return Poly();
        Poly r(a);
        for (auto& [m, c] : r.t) c *= q;
        return r;
    }

    friend bool operator==(const Poly& a, const Poly& b) { return a.t == b.t; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    std::pair<Mono, mpq_class> leading() const {
        if (is_zero()) throw Error("leading term of zero polynomial");
        auto it = t.rbegin();
        return {it->first, it->second};
    }

    /// Exact quotient this / d, or nullopt when division leaves a remainder.
    std::optional<Poly> try_divide(const Poly& d) const {
        if (d.is_zero()) throw Error("polynomial division by zero");
        if (d.t.size() == 1) {
            // monomial divisor: divide term by term (fails fast)
            const auto& [dm, dc] = *d.t.begin();
            Poly q;
            for (const auto& [m, c] : t) {
                auto qm = mono_div(m, dm);
                if (!qm) return std::nullopt;
                q.t.emplace(std::move(*qm), c / dc);
            }
            return q;
        }
        if (is_zero()) return Poly();
        if (total_degree() < d.total_degree()) return std::nullopt;
        Poly r(*this), q;
        auto [dm, dc] = d.leading();
        while (!r.is_zero()) {
            auto [rm, rc] = r.leading();
            auto qm = mono_div(rm, dm);
            if (!qm) return std::nullopt; // leading term not divisible => not exact
            Poly term;
            term.t.emplace(*qm, rc / dc);
            q += term;
            r -= term * d;
        }
        return q;
    }

    /// Substitute a polynomial for one symbol.
    Poly subst(const std::string& name, const Poly& value) const {
        size_t id = static_cast<size_t>(symbol_id(name));
        Poly out;
        for (const auto& [m, q] : t) {
            int e = id < m.size() ? m[id] : 0;
            Mono rest(m);
            if (id < rest.size()) rest[id] = 0;
            mono_trim(rest);
            Poly term;
            term.t.emplace(rest, q);
            for (int k = 0; k < e; ++k) term *= value;
            out += term;
        }
        return out;
    }

    int total_degree() const {
        if (is_zero()) return -1;
        return mono_degree(t.rbegin()->first);
    }

    std::string to_string() const {
        if (is_zero()) return "0";
        std::string out;
        // highest monomial first for readability
        for (auto it = t.rbegin(); it != t.rend(); ++it) {
            const auto& [m, q] = *it;
            mpq_class a = q;
            bool neg = a < 0;
            if (neg) a = -a;
            out += out.empty() ? (neg ? "-" : "") : (neg ? " - " : " + ");
            std::string mono;
            for (size_t i = 0; i < m.size(); ++i) {
                if (m[i] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += symbol_names()[i];
                if (m[i] > 1) mono += "^" + std::to_string(m[i]);
            }
            if (mono.empty())
                out += a.get_str();
            else if (a == 1)
                out += mono;
            else
                out += a.get_str() + "*" + mono;
        }
        return out;
    }
};

/// Deterministic total order so Poly can key a map of denominator factors.
struct PolyCmp {
    bool operator()(const Poly& a, const Poly& b) const {
        auto ia = a.t.begin(), ib = b.t.begin();
        for (; ia != a.t.end() && ib != b.t.end(); ++ia, ++ib) {
            MonoCmp mc;
            if (mc(ia->first, ib->first)) return true;
            if (mc(ib->first, ia->first)) return false;
            int c = cmp(ia->second, ib->second);
            if (c != 0) return c < 0;
        }
        return ia == a.t.end() && ib != b.t.end();
    }
};

} // namespace rootiter::orderlab

#endif
