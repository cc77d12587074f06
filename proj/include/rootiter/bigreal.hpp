#ifndef ROOTITER_BIGREAL_HPP
#define ROOTITER_BIGREAL_HPP

#include <mpfr.h>

#include <cstdio>
#include <regex>
#include <string>
#include <string_view>
#include <utility>

#include "rootiter/errors.hpp"

namespace rootiter {

/// Working precision for a whole computation. Every BigReal carries the
/// precision of the context it was created under; there is no mutable
/// global default, so concurrent runs at different precisions cannot
/// interfere.
class PrecisionContext {
  public:
    explicit PrecisionContext(long bits) : bits_(bits) {
        if (bits < 64) throw Error("precision must be at least 64 bits");
    }

    long bits() const { return bits_; }

    /// Deterministic bits -> decimal digits mapping: floor(bits * 0.30103).
    long decimal_digits() const { return bits_ * 30103 / 100000; }

  private:
    long bits_;
};

/// Immutable-after-construction arbitrary-precision float (MPFR backed).
/// All operations round to nearest at the precision of the widest operand,
/// so a fixed context gives bit-identical results across runs.
class BigReal {
  public:
    explicit BigReal(const PrecisionContext& ctx) { mpfr_init2(v_, ctx.bits()); mpfr_set_zero(v_, 1); }

    BigReal(long value, const PrecisionContext& ctx) {
        mpfr_init2(v_, ctx.bits());
        mpfr_set_si(v_, value, MPFR_RNDN);
    }

    BigReal(const BigReal& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }

    BigReal(BigReal&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }

    BigReal& operator=(const BigReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }

    BigReal& operator=(BigReal&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }

    ~BigReal() { mpfr_clear(v_); }

    static BigReal ratio(long num, long den, const PrecisionContext& ctx) {
        if (den == 0) throw DomainError("zero denominator");
        BigReal r(ctx);
        mpfr_set_si(r.v_, num, MPFR_RNDN);
        mpfr_div_si(r.v_, r.v_, den, MPFR_RNDN);
        return r;
    }

    long precision_bits() const { return mpfr_get_prec(v_); }
    PrecisionContext context() const { return PrecisionContext(precision_bits()); }

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    friend BigReal operator+(const BigReal& a, const BigReal& b) {
        BigReal r = a.result_like(b);
        mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r.checked("add");
    }
    friend BigReal operator-(const BigReal& a, const BigReal& b) {
        BigReal r = a.result_like(b);
        mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r.checked("sub");
    }
    friend BigReal operator*(const BigReal& a, const BigReal& b) {
        BigReal r = a.result_like(b);
        mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r.checked("mul");
    }
    friend BigReal operator/(const BigReal& a, const BigReal& b) {
        if (b.is_zero()) throw DomainError("division by zero");
        BigReal r = a.result_like(b);
        mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r.checked("div");
    }
    friend BigReal operator-(const BigReal& a) {
        BigReal r(a);
        mpfr_neg(r.v_, r.v_, MPFR_RNDN);
        return r;
    }
    BigReal& operator+=(const BigReal& b) { return *this = *this + b; }
    BigReal& operator-=(const BigReal& b) { return *this = *this - b; }
    BigReal& operator*=(const BigReal& b) { return *this = *this * b; }
    BigReal& operator/=(const BigReal& b) { return *this = *this / b; }

    friend bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator!=(const BigReal& a, const BigReal& b) { return !(a == b); }
    friend bool operator<(const BigReal& a, const BigReal& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const BigReal& a, const BigReal& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>(const BigReal& a, const BigReal& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const BigReal& a, const BigReal& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }

    friend BigReal abs(const BigReal& a) {
        BigReal r(a);
        mpfr_abs(r.v_, r.v_, MPFR_RNDN);
        return r;
    }

    friend BigReal pow_int(const BigReal& a, long n) {
        if (n < 0 && a.is_zero()) throw DomainError("zero to a negative power");
        BigReal r(a);
        mpfr_pow_si(r.v_, a.v_, n, MPFR_RNDN);
        return r.checked("pow");
    }

    /// p^(1/d), p > 0.
    friend BigReal nth_root(const BigReal& a, unsigned long d) {
        if (a.sign() < 0) throw DomainError("root of a negative value");
        BigReal r(a);
        mpfr_rootn_ui(r.v_, a.v_, d, MPFR_RNDN);
        return r;
    }

    friend BigReal pow(const BigReal& a, const BigReal& b) {
        BigReal r = a.result_like(b);
        mpfr_pow(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r.checked("pow");
    }

    friend BigReal exp(const BigReal& a) {
        BigReal r(a);
        mpfr_exp(r.v_, a.v_, MPFR_RNDN);
        return r.checked("exp");
    }
    friend BigReal sin(const BigReal& a) {
        BigReal r(a);
        mpfr_sin(r.v_, a.v_, MPFR_RNDN);
        return r.checked("sin");
    }
    friend BigReal cos(const BigReal& a) {
        BigReal r(a);
        mpfr_cos(r.v_, a.v_, MPFR_RNDN);
        return r.checked("cos");
    }
    friend BigReal ln(const BigReal& a) {
        if (a.sign() <= 0) throw DomainError("ln of a nonpositive value");
        BigReal r(a);
        mpfr_log(r.v_, a.v_, MPFR_RNDN);
        return r;
    }

    /// Natural log of |a|, a != 0.  Used by COC estimation.
    friend BigReal ln_abs(const BigReal& a) {
        if (a.is_zero()) throw DomainError("ln of zero");
        return ln(abs(a));
    }

    /// floor(log10 |x|), x != 0, derived from the decimal digit string so it
    /// is consistent with format_scientific.
    friend long floor_log10(const BigReal& x) {
        if (x.is_zero()) throw DomainError("log10 of zero");
        mpfr_exp_t exp10 = 0;
        char* s = mpfr_get_str(nullptr, &exp10, 10, 4, x.v_, MPFR_RNDN);
        mpfr_free_str(s);
        return static_cast<long>(exp10) - 1; // get_str: value = 0.d1d2.. * 10^exp10
    }

    /// |a - b| measured in units in the last place of b; both finite, b != 0.
    friend double ulp_distance(const BigReal& a, const BigReal& b) {
        if (a == b) return 0.0;
        BigReal diff = abs(a - b);
        // ulp(b) = 2^(exp(b) - prec)
        mpfr_exp_t eb = mpfr_get_exp(b.v_);
        BigReal ulp(b.context());
        mpfr_set_ui_2exp(ulp.v_, 1, eb - mpfr_get_prec(b.v_), MPFR_RNDN);
        return (diff / ulp).to_double();
    }

    mpfr_srcptr raw() const { return v_; }
    mpfr_ptr raw() { return v_; }

  private:
    BigReal result_like(const BigReal& b) const {
        PrecisionContext ctx(std::max(precision_bits(), b.precision_bits()));
        return BigReal(ctx);
    }

    BigReal checked(const char* op) const {
        if (mpfr_nan_p(v_)) throw DomainError(std::string("non-finite result in ") + op);
        return *this;
    }

    mpfr_t v_;
};

enum class Elementary { Exp, Sin, Cos, Ln };

inline BigReal eval_elementary(Elementary fn, const BigReal& x) {
    if (!x.is_finite()) throw DomainError("non-finite argument");
    switch (fn) {
        case Elementary::Exp: return exp(x);
        case Elementary::Sin: return sin(x);
        case Elementary::Cos: return cos(x);
        case Elementary::Ln: return ln(x);
    }
    throw Error("unreachable");
}

/// Nearest representable value of a decimal literal at ctx precision.
inline BigReal parse_decimal(std::string_view text, const PrecisionContext& ctx) {
    static const std::regex grammar(R"([+-]?[0-9]+(\.[0-9]*)?([eE][+-]?[0-9]+)?)");
    if (!std::regex_match(text.begin(), text.end(), grammar))
        throw ParseError("malformed decimal literal '" + std::string(text) + "'", 0);
    BigReal r(ctx);
    mpfr_set_str(r.raw(), std::string(text).c_str(), 10, MPFR_RNDN);
    return r;
}

/// Round-to-nearest scientific form "d.dd...e±E".  Zero formats as "0".
/// Requests at or beyond the context's decimal digits switch to the minimal
/// digit count that round-trips exactly through parse_decimal.
inline std::string format_scientific(const BigReal& x, long sig_digits) {
    if (sig_digits < 1) throw Error("sig_digits must be >= 1");
    if (x.is_zero()) return "0";
    if (!x.is_finite()) throw DomainError("cannot format non-finite value");
    size_t n = static_cast<size_t>(sig_digits);
    if (sig_digits >= x.context().decimal_digits()) n = 0; // mpfr picks round-trip length
    mpfr_exp_t exp10 = 0;
    char* digits = mpfr_get_str(nullptr, &exp10, 10, n, x.raw(), MPFR_RNDN);
    std::string d(digits);
    mpfr_free_str(digits);
    std::string sign;
    if (d[0] == '-') {
        sign = "-";
        d.erase(0, 1);
    }
    // strip trailing zeros only in round-trip mode, keeping at least one digit
    if (n == 0)
        while (d.size() > 1 && d.back() == '0') d.pop_back();
    std::string mantissa = d.substr(0, 1);
    if (d.size() > 1) mantissa += "." + d.substr(1);
    long e = static_cast<long>(exp10) - 1;
    char buf[32];
    std::snprintf(buf, sizeof buf, "e%+ld", e);
    return sign + mantissa + buf;
}

} // namespace rootiter

#endif
