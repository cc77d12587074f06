#ifndef ROOTITER_DIAGNOSTICS_HPP
#define ROOTITER_DIAGNOSTICS_HPP

#include <optional>
#include <string>

#include "rootiter/bigreal.hpp"
#include "rootiter/schemes.hpp"

namespace rootiter {

/// Computational order of convergence from the last three iterates:
/// ln|e2/e1| / ln|e1/e0|.  Unavailable estimates map to nullopt ("X").
inline std::optional<double> coc(const IterationTrace& trace, const BigReal& alpha) {
    if (trace.status != RunStatus::Converged && trace.status != RunStatus::BudgetExhausted)
        return std::nullopt;
    size_t n = trace.iterates.size();
    if (n < 3) return std::nullopt;
    BigReal e0 = abs(trace.iterates[n - 3] - alpha);
    BigReal e1 = abs(trace.iterates[n - 2] - alpha);
    BigReal e2 = abs(trace.iterates[n - 1] - alpha);
    if (e0.is_zero() || e1.is_zero() || e2.is_zero()) return std::nullopt;
    BigReal den = ln_abs(e1 / e0);
    if (den.is_zero()) return std::nullopt;
    return (ln_abs(e2 / e1) / den).to_double();
}

/// p^(1/d), Ostrowski-Traub efficiency index.
inline BigReal efficiency_index(int p, int d, const PrecisionContext& ctx) {
    if (p < 1 || d < 1) throw Error("efficiency index needs p >= 1, d >= 1");
    return nth_root(BigReal(p, ctx), static_cast<unsigned long>(d));
}

/// Kung-Traub optimum 2^(n/(n+1)) for n+1 evaluations.
inline BigReal optimal_efficiency(int n, const PrecisionContext& ctx) {
    if (n < 1) throw Error("optimal efficiency needs n >= 1");
    return nth_root(pow_int(BigReal(2, ctx), n), static_cast<unsigned long>(n + 1));
}

struct RunReport {
    std::string method;
    std::string function_id;
    std::optional<BigReal> x0;
    std::optional<BigReal> final_abs_error;
    std::optional<long> error_exponent; // floor(log10 |error|)
    bool error_underflow = false;       // iterate equals alpha to all digits
    std::optional<double> coc;
    RunStatus status = RunStatus::DomainError;
    long tnfe_used = 0;

    /// A run counts as non-convergent when it failed outright or stalled
    /// with a final error that is not even modestly small.
    bool failed() const {
        if (status == RunStatus::Divergent || status == RunStatus::DegenerateStep ||
            status == RunStatus::DomainError)
            return true;
        if (error_underflow) return false;
        return !error_exponent || *error_exponent > -10;
    }
};

inline RunReport classify(const IterationTrace& trace, const BigReal& alpha,
                          const std::string& method, const std::string& function_id) {
    RunReport r;
    r.method = method;
    r.function_id = function_id;
    r.status = trace.status;
    r.tnfe_used = trace.tnfe_used;
    if (trace.iterates.empty()) return r;
    r.x0 = trace.iterates.front();
    BigReal err = abs(trace.iterates.back() - alpha);
    r.final_abs_error = err;
    long digits = alpha.context().decimal_digits();
    if (err.is_zero()) {
        r.error_underflow = true;
    } else {
        long e = floor_log10(err);
        if (e < -(digits - 10))
            r.error_underflow = true; // below trustworthy digits
        else
            r.error_exponent = e;
    }
    r.coc = coc(trace, alpha);
    return r;
}

/// Table-cell rendering: "dgt" for divergence, "X" for unavailable COC.
inline std::string render_error_cell(const RunReport& r) {
    if (r.status == RunStatus::Divergent) return "dgt";
    if (r.status == RunStatus::DegenerateStep || r.status == RunStatus::DomainError) return "X";
    if (r.error_underflow) return "0";
    if (!r.error_exponent) return "X";
    return "1e" + std::to_string(*r.error_exponent);
}

inline std::string render_coc_cell(const RunReport& r) {
    if (!r.coc) return "X";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *r.coc);
    return buf;
}

} // namespace rootiter

#endif
