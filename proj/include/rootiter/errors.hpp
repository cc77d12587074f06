#ifndef ROOTITER_ERRORS_HPP
#define ROOTITER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rootiter {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation left the function's domain (ln of a nonpositive value,
// division by exact zero, non-finite intermediate).
struct DomainError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " at offset " + std::to_string(offset)), offset(offset) {}
    std::size_t offset;
};

struct SyntaxError : ParseError {
    using ParseError::ParseError;
};

struct UnknownIdentifier : ParseError {
    using ParseError::ParseError;
};

struct UnknownMethod : Error {
    using Error::Error;
};

// Divided-difference nodes collapsed below the resolvable spacing.
struct DegenerateNodes : Error {
    using Error::Error;
};

// A step denominator vanished (f'(x), a divided-difference combination,
// or a weight denominator).
struct SingularStep : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

struct MultipleRootSuspected : Error {
    using Error::Error;
};

// Symbolic engine: a series division whose denominator is the zero series.
struct NonInvertibleLeadingCoefficient : Error {
    using Error::Error;
};

struct TruncationTooLow : Error {
    using Error::Error;
};

} // namespace rootiter

#endif
