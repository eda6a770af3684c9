#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace realbits {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text-level failures; position is a byte offset for expressions and a
// line/column pair for assembly files.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line, std::size_t col)
        : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
          line(line), col(col) {}
    explicit ParseError(const std::string& msg, std::size_t offset = 0)
        : Error(msg + " at offset " + std::to_string(offset)), line(0), col(offset) {}
    std::size_t line;
    std::size_t col;
};

struct DivisionByZero : Error {
    DivisionByZero() : Error("division by zero") {}
};
struct ExponentOverflow : Error {
    ExponentOverflow() : Error("dyadic exponent out of range") {}
};
struct PrecisionOverflow : Error {
    explicit PrecisionOverflow(long p)
        : Error("working precision " + std::to_string(p) + " exceeds budget") {}
};
struct ZeroDivisorUndetected : Error {
    ZeroDivisorUndetected() : Error("no sign witness for divisor within fuel") {}
};
struct NegativeOperandDetected : Error {
    NegativeOperandDetected() : Error("sqrt operand certified negative") {}
};
struct RangeExceeded : Error {
    explicit RangeExceeded(const std::string& what) : Error("argument outside supported range: " + what) {}
};
struct DomainViolation : Error {
    explicit DomainViolation(const std::string& what) : Error("domain violation: " + what) {}
};
struct DimensionMismatch : Error {
    DimensionMismatch() : Error("dimension mismatch") {}
};
struct NonInvertibleMap : Error {
    explicit NonInvertibleMap(const std::string& what) : Error("affine map rejected: " + what) {}
};
struct DepthOverflow : Error {
    DepthOverflow() : Error("attractor refinement depth exceeds fuel") {}
};
struct EmptyCloud : Error {
    EmptyCloud() : Error("oracle produced an empty cloud (contract violation upstream)") {}
};
struct EmptyResult : Error {
    EmptyResult() : Error("graph slice empty (contract violation upstream)") {}
};
struct ViewportEmpty : Error {
    ViewportEmpty() : Error("viewport has no pixels") {}
};
struct NotStablyConvergent : Error {
    NotStablyConvergent() : Error("outcomes did not stabilize before max precision") {}
};
struct FuelExhausted : Error {
    FuelExhausted() : Error("step budget exhausted") {}
};
struct VmError : Error {
    using Error::Error;
};

}  // namespace realbits
