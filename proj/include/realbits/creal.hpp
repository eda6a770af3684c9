#pragma once

#include <cstdint>
#include <memory>

#include "realbits/dyadic.hpp"

namespace realbits {

/// Queries above this working precision are refused.
constexpr std::int64_t kMaxPrecision = std::int64_t(1) << 20;

namespace detail {
class CRealImpl;
}

/// A computable real: approx(n) returns a dyadic within 2^-n of the
/// represented value. Answers are memoized per precision and never replaced,
/// so a query at a given precision is deterministic across the lifetime of
/// the value and safe to issue from concurrent tasks.
class CReal {
  public:
    CReal();  // zero

    /// |approx(n) - x| <= 2^-n. Negative n is a weaker promise and is allowed.
    Dyadic approx(std::int64_t n) const;

    static CReal constant(Dyadic d);
    static CReal constant(long v) { return constant(Dyadic(v)); }

    friend CReal operator+(const CReal& x, const CReal& y);
    friend CReal operator-(const CReal& x, const CReal& y);
    friend CReal operator*(const CReal& x, const CReal& y);
    friend CReal operator-(const CReal& x);
    friend CReal abs(const CReal& x);
    friend CReal min(const CReal& x, const CReal& y);
    friend CReal max(const CReal& x, const CReal& y);

    /// Exact scaling by 2^k.
    CReal mul_pow2(std::int64_t k) const;

    /// Division; certifies the divisor nonzero by a doubling precision
    /// search, throws ZeroDivisorUndetected when the budget runs out.
    static CReal div(const CReal& x, const CReal& y);

    /// e^x for |x| <= 16; Taylor series after halving into |t| <= 1/2,
    /// squared back up. Throws RangeExceeded.
    static CReal exp(const CReal& x);

    /// sqrt(x) for x >= 0 by construction; throws NegativeOperandDetected
    /// from approx() if some query certifies x < 0.
    static CReal sqrt(const CReal& x);

    static CReal sqrt2();
    static CReal e();

  private:
    explicit CReal(std::shared_ptr<const detail::CRealImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const detail::CRealImpl> impl_;
};

enum class SoftOrder { Less, Greater, Indistinguishable };

/// Sign test at resolution 2^-n. A strict answer is always truthful;
/// Indistinguishable guarantees |x - y| <= 2^-n.
SoftOrder soft_compare(const CReal& x, const CReal& y, std::int64_t n);

/// |result - e^d| <= 2^-q for |d| <= 17.5; exact rational series inside.
Dyadic exp_dyadic(const Dyadic& d, std::int64_t q);

/// floor(sqrt(d) * 2^q) / 2^q for d >= 0; within 2^-q below sqrt(d).
Dyadic sqrt_dyadic_floor(const Dyadic& d, std::int64_t q);

}  // namespace realbits
