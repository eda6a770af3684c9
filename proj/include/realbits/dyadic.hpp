#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "realbits/error.hpp"

namespace realbits {

/// Exact scaled integer m * 2^e. Canonical form: m odd, or m = 0 with e = 0,
/// so equality is structural. Addition, subtraction and multiplication are
/// closed and exact; rounding happens only through round_to().
class Dyadic {
  public:
    Dyadic() : m_(0), e_(0) {}
    Dyadic(long v) : m_(v), e_(0) { canonicalize(); }
    explicit Dyadic(mpz_class m, std::int64_t e = 0) : m_(std::move(m)), e_(e) { canonicalize(); }

    const mpz_class& mantissa() const { return m_; }
    std::int64_t exponent() const { return e_; }
    bool is_zero() const { return m_ == 0; }
    int sign() const { return sgn(m_); }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a) { return Dyadic(-a.m_, a.e_); }
    Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
    Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
    Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

    friend Dyadic abs(const Dyadic& a) { return a.sign() < 0 ? -a : a; }

    /// Exact scaling by 2^k.
    Dyadic mul_pow2(std::int64_t k) const;

    /// Exact three-way comparison.
    static int cmp(const Dyadic& a, const Dyadic& b);
    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.m_ == b.m_ && a.e_ == b.e_;
    }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
        int c = cmp(a, b);
        return c < 0 ? std::strong_ordering::less
                     : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    /// Nearest multiple of 2^-n, ties to the even multiple.
    /// |round_to(n) - *this| <= 2^-(n+1).
    Dyadic round_to(std::int64_t n) const;

    /// Largest multiple of 2^-n that is <= *this (resp. smallest >=).
    Dyadic floor_to(std::int64_t n) const;
    Dyadic ceil_to(std::int64_t n) const;

    /// floor(*this * 2^n) as an integer.
    mpz_class floor_scaled(std::int64_t n) const;

    /// Smallest k with |*this| <= 2^k; 0 for zero.
    std::int64_t ceil_log2_abs() const;

    mpq_class to_rational() const;
    /// Exact conversion when q has a power-of-two denominator.
    static std::optional<Dyadic> from_rational(const mpq_class& q);

    /// Canonical text form "m*2^e".
    std::string str() const;
    /// Accepts "m", "m*2^e" and "p/q" with q a power of two.
    static Dyadic parse(std::string_view text);

    static Dyadic pow2(std::int64_t k) { return Dyadic(mpz_class(1), k); }

  private:
    void canonicalize();
    static void check_exponent(std::int64_t e);

    mpz_class m_;
    std::int64_t e_;
};

/// Reduced fraction with positive denominator; exact field arithmetic.
class ExactRational {
  public:
    ExactRational() : q_(0) {}
    ExactRational(long v) : q_(v) {}
    ExactRational(const mpz_class& num, const mpz_class& den);
    explicit ExactRational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
    ExactRational(const Dyadic& d) : q_(d.to_rational()) {}

    const mpq_class& value() const { return q_; }
    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }
    bool is_zero() const { return q_ == 0; }
    int sign() const { return sgn(q_); }

    friend ExactRational operator+(const ExactRational& a, const ExactRational& b) {
        return ExactRational(mpq_class(a.q_ + b.q_));
    }
    friend ExactRational operator-(const ExactRational& a, const ExactRational& b) {
        return ExactRational(mpq_class(a.q_ - b.q_));
    }
    friend ExactRational operator*(const ExactRational& a, const ExactRational& b) {
        return ExactRational(mpq_class(a.q_ * b.q_));
    }
    friend ExactRational operator/(const ExactRational& a, const ExactRational& b);
    friend ExactRational operator-(const ExactRational& a) { return ExactRational(mpq_class(-a.q_)); }

    static int cmp(const ExactRational& a, const ExactRational& b) {
        int c = ::cmp(a.q_, b.q_);
        return (c > 0) - (c < 0);
    }
    friend bool operator==(const ExactRational& a, const ExactRational& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const ExactRational& a, const ExactRational& b) {
        int c = cmp(a, b);
        return c < 0 ? std::strong_ordering::less
                     : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    friend ExactRational abs(const ExactRational& a) { return a.sign() < 0 ? -a : a; }

    /// Nearest multiple of 2^-n, ties to even.
    Dyadic round_to_dyadic(std::int64_t n) const;
    std::optional<Dyadic> to_dyadic() const { return Dyadic::from_rational(q_); }

    /// Text form "p/q" (always with an explicit denominator).
    std::string str() const;
    /// Accepts "p", "p/q", and dyadic "m*2^e" text.
    static ExactRational parse(std::string_view text);

  private:
    mpq_class q_;
};

/// Parses either form; returns a rational (dyadics embed).
ExactRational parse_number(std::string_view text);

}  // namespace realbits
