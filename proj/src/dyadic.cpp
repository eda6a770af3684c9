#include "realbits/dyadic.hpp"

#include <cctype>
#include <cstdlib>

namespace realbits {

namespace {

// Exponents stay well inside int64 so sums of two exponents cannot wrap.
constexpr std::int64_t kExpLimit = std::int64_t(1) << 44;
// Aligning two dyadics shifts one mantissa by the exponent gap; cap the gap
// so a single addition cannot allocate unbounded memory.
constexpr std::int64_t kShiftLimit = std::int64_t(1) << 26;

std::int64_t checked_shift(std::int64_t gap) {
    if (gap > kShiftLimit) throw ExponentOverflow();
    return gap;
}

mpz_class shifted(const mpz_class& m, std::int64_t k) {
    if (k == 0) return m;
    mpz_class r;
    mpz_mul_2exp(r.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    return r;
}

}  // namespace

void Dyadic::check_exponent(std::int64_t e) {
    if (e > kExpLimit || e < -kExpLimit) throw ExponentOverflow();
}

void Dyadic::canonicalize() {
    if (m_ == 0) {
        e_ = 0;
        return;
    }
    mp_bitcnt_t tz = mpz_scan1(m_.get_mpz_t(), 0);
    if (tz > 0) {
        mpz_fdiv_q_2exp(m_.get_mpz_t(), m_.get_mpz_t(), tz);
        e_ += static_cast<std::int64_t>(tz);
    }
    check_exponent(e_);
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    std::int64_t e = std::min(a.e_, b.e_);
    mpz_class m = shifted(a.m_, checked_shift(a.e_ - e)) + shifted(b.m_, checked_shift(b.e_ - e));
    return Dyadic(std::move(m), e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero() || b.is_zero()) return Dyadic();
    return Dyadic(mpz_class(a.m_ * b.m_), a.e_ + b.e_);
}

Dyadic Dyadic::mul_pow2(std::int64_t k) const {
    if (is_zero()) return Dyadic();
    return Dyadic(m_, e_ + k);
}

int Dyadic::cmp(const Dyadic& a, const Dyadic& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    // Same nonzero sign: prefilter on leading-bit positions before aligning.
    std::int64_t la = a.e_ + static_cast<std::int64_t>(mpz_sizeinbase(a.m_.get_mpz_t(), 2));
    std::int64_t lb = b.e_ + static_cast<std::int64_t>(mpz_sizeinbase(b.m_.get_mpz_t(), 2));
    if (la != lb) {
        int mag = la < lb ? -1 : 1;
        return sa > 0 ? mag : -mag;
    }
    std::int64_t e = std::min(a.e_, b.e_);
    mpz_class ma = shifted(a.m_, checked_shift(a.e_ - e));
    mpz_class mb = shifted(b.m_, checked_shift(b.e_ - e));
    return ::cmp(ma, mb) < 0 ? -1 : (ma == mb ? 0 : 1);
}

Dyadic Dyadic::round_to(std::int64_t n) const {
    if (is_zero()) return Dyadic();
    std::int64_t shift = -(e_ + n);
    if (shift <= 0) return *this;  // already a multiple of 2^-n
    checked_shift(shift);
    mpz_class q, r;
    mpz_fdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    // r = m - q*2^shift in [0, 2^shift)
    mpz_fdiv_r_2exp(r.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    mpz_class half = shifted(mpz_class(1), shift - 1);
    int c = ::cmp(r, half);
    if (c > 0 || (c == 0 && mpz_odd_p(q.get_mpz_t()))) q += 1;
    return Dyadic(std::move(q), -n);
}

Dyadic Dyadic::floor_to(std::int64_t n) const {
    if (is_zero()) return Dyadic();
    std::int64_t shift = -(e_ + n);
    if (shift <= 0) return *this;
    checked_shift(shift);
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    return Dyadic(std::move(q), -n);
}

Dyadic Dyadic::ceil_to(std::int64_t n) const {
    if (is_zero()) return Dyadic();
    std::int64_t shift = -(e_ + n);
    if (shift <= 0) return *this;
    checked_shift(shift);
    mpz_class q;
    mpz_cdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    return Dyadic(std::move(q), -n);
}

mpz_class Dyadic::floor_scaled(std::int64_t n) const {
    if (is_zero()) return 0;
    std::int64_t k = e_ + n;
    if (k >= 0) return shifted(m_, checked_shift(k));
    checked_shift(-k);
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), m_.get_mpz_t(), static_cast<mp_bitcnt_t>(-k));
    return q;
}

std::int64_t Dyadic::ceil_log2_abs() const {
    if (is_zero()) return 0;
    std::int64_t bits = static_cast<std::int64_t>(mpz_sizeinbase(m_.get_mpz_t(), 2));
    std::int64_t k = e_ + bits;  // 2^(k-1) <= |x| < 2^k
    // |x| == 2^(k-1) exactly iff mantissa is +-1 (canonical form).
    if (mpz_cmpabs_ui(m_.get_mpz_t(), 1) == 0) return k - 1;
    return k;
}

mpq_class Dyadic::to_rational() const {
    mpq_class q(m_);
    if (e_ >= 0) {
        mpz_class num = shifted(m_, checked_shift(e_));
        return mpq_class(num);
    }
    mpq_class r(m_, shifted(mpz_class(1), checked_shift(-e_)));
    r.canonicalize();
    return r;
}

std::optional<Dyadic> Dyadic::from_rational(const mpq_class& q) {
    mpz_class den = q.get_den();
    if (den == 1) return Dyadic(q.get_num(), 0);
    // canonical mpq: den > 0, gcd(num, den) = 1; power of two iff one bit set.
    if (mpz_popcount(den.get_mpz_t()) != 1) return std::nullopt;
    auto k = static_cast<std::int64_t>(mpz_scan1(den.get_mpz_t(), 0));
    return Dyadic(q.get_num(), -k);
}

std::string Dyadic::str() const {
    return m_.get_str() + "*2^" + std::to_string(e_);
}

namespace {

struct NumCursor {
    std::string_view s;
    std::size_t pos = 0;

    bool done() const { return pos >= s.size(); }
    char peek() const { return done() ? '\0' : s[pos]; }

    mpz_class integer() {
        std::size_t start = pos;
        if (peek() == '-' || peek() == '+') ++pos;
        std::size_t digits = pos;
        while (!done() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == digits) throw ParseError("expected integer", start);
        return mpz_class(std::string(s.substr(start, pos - start)), 10);
    }
};

}  // namespace

Dyadic Dyadic::parse(std::string_view text) {
    NumCursor c{text};
    mpz_class m = c.integer();
    if (c.done()) return Dyadic(std::move(m), 0);
    if (c.peek() == '*') {
        ++c.pos;
        if (text.substr(c.pos, 2) != "2^") throw ParseError("expected 2^ after *", c.pos);
        c.pos += 2;
        mpz_class e = c.integer();
        if (!c.done()) throw ParseError("trailing characters in dyadic", c.pos);
        if (!e.fits_slong_p()) throw ExponentOverflow();
        return Dyadic(std::move(m), e.get_si());
    }
    if (c.peek() == '/') {
        ++c.pos;
        mpz_class q = c.integer();
        if (!c.done()) throw ParseError("trailing characters in dyadic", c.pos);
        if (q <= 0) throw ParseError("denominator must be positive", 0);
        if (mpz_popcount(q.get_mpz_t()) != 1)
            throw ParseError("denominator must be a power of two", 0);
        auto k = static_cast<std::int64_t>(mpz_scan1(q.get_mpz_t(), 0));
        return Dyadic(std::move(m), -k);
    }
    throw ParseError("trailing characters in dyadic", c.pos);
}

ExactRational::ExactRational(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw DivisionByZero();
    q_ = mpq_class(num, den);
    q_.canonicalize();
}

ExactRational operator/(const ExactRational& a, const ExactRational& b) {
    if (b.is_zero()) throw DivisionByZero();
    return ExactRational(mpq_class(a.q_ / b.q_));
}

Dyadic ExactRational::round_to_dyadic(std::int64_t n) const {
    // Nearest multiple q of 2^-n to p: q = round(p * 2^n), ties to even.
    mpz_class num = numerator(), den = denominator();
    if (n >= 0) {
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(n));
    } else {
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-n));
    }
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    // compare remainder r/den with 1/2: 2r vs den
    mpz_class twice = r * 2;
    int c = ::cmp(twice, den);
    if (c > 0 || (c == 0 && mpz_odd_p(q.get_mpz_t()))) q += 1;
    return Dyadic(std::move(q), -n);
}

std::string ExactRational::str() const {
    return numerator().get_str() + "/" + denominator().get_str();
}

ExactRational ExactRational::parse(std::string_view text) {
    NumCursor c{text};
    mpz_class num = c.integer();
    if (c.done()) return ExactRational(num, 1);
    if (c.peek() == '/') {
        ++c.pos;
        mpz_class den = c.integer();
        if (!c.done()) throw ParseError("trailing characters in rational", c.pos);
        if (den <= 0) throw ParseError("denominator must be positive", 0);
        return ExactRational(num, den);
    }
    if (c.peek() == '*') return ExactRational(Dyadic::parse(text));
    throw ParseError("trailing characters in rational", c.pos);
}

ExactRational parse_number(std::string_view text) { return ExactRational::parse(text); }

}  // namespace realbits
