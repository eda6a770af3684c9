#include "realbits/creal.hpp"

#include <map>
#include <mutex>

#include "realbits/error.hpp"

namespace realbits {

namespace detail {

class CRealImpl {
  public:
    virtual ~CRealImpl() = default;

    Dyadic query(std::int64_t n) const {
        if (n > kMaxPrecision) throw PrecisionOverflow(n);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = memo_.find(n);
            if (it != memo_.end()) return it->second;
        }
        Dyadic d = compute(n);
        std::lock_guard<std::mutex> lock(mu_);
        // First writer wins; compute() is deterministic so either copy is the
        // same value, but never replacing keeps that property self-evident.
        auto [it, inserted] = memo_.emplace(n, std::move(d));
        return it->second;
    }

  protected:
    virtual Dyadic compute(std::int64_t n) const = 0;

  private:
    mutable std::mutex mu_;
    mutable std::map<std::int64_t, Dyadic> memo_;
};

namespace {

using Ptr = std::shared_ptr<const CRealImpl>;

class ConstImpl final : public CRealImpl {
  public:
    explicit ConstImpl(Dyadic d) : d_(std::move(d)) {}
    Dyadic compute(std::int64_t) const override { return d_; }

  private:
    Dyadic d_;
};

class SumImpl final : public CRealImpl {
  public:
    SumImpl(Ptr x, Ptr y, bool sub) : x_(std::move(x)), y_(std::move(y)), sub_(sub) {}
    Dyadic compute(std::int64_t n) const override {
        Dyadic a = x_->query(n + 1), b = y_->query(n + 1);
        return sub_ ? a - b : a + b;
    }

  private:
    Ptr x_, y_;
    bool sub_;
};

class NegImpl final : public CRealImpl {
  public:
    explicit NegImpl(Ptr x) : x_(std::move(x)) {}
    Dyadic compute(std::int64_t n) const override { return -x_->query(n); }

  private:
    Ptr x_;
};

class AbsImpl final : public CRealImpl {
  public:
    explicit AbsImpl(Ptr x) : x_(std::move(x)) {}
    Dyadic compute(std::int64_t n) const override { return abs(x_->query(n)); }

  private:
    Ptr x_;
};

class MinMaxImpl final : public CRealImpl {
  public:
    MinMaxImpl(Ptr x, Ptr y, bool is_max) : x_(std::move(x)), y_(std::move(y)), max_(is_max) {}
    Dyadic compute(std::int64_t n) const override {
        Dyadic a = x_->query(n), b = y_->query(n);
        return max_ ? std::max(a, b) : std::min(a, b);
    }

  private:
    Ptr x_, y_;
    bool max_;
};

class ScaleImpl final : public CRealImpl {
  public:
    ScaleImpl(Ptr x, std::int64_t k) : x_(std::move(x)), k_(k) {}
    Dyadic compute(std::int64_t n) const override { return x_->query(n + k_).mul_pow2(k_); }

  private:
    Ptr x_;
    std::int64_t k_;
};

// Smallest b with |x| <= 2^b, from the precision-0 answer.
std::int64_t magnitude_exponent(const CRealImpl& x) {
    Dyadic a = abs(x.query(0)) + Dyadic(1);
    return a.ceil_log2_abs();
}

class MulImpl final : public CRealImpl {
  public:
    MulImpl(Ptr x, Ptr y) : x_(std::move(x)), y_(std::move(y)) {}
    Dyadic compute(std::int64_t n) const override {
        std::int64_t bx = bound(bx_, *x_), by = bound(by_, *y_);
        // |xy - dx dy| <= |x||y - dy| + |dy||x - dx|
        //             <= 2^bx 2^-(n+bx+2) + 2^(by+1) 2^-(n+by+3) <= 2^-(n+1)
        Dyadic dx = x_->query(n + by + 3), dy = y_->query(n + bx + 2);
        return (dx * dy).round_to(n + 3);
    }

  private:
    std::int64_t bound(std::optional<std::int64_t>& slot, const CRealImpl& v) const {
        std::lock_guard<std::mutex> lock(bmu_);
        if (!slot) slot = magnitude_exponent(v);
        return *slot;
    }

    Ptr x_, y_;
    mutable std::mutex bmu_;
    mutable std::optional<std::int64_t> bx_, by_;
};

// Certifies |y| >= 2^ell by querying y at doubling precision.
std::int64_t divisor_witness(const CRealImpl& y) {
    std::int64_t k = 1;
    for (int fuel = 0; fuel < 64 && k <= kMaxPrecision; ++fuel, k *= 2) {
        Dyadic d = y.query(k);
        if (abs(d) > Dyadic::pow2(-k).mul_pow2(1)) {
            // |y| >= |d| - 2^-k > 2^-k
            Dyadic lower = abs(d) - Dyadic::pow2(-k);
            std::int64_t ell = lower.ceil_log2_abs();
            if (Dyadic::pow2(ell) > lower) --ell;  // 2^ell <= lower
            return ell;
        }
    }
    throw ZeroDivisorUndetected();
}

class DivImpl final : public CRealImpl {
  public:
    DivImpl(Ptr x, Ptr y) : x_(std::move(x)), y_(std::move(y)) {}
    Dyadic compute(std::int64_t n) const override {
        std::int64_t ell = witness();
        std::int64_t bx;
        {
            std::lock_guard<std::mutex> lock(bmu_);
            if (!bx_) bx_ = magnitude_exponent(*x_);
            bx = *bx_;
        }
        std::int64_t qx = n - ell + 3;
        std::int64_t qy = std::max(n + bx - 2 * ell + 4, -ell + 4);
        Dyadic dx = x_->query(qx), dy = y_->query(qy);
        if (dy.is_zero()) throw ZeroDivisorUndetected();  // cannot happen with a valid witness
        ExactRational r = ExactRational(dx) / ExactRational(dy);
        return r.round_to_dyadic(n + 2);
    }

  private:
    std::int64_t witness() const {
        std::lock_guard<std::mutex> lock(bmu_);
        if (!ell_) ell_ = divisor_witness(*y_);
        return *ell_;
    }

    Ptr x_, y_;
    mutable std::mutex bmu_;
    mutable std::optional<std::int64_t> ell_, bx_;
};

class ExpImpl final : public CRealImpl {
  public:
    explicit ExpImpl(Ptr x) : x_(std::move(x)) {}
    Dyadic compute(std::int64_t n) const override {
        Dyadic dx = x_->query(n + 30);
        if (abs(dx) > Dyadic(65) * Dyadic::pow2(-2))  // 16.25
            throw RangeExceeded("exp argument must satisfy |x| <= 16");
        // |e^x - e^dx| <= e^17 |x - dx| <= 2^25 2^-(n+30) = 2^-(n+5)
        return exp_dyadic(dx, n + 2);
    }

  private:
    Ptr x_;
};

class SqrtImpl final : public CRealImpl {
  public:
    explicit SqrtImpl(Ptr x) : x_(std::move(x)) {}
    Dyadic compute(std::int64_t n) const override {
        std::int64_t m = 2 * (n + 3);
        Dyadic dx = x_->query(m);
        if (dx < -Dyadic::pow2(-m)) throw NegativeOperandDetected();
        if (dx.sign() <= 0) return Dyadic();  // |x| <= 2 * 2^-m, sqrt <= 2^-(n+2)
        // |sqrt(dx) - sqrt(x)| <= sqrt(|dx - x|) <= 2^-(n+3)
        return sqrt_dyadic_floor(dx, n + 3);
    }

  private:
    Ptr x_;
};

}  // namespace
}  // namespace detail

using detail::CRealImpl;

CReal::CReal() : impl_(std::make_shared<detail::ConstImpl>(Dyadic())) {}

Dyadic CReal::approx(std::int64_t n) const { return impl_->query(n); }

CReal CReal::constant(Dyadic d) {
    return CReal(std::make_shared<detail::ConstImpl>(std::move(d)));
}

CReal operator+(const CReal& x, const CReal& y) {
    return CReal(std::make_shared<detail::SumImpl>(x.impl_, y.impl_, false));
}
CReal operator-(const CReal& x, const CReal& y) {
    return CReal(std::make_shared<detail::SumImpl>(x.impl_, y.impl_, true));
}
CReal operator*(const CReal& x, const CReal& y) {
    return CReal(std::make_shared<detail::MulImpl>(x.impl_, y.impl_));
}
CReal operator-(const CReal& x) { return CReal(std::make_shared<detail::NegImpl>(x.impl_)); }
CReal abs(const CReal& x) { return CReal(std::make_shared<detail::AbsImpl>(x.impl_)); }
CReal min(const CReal& x, const CReal& y) {
    return CReal(std::make_shared<detail::MinMaxImpl>(x.impl_, y.impl_, false));
}
CReal max(const CReal& x, const CReal& y) {
    return CReal(std::make_shared<detail::MinMaxImpl>(x.impl_, y.impl_, true));
}

CReal CReal::mul_pow2(std::int64_t k) const {
    return CReal(std::make_shared<detail::ScaleImpl>(impl_, k));
}

CReal CReal::div(const CReal& x, const CReal& y) {
    return CReal(std::make_shared<detail::DivImpl>(x.impl_, y.impl_));
}

CReal CReal::exp(const CReal& x) { return CReal(std::make_shared<detail::ExpImpl>(x.impl_)); }

CReal CReal::sqrt(const CReal& x) { return CReal(std::make_shared<detail::SqrtImpl>(x.impl_)); }

CReal CReal::sqrt2() { return sqrt(constant(2)); }

CReal CReal::e() { return exp(constant(1)); }

SoftOrder soft_compare(const CReal& x, const CReal& y, std::int64_t n) {
    Dyadic dx = x.approx(n + 3), dy = y.approx(n + 3);
    Dyadic gap = dx - dy;
    // |dx - dy| <= (3/4) 2^-n forces |x - y| <= 2^-n; otherwise the sign of
    // the gap survives the two 2^-(n+3) query errors.
    if (abs(gap) <= Dyadic(3).mul_pow2(-(n + 2))) return SoftOrder::Indistinguishable;
    return gap.sign() < 0 ? SoftOrder::Less : SoftOrder::Greater;
}

Dyadic exp_dyadic(const Dyadic& d, std::int64_t q) {
    if (abs(d) > Dyadic(70).mul_pow2(-2))  // 17.5
        throw RangeExceeded("exp core argument too large");
    if (d.is_zero()) return Dyadic(1);
    // Halve into |t| <= 1/2, run the series in plain integers (no rational
    // canonicalization), square back up, round once at the end.
    std::int64_t k = std::max<std::int64_t>(0, d.ceil_log2_abs() + 1);
    Dyadic t = d.mul_pow2(-k);
    // Amplification through k <= 5 exact squarings is at most
    // 2^k e^|d| < 2^31; target |S - e^t| <= 2^-m with m = q + 36.
    std::int64_t m = q + 36;

    // t = a * 2^-s with s >= 1; term_i = a^i / (2^(s i) i!). Using the shared
    // denominator 2^(s N) N!:  NUM_N = NUM_{N-1} * (N 2^s) + a^N.
    std::int64_t s = std::max<std::int64_t>(1, -t.exponent());
    mpz_class a = t.mantissa() << static_cast<unsigned>(t.exponent() + s);
    mpz_class num = 1, apow = 1, fact = 1;
    int terms = 0;
    // |t|^(i+1)/(i+1)! <= 2^-(m+2) makes the tail < 2^-(m+1)
    for (int i = 1;; ++i) {
        apow *= a;
        num = num * (mpz_class(i) << static_cast<unsigned>(s)) + apow;
        fact *= i;
        ++terms;
        // tail bound, scaled: |a|^(i+1) * 2^(m+2) <= 2^(s(i+1)) (i+1)!
        mpz_class lhs = abs(apow * a) << static_cast<unsigned>(m + 2);
        mpz_class rhs = (fact * (i + 1)) << static_cast<unsigned>(s * (i + 1));
        if (lhs <= rhs) break;
        if (i > 4 * static_cast<int>(m) + 64) throw Error("exp series failed to converge");
    }
    // S = num / den with den = 2^(s terms) terms!
    mpz_class den = fact << static_cast<unsigned>(s * terms);
    for (std::int64_t i = 0; i < k; ++i) {
        num *= num;
        den *= den;
    }
    return ExactRational(num, den).round_to_dyadic(q + 1);
}

Dyadic sqrt_dyadic_floor(const Dyadic& d, std::int64_t q) {
    if (d.sign() < 0) throw NegativeOperandDetected();
    if (d.is_zero()) return Dyadic();
    mpz_class scaled = d.floor_scaled(2 * q);
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
    return Dyadic(std::move(root), -q);
}

}  // namespace realbits
