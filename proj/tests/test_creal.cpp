#include <doctest.h>
#include <gmpxx.h>

#include <future>
#include <random>
#include <vector>

#include "realbits/creal.hpp"
#include "realbits/error.hpp"

using namespace realbits;

namespace {

// Oracle: sqrt(v) by plain dyadic bisection, |result - sqrt(v)| <= 2^-q.
Dyadic bisect_sqrt(const Dyadic& v, std::int64_t q) {
    REQUIRE(v.sign() >= 0);
    Dyadic lo(0), hi = std::max(Dyadic(1), v);
    for (std::int64_t i = 0; i < q + hi.ceil_log2_abs() + 2; ++i) {
        Dyadic mid = (lo + hi).mul_pow2(-1);
        if (mid * mid <= v)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// Oracle: e^v for rational v with |v| <= 1 by exact partial sums; the
// factorial tail bound picks the term count.
ExactRational series_exp(const ExactRational& v, std::int64_t q) {
    ExactRational sum(1), term(1);
    for (int i = 1;; ++i) {
        term = term * v / ExactRational(i);
        sum = sum + term;
        ExactRational bound = abs(term) * ExactRational(3);
        if (ExactRational::cmp(bound, ExactRational(Dyadic::pow2(-q - 1))) <= 0) break;
        REQUIRE(i < 10000);
    }
    return sum;
}

Dyadic tol(std::int64_t n) { return Dyadic::pow2(-n); }

}  // namespace

TEST_CASE("constants answer exactly") {
    Dyadic c = Dyadic::parse("3*2^-2");
    CReal x = CReal::constant(c);
    for (std::int64_t n : {0, 1, 7, 30}) CHECK(x.approx(n) == c);
}

TEST_CASE("sqrt2 example bound") {
    Dyadic d = CReal::sqrt2().approx(4);
    // |d^2 - 2| <= 3 * 2^-4 follows from |d - sqrt2| <= 2^-4, |d + sqrt2| <= 3
    CHECK(abs(d * d - Dyadic(2)) <= Dyadic(3).mul_pow2(-4));
}

TEST_CASE("e partial-sum example") {
    Dyadic d = CReal::e().approx(20);
    ExactRational sum(1), term(1);
    for (int i = 1; i <= 25; ++i) {
        term = term * ExactRational(1, i);
        sum = sum + term;
    }
    ExactRational err = abs(ExactRational(d) - sum);
    ExactRational budget = ExactRational(Dyadic::pow2(-20)) + ExactRational(Dyadic::pow2(-25));
    CHECK(ExactRational::cmp(err, budget) <= 0);
}

TEST_CASE("combine budgets") {
    // add: exact on dyadic constants
    CReal a = CReal::constant(Dyadic::parse("5/8")), b = CReal::constant(Dyadic::parse("-3/16"));
    CHECK((a + b).approx(10) == Dyadic::parse("7/16"));

    // mul of const(2) and sqrt2 at n = 10 vs high-precision bisection
    Dyadic d = (CReal::constant(2) * CReal::sqrt2()).approx(10);
    Dyadic oracle = bisect_sqrt(Dyadic(8), 42);
    CHECK(abs(d - oracle) <= tol(10) + tol(40));

    // div(1, 3/4) at n = 8 is within 2^-8 of 4/3
    Dyadic q = CReal::div(CReal::constant(1), CReal::constant(Dyadic::parse("3/4"))).approx(8);
    CHECK(ExactRational::cmp(abs(ExactRational(q) - ExactRational(4, 3)),
                             ExactRational(tol(8))) <= 0);

    // min/max/abs/neg
    CHECK(min(a, b).approx(12) == Dyadic::parse("-3/16"));
    CHECK(max(a, b).approx(12) == Dyadic::parse("5/8"));
    CHECK(abs(b).approx(12) == Dyadic::parse("3/16"));
    CHECK((-a).approx(12) == Dyadic::parse("-5/8"));
}

TEST_CASE("exp examples") {
    for (std::int64_t n : {2, 8, 16}) CHECK(abs(CReal::exp(CReal()).approx(n) - Dyadic(1)) <= tol(n));

    Dyadic d = CReal::e().approx(16);
    ExactRational oracle = series_exp(ExactRational(1), 48);
    CHECK(ExactRational::cmp(abs(ExactRational(d) - oracle),
                             ExactRational(tol(16)) + ExactRational(tol(48))) <= 0);

    // exp(-1) * exp(1) within 2^-10 of 1 when queried at n = 12
    Dyadic prod = (CReal::exp(CReal::constant(-1)) * CReal::e()).approx(12);
    CHECK(abs(prod - Dyadic(1)) <= tol(10));

    CHECK_THROWS_AS(CReal::exp(CReal::constant(20)).approx(4), RangeExceeded);
}

TEST_CASE("sqrt examples") {
    for (std::int64_t n : {1, 10, 24}) CHECK(CReal::sqrt(CReal::constant(1)).approx(n) == Dyadic(1));

    Dyadic d = CReal::sqrt(CReal::constant(2)).approx(30);
    CHECK(abs(d * d - Dyadic(2)) <= tol(27));

    CHECK(abs(CReal::sqrt(CReal()).approx(10)) <= tol(10));
    CHECK_THROWS_AS(CReal::sqrt(CReal::constant(-1)).approx(4), NegativeOperandDetected);
}

TEST_CASE("contract against independent oracles, n = 1..64") {
    CReal sqrt2 = CReal::sqrt2();
    CReal e = CReal::e();
    CReal exp_half = CReal::exp(CReal::constant(Dyadic::parse("1/2")));
    CReal four_thirds = CReal::div(CReal::constant(1), CReal::constant(Dyadic::parse("3/4")));

    for (std::int64_t n = 1; n <= 64; ++n) {
        std::int64_t q = n + 32;
        ExactRational slack = ExactRational(tol(n)) + ExactRational(tol(q));
        {
            ExactRational err =
                abs(ExactRational(sqrt2.approx(n)) - ExactRational(bisect_sqrt(Dyadic(2), q)));
            CHECK(ExactRational::cmp(err, slack) <= 0);
        }
        {
            ExactRational err = abs(ExactRational(e.approx(n)) - series_exp(ExactRational(1), q));
            CHECK(ExactRational::cmp(err, slack) <= 0);
        }
        {
            ExactRational err = abs(ExactRational(exp_half.approx(n)) -
                                    series_exp(ExactRational(1, 2), q));
            CHECK(ExactRational::cmp(err, slack) <= 0);
        }
        {
            ExactRational err = abs(ExactRational(four_thirds.approx(n)) - ExactRational(4, 3));
            CHECK(ExactRational::cmp(err, ExactRational(tol(n))) <= 0);
        }
    }
}

TEST_CASE("query consistency across precisions") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::int64_t> nd(0, 40);
    std::vector<CReal> corpus = {
        CReal::sqrt2(), CReal::e(), CReal::sqrt2() * CReal::e(),
        CReal::div(CReal::e(), CReal::sqrt2()),
        CReal::exp(CReal::constant(Dyadic::parse("-3/4"))) + CReal::sqrt(CReal::constant(5))};
    for (const CReal& x : corpus)
        for (int i = 0; i < 50; ++i) {
            std::int64_t m = nd(rng), n = nd(rng);
            CHECK(abs(x.approx(m) - x.approx(n)) <= tol(m) + tol(n));
        }
}

TEST_CASE("soft_compare") {
    CHECK(soft_compare(CReal::constant(0), CReal::constant(1), 4) == SoftOrder::Less);
    CReal s = CReal::sqrt2();
    for (std::int64_t n : {1, 6, 12})
        CHECK(soft_compare(s, s, n) == SoftOrder::Indistinguishable);
    CHECK(soft_compare(CReal::constant(0), CReal::constant(Dyadic::pow2(-12)), 4) ==
          SoftOrder::Indistinguishable);

    // never a wrong strict order on dyadic-valued operands
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<long> mant(-4000, 4000);
    std::uniform_int_distribution<std::int64_t> nd(0, 12);
    for (int i = 0; i < 10000; ++i) {
        Dyadic a = Dyadic(mpz_class(mant(rng)), -6), b = Dyadic(mpz_class(mant(rng)), -6);
        std::int64_t n = nd(rng);
        SoftOrder o = soft_compare(CReal::constant(a), CReal::constant(b), n);
        if (o == SoftOrder::Less) CHECK(a < b);
        if (o == SoftOrder::Greater) CHECK(a > b);
        if (o == SoftOrder::Indistinguishable) CHECK(abs(a - b) <= tol(n));
    }
}

TEST_CASE("division witness search") {
    CHECK_THROWS_AS(CReal::div(CReal::constant(1), CReal::constant(0)).approx(4),
                    ZeroDivisorUndetected);
    // tiny but nonzero divisor is still certified
    Dyadic tiny = Dyadic::pow2(-40);
    Dyadic q = CReal::div(CReal::constant(1), CReal::constant(tiny)).approx(4);
    CHECK(abs(q - Dyadic::pow2(40)) <= tol(4));
}

TEST_CASE("memoized queries are stable and thread-safe") {
    CReal x = CReal::sqrt2() * CReal::e();
    Dyadic first = x.approx(20);
    CHECK(x.approx(20) == first);

    std::vector<std::future<Dyadic>> futs;
    for (int i = 0; i < 8; ++i)
        futs.push_back(std::async(std::launch::async, [&x] { return x.approx(24); }));
    Dyadic ref = x.approx(24);
    for (auto& f : futs) CHECK(f.get() == ref);
}
