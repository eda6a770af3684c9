#include <doctest.h>

#include <random>

#include "realbits/error.hpp"
#include "realbits/setexpr.hpp"

using namespace realbits;

namespace {
Point pt(const char* x, const char* y) { return Point(Dyadic::parse(x), Dyadic::parse(y)); }
}

TEST_CASE("set constructors parse and elaborate") {
    CHECK(parse_set("point(0,0)").query(pt("0", "0"), 5));
    CHECK(parse_set("segment(0,0,1,0)").query(pt("1/2", "0"), 5));
    CHECK(parse_set("box(0,0,1,1)").query(pt("1/2", "1/2"), 5));
    CHECK(parse_set("disk(0,0,1/2)").query(pt("5/8", "0"), 3));
    CHECK(parse_set("union(point(0,0), point(1,0))").query(pt("1", "0"), 5));
    CHECK(parse_set("affine(point(0,0), 1,0,0,1, 1,0)").query(pt("1", "0"), 5));
    CHECK(parse_set("sierpinski()").query(pt("0", "0"), 6));
    CHECK(parse_set("graph(exp(x), 0, 1)").query(pt("0", "1"), 6));
    CHECK(parse_set("stepgraph()").query(pt("1/2", "1"), 5));
    CHECK(parse_set("sqrtgraph()").query(pt("1/4", "-1/2"), 6));
    CHECK(parse_set(" union( disk(0, 0, 1/2) , point(3/4, 0) ) ").dim() == 2);
}

TEST_CASE("set grammar errors carry position") {
    CHECK_THROWS_AS(parse_set("blob(0,0)"), ParseError);
    CHECK_THROWS_AS(parse_set("point(0)"), ParseError);
    CHECK_THROWS_AS(parse_set("point(0,0) trailing"), ParseError);
    CHECK_THROWS_AS(parse_set("disk(0,0,1/3)"), ParseError);  // non-dyadic radius
    CHECK_THROWS_AS(parse_set(""), ParseError);
}

TEST_CASE("graph expressions") {
    GraphFunction g = parse_graph("stepgraph()");
    CHECK(g.eval(Dyadic(0), 5).size() == 2);
    CHECK(parse_graph("sqrtgraph()").eval(Dyadic::parse("1/4"), 6).size() == 2);
    GraphFunction e = parse_graph("graph(exp(x), 0, 1)");
    auto cs = e.eval(Dyadic(0), 6);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].contains(Dyadic(1)));
    CHECK_THROWS_AS(parse_graph("disk(0,0,1)"), ParseError);
}

TEST_CASE("ifs engines agree: fixed-point fast paths vs dyadic reference") {
    ComputableSet gasket = parse_set("sierpinski()");
    IfsSystem sys = sierpinski();

    // a rotated quarter-scale system exercises the general (non-uniform) engine
    Dyadic q = Dyadic::parse("1/4");
    IfsMap rot{{Dyadic(0), -q, q, Dyadic(0)}, {Dyadic::parse("1/2"), Dyadic::parse("1/4")}};
    IfsMap shrink{{q, Dyadic(0), Dyadic(0), q}, {Dyadic(0), Dyadic(0)}};
    Box unit(DyadicInterval{Dyadic(0), Dyadic(1)}, DyadicInterval{Dyadic(0), Dyadic(1)});
    IfsSystem spiral = IfsSystem::make({rot, shrink}, q, Point(Dyadic(0), Dyadic(0)), unit);
    ComputableSet spiral_set = ifs_attractor(spiral);

    std::mt19937_64 rng(79);
    std::uniform_int_distribution<long> mant(-(1 << 10), 3 << 9);
    std::uniform_int_distribution<std::int64_t> nd(1, 7);
    for (int i = 0; i < 300; ++i) {
        std::int64_t n = nd(rng);
        Point d(Dyadic(mpz_class(mant(rng)), -9), Dyadic(mpz_class(mant(rng)), -9));
        CHECK(gasket.query(d, n) == detail::ifs_query_exact(sys, d, n));
        CHECK(spiral_set.query(d, n) == detail::ifs_query_exact(spiral, d, n));
    }
}
