#include <doctest.h>

#include <random>

#include "realbits/error.hpp"
#include "realbits/graphfn.hpp"
#include "realbits/ifs.hpp"
#include "realbits/sets.hpp"

using namespace realbits;

namespace {

Point pt(const char* x, const char* y) { return Point(Dyadic::parse(x), Dyadic::parse(y)); }

Dyadic random_coord(std::mt19937_64& rng, int frac_bits, long lo_num, long hi_num) {
    std::uniform_int_distribution<long> d(lo_num, hi_num);
    return Dyadic(mpz_class(d(rng)), -frac_bits);
}

// Independent judge for the sierpinski attractor: recursive orbit walk with
// plain dyadic arithmetic and simple per-axis pruning, no snapping.
struct GasketJudge {
    // dist(p, depth-m orbit of the seed) <= t, exactly
    static bool within(const Point& p, const Dyadic& t, int depth) {
        return recurse(p, t, depth, Dyadic(0), Dyadic(0), 0);
    }

    static bool recurse(const Point& p, const Dyadic& t, int depth, Dyadic ox, Dyadic oy,
                        int level) {
        // cell [ox, ox + 2^-level] x [oy, oy + 2^-level]
        Dyadic side = Dyadic::pow2(-level);
        Dyadic dx = axis_gap(p[0], ox, ox + side), dy = axis_gap(p[1], oy, oy + side);
        if (dx * dx + dy * dy > t * t) return false;
        if (level == depth) {
            Dyadic gx = p[0] - ox, gy = p[1] - oy;  // seed is the cell corner
            return gx * gx + gy * gy <= t * t;
        }
        Dyadic half = side.mul_pow2(-1);
        return recurse(p, t, depth, ox, oy, level + 1) ||
               recurse(p, t, depth, ox + half, oy, level + 1) ||
               recurse(p, t, depth, ox, oy + half, level + 1);
    }

    static Dyadic axis_gap(const Dyadic& v, const Dyadic& lo, const Dyadic& hi) {
        if (v < lo) return lo - v;
        if (v > hi) return v - hi;
        return Dyadic(0);
    }
};

}  // namespace

TEST_CASE("disk oracle examples") {
    ComputableSet disk = set_primitive(
        PrimitiveShape::disk(Point(Dyadic(0), Dyadic(0)), Dyadic::parse("1/2")));
    CHECK(disk.query(pt("0", "0"), 3));          // interior
    CHECK(disk.query(pt("5/8", "0"), 3));        // dist 1/8 <= 3/16
    CHECK_FALSE(disk.query(pt("3/4", "0"), 3));  // dist 1/4 > 3/16
}

TEST_CASE("primitive oracle contract on random queries") {
    std::mt19937_64 rng(11);
    std::vector<PrimitiveShape> shapes = {
        PrimitiveShape::point(pt("1/4", "-1/2")),
        PrimitiveShape::segment(pt("0", "0"), pt("1", "1/2")),
        PrimitiveShape::box(Box(DyadicInterval{Dyadic::parse("-1/4"), Dyadic::parse("1/2")},
                                DyadicInterval{Dyadic(0), Dyadic(1)})),
        PrimitiveShape::disk(pt("1/8", "1/8"), Dyadic::parse("3/8")),
    };
    std::uniform_int_distribution<std::int64_t> nd(0, 12);
    for (const auto& shape : shapes) {
        ComputableSet s = set_primitive(shape);
        for (int i = 0; i < 2500; ++i) {
            Point d(random_coord(rng, 10, -2048, 2048), random_coord(rng, 10, -2048, 2048));
            std::int64_t n = nd(rng);
            bool in = s.query(d, n);
            if (shape.within(d, Dyadic::pow2(-n))) CHECK(in);
            if (!shape.within(d, Dyadic::pow2(-n).mul_pow2(1))) CHECK_FALSE(in);
            // monotone refinement under the sharp rule
            if (s.query(d, n + 1)) CHECK(in);
        }
    }
}

TEST_CASE("union") {
    ComputableSet a = set_primitive(PrimitiveShape::point(pt("0", "0")));
    ComputableSet b = set_primitive(PrimitiveShape::point(pt("1", "0")));
    ComputableSet u = set_union(a, b);
    CHECK(u.query(pt("0", "0"), 5));
    CHECK(u.query(pt("1", "0"), 5));
    CHECK_FALSE(u.query(pt("1/2", "0"), 5));

    // idempotence and the min-distance rule
    ComputableSet disk = set_primitive(PrimitiveShape::disk(pt("0", "0"), Dyadic::parse("1/2")));
    ComputableSet seg = set_primitive(PrimitiveShape::segment(pt("1", "1"), pt("2", "1")));
    ComputableSet uu = set_union(disk, seg);
    ComputableSet dd = set_union(disk, disk);
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::int64_t> nd(0, 10);
    PrimitiveShape pdisk = PrimitiveShape::disk(pt("0", "0"), Dyadic::parse("1/2"));
    PrimitiveShape pseg = PrimitiveShape::segment(pt("1", "1"), pt("2", "1"));
    for (int i = 0; i < 1000; ++i) {
        Point d(random_coord(rng, 8, -768, 768), random_coord(rng, 8, -768, 768));
        std::int64_t n = nd(rng);
        CHECK(dd.query(d, n) == disk.query(d, n));
        Dyadic t = Dyadic(3).mul_pow2(-(n + 1));
        CHECK(uu.query(d, n) == (pdisk.within(d, t) || pseg.within(d, t)));
    }

    ComputableSet line1d = set_primitive(PrimitiveShape::point(Point(Dyadic(0))));
    CHECK_THROWS_AS(set_union(a, line1d), DimensionMismatch);
}

TEST_CASE("affine maps") {
    ComputableSet disk = set_primitive(PrimitiveShape::disk(pt("0", "0"), Dyadic::parse("1/2")));
    AffineMap identity = AffineMap::make({Dyadic(1), Dyadic(0), Dyadic(0), Dyadic(1)},
                                         {Dyadic(0), Dyadic(0)});
    ComputableSet same = set_affine(disk, identity);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
        Point d(random_coord(rng, 8, -512, 512), random_coord(rng, 8, -512, 512));
        CHECK(same.query(d, 6) == disk.query(d, 6));
    }

    AffineMap translate = AffineMap::make({Dyadic(1), Dyadic(0), Dyadic(0), Dyadic(1)},
                                          {Dyadic(1), Dyadic(0)});
    ComputableSet moved = set_affine(disk, translate);
    for (int i = 0; i < 500; ++i) {
        Point d(random_coord(rng, 8, -512, 512), random_coord(rng, 8, -512, 512));
        Point shifted(d[0] + Dyadic(1), d[1]);
        CHECK(moved.query(shifted, 4) == disk.query(d, 4));
    }

    // scale by 2 of the origin point: query((0, 2^-6), 4) must be In
    ComputableSet origin = set_primitive(PrimitiveShape::point(pt("0", "0")));
    AffineMap scale2 = AffineMap::make({Dyadic(2), Dyadic(0), Dyadic(0), Dyadic(2)},
                                       {Dyadic(0), Dyadic(0)});
    ComputableSet scaled = set_affine(origin, scale2);
    CHECK(scaled.query(Point(Dyadic(0), Dyadic::pow2(-6)), 4));
    CHECK(scale2.ratio_log2 == 1);

    // 90-degree rotation is a power-of-two similarity
    AffineMap rot = AffineMap::make({Dyadic(0), Dyadic(-1), Dyadic(1), Dyadic(0)},
                                    {Dyadic(0), Dyadic(0)});
    ComputableSet seg = set_primitive(PrimitiveShape::segment(pt("0", "0"), pt("1", "0")));
    ComputableSet rotated = set_affine(seg, rot);
    CHECK(rotated.query(pt("0", "1/2"), 6));
    CHECK_FALSE(rotated.query(pt("1/2", "0"), 3));

    CHECK_THROWS_AS(
        AffineMap::make({Dyadic(1), Dyadic(1), Dyadic(1), Dyadic(1)}, {Dyadic(0), Dyadic(0)}),
        NonInvertibleMap);
    CHECK_THROWS_AS(
        AffineMap::make({Dyadic(3), Dyadic(0), Dyadic(0), Dyadic(3)}, {Dyadic(0), Dyadic(0)}),
        NonInvertibleMap);
    CHECK_THROWS_AS(
        AffineMap::make({Dyadic(0), Dyadic(0), Dyadic(0), Dyadic(0)}, {Dyadic(0), Dyadic(0)}),
        NonInvertibleMap);
}

TEST_CASE("ifs attractor basics") {
    // single map x -> x/2: the attractor is the origin
    IfsMap halver{{Dyadic::pow2(-1), Dyadic(0), Dyadic(0), Dyadic::pow2(-1)},
                  {Dyadic(0), Dyadic(0)}};
    Box unit(DyadicInterval{Dyadic(0), Dyadic(1)}, DyadicInterval{Dyadic(0), Dyadic(1)});
    ComputableSet origin = ifs_attractor(
        IfsSystem::make({halver}, Dyadic::pow2(-1), Point(Dyadic(0), Dyadic(0)), unit));
    CHECK(origin.query(pt("0", "0"), 8));
    CHECK_FALSE(origin.query(pt("1/2", "1/2"), 8));

    ComputableSet gasket = ifs_attractor(sierpinski());
    CHECK(gasket.query(pt("0", "0"), 6));
    CHECK_FALSE(gasket.query(pt("3/4", "3/4"), 6));

    // validation
    CHECK_THROWS(IfsSystem::make({halver}, Dyadic::parse("1/4"), Point(Dyadic(0), Dyadic(0)),
                                 unit));  // norm 1/2 exceeds declared 1/4
    IfsMap escape{{Dyadic::pow2(-1), Dyadic(0), Dyadic(0), Dyadic::pow2(-1)},
                  {Dyadic(1), Dyadic(0)}};
    CHECK_THROWS(IfsSystem::make({escape}, Dyadic::pow2(-1), Point(Dyadic(0), Dyadic(0)), unit));
}

TEST_CASE("ifs attractor contract against an independent reference") {
    ComputableSet gasket = ifs_attractor(sierpinski());
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<std::int64_t> nd(1, 8);
    for (int i = 0; i < 1000; ++i) {
        std::int64_t n = nd(rng);
        Point d(random_coord(rng, 9, -64, 576), random_coord(rng, 9, -64, 576));
        bool in = gasket.query(d, n);
        // depth m + 4 reference: diam * rho^m <= 2^-(n+2) with diam = sqrt(2)
        int m = 0;
        Dyadic cur(2);  // squared diameter
        while (cur > Dyadic::pow2(-2 * (n + 2))) {
            cur = cur.mul_pow2(-2);
            ++m;
        }
        int depth = m + 4;
        // reference cloud is within eps = sqrt2 * 2^-depth of the attractor
        // judge forcing bands shrink by eps on both sides
        Dyadic eps_bound = Dyadic::pow2(-(depth - 1));  // >= sqrt2 * 2^-depth
        Dyadic must_in = Dyadic::pow2(-n) - eps_bound;
        Dyadic must_out = Dyadic::pow2(-n).mul_pow2(1) + eps_bound;
        if (must_in.sign() > 0 && GasketJudge::within(d, must_in, depth)) CHECK(in);
        if (!GasketJudge::within(d, must_out, depth)) CHECK_FALSE(in);
    }
}

TEST_CASE("graph_set agrees with the segment primitive for a constant") {
    Box dom(DyadicInterval{Dyadic(0), Dyadic(1)});
    ComputableSet graph = graph_set(BitFunction::parse("0", dom));
    PrimitiveShape seg = PrimitiveShape::segment(pt("0", "0"), pt("1", "0"));
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::int64_t> nd(0, 8);
    for (int i = 0; i < 1000; ++i) {
        Point d(random_coord(rng, 8, -128, 384), random_coord(rng, 8, -256, 256));
        std::int64_t n = nd(rng);
        bool in = graph.query(d, n);
        if (seg.within(d, Dyadic::pow2(-n))) CHECK(in);
        if (!seg.within(d, Dyadic::pow2(-n).mul_pow2(1))) CHECK_FALSE(in);
    }
}

TEST_CASE("graph_set examples") {
    Box dom(DyadicInterval{Dyadic(0), Dyadic(1)});
    ComputableSet diag = graph_set(BitFunction::parse("x", dom));
    CHECK(diag.query(pt("1/2", "1/2"), 6));
    ComputableSet expg = graph_set(BitFunction::parse("exp(x)", dom));
    CHECK(expg.query(pt("0", "1"), 8));
}

TEST_CASE("raster point example") {
    ComputableSet origin = set_primitive(PrimitiveShape::point(pt("0", "0")));
    Box view(DyadicInterval{Dyadic(-1), Dyadic(1)}, DyadicInterval{Dyadic(-1), Dyadic(1)});
    PixelGrid g = raster(origin, view, 1);
    CHECK(g.width == 4);
    CHECK(g.height == 4);
    // In iff center's squared distance <= (3/4)^2; centers at (+-1/4, +-3/4)
    for (long r = 0; r < 4; ++r)
        for (long c = 0; c < 4; ++c) {
            bool center = (c == 1 || c == 2) && (r == 1 || r == 2);
            CHECK(g.at(c, r) == center);
        }
    CHECK(g.in_count == 4);
}

TEST_CASE("raster of union is the bitwise or") {
    ComputableSet a = set_primitive(PrimitiveShape::point(pt("0", "0")));
    ComputableSet b = set_primitive(PrimitiveShape::point(pt("1", "0")));
    Box view(DyadicInterval{Dyadic(0), Dyadic(1)}, DyadicInterval{Dyadic(0), Dyadic(1)});
    PixelGrid ga = raster(a, view, 1), gb = raster(b, view, 1);
    PixelGrid gu = raster(set_union(a, b), view, 1);
    for (std::size_t i = 0; i < gu.bits.size(); ++i)
        CHECK(gu.bits[i] == (ga.bits[i] | gb.bits[i]));
}

TEST_CASE("raster determinism across thread counts") {
    ComputableSet gasket = ifs_attractor(sierpinski());
    Box view(DyadicInterval{Dyadic(0), Dyadic(1)}, DyadicInterval{Dyadic(0), Dyadic(1)});
    std::string ref = pbm_string(raster(gasket, view, 5, 1));
    for (unsigned t : {2u, 4u, 8u}) CHECK(pbm_string(raster(gasket, view, 5, t)) == ref);
}

TEST_CASE("pbm format") {
    ComputableSet origin = set_primitive(PrimitiveShape::point(pt("0", "0")));
    Box view(DyadicInterval{Dyadic(-1), Dyadic(1)}, DyadicInterval{Dyadic(-1), Dyadic(1)});
    // at n = 0 the threshold (3/2) 2^0 covers all four centers at dist sqrt(1/2)
    CHECK(pbm_string(raster(origin, view, 0)) == "P1\n2 2\n11\n11\n");
    Box tiny(DyadicInterval{Dyadic::parse("-1/4"), Dyadic::parse("1/4")},
             DyadicInterval{Dyadic::parse("-1/4"), Dyadic::parse("1/4")});
    CHECK(pbm_string(raster(origin, tiny, 1)) == "P1\n1 1\n1\n");
    CHECK_THROWS_AS(raster(origin, view, 20), RangeExceeded);
}
