#include "realbits/sets.hpp"

#include <future>
#include <ostream>
#include <sstream>

#include "realbits/error.hpp"

namespace realbits {

using detail::SetImpl;

bool ComputableSet::query(const Point& d, std::int64_t n) const {
    if (d.dim() != impl_->dim) throw DimensionMismatch();
    return impl_->query(d, n);
}
int ComputableSet::dim() const { return impl_->dim; }
const Box& ComputableSet::bounds() const { return impl_->bounds; }

// --- primitives ---

PrimitiveShape PrimitiveShape::point(Point p) { return PrimitiveShape(Pt{std::move(p)}); }
PrimitiveShape PrimitiveShape::segment(Point a, Point b) {
    if (a.dim() != b.dim()) throw DimensionMismatch();
    return PrimitiveShape(Seg{std::move(a), std::move(b)});
}
PrimitiveShape PrimitiveShape::box(Box b) {
    if (b.dim() == 0) throw Error("empty box");
    return PrimitiveShape(Bx{std::move(b)});
}
PrimitiveShape PrimitiveShape::disk(Point center, Dyadic radius) {
    if (radius.sign() < 0) throw Error("disk radius must be nonnegative");
    return PrimitiveShape(Dk{std::move(center), std::move(radius)});
}

int PrimitiveShape::dim() const {
    if (auto* p = std::get_if<Pt>(&shape_)) return p->p.dim();
    if (auto* s = std::get_if<Seg>(&shape_)) return s->a.dim();
    if (auto* b = std::get_if<Bx>(&shape_)) return b->b.dim();
    return std::get<Dk>(shape_).c.dim();
}

namespace {

// Exact fixed-point shortcut for within-tests: all quantities as int64 at a
// common scale 2^-S with products in int128. Falls back to the big-number
// path whenever something does not fit.
struct Scaled {
    bool ok = true;
    std::int64_t S = 0;

    std::optional<long> get(const Dyadic& v) const {
        if (v.is_zero()) return 0L;
        std::int64_t e = v.exponent() + S;
        if (e < 0 || e > 56) return std::nullopt;
        mpz_class m = v.mantissa() << static_cast<unsigned>(e);
        if (!m.fits_slong_p()) return std::nullopt;
        long r = m.get_si();
        if (std::labs(r) > (1L << 56)) return std::nullopt;
        return r;
    }
    long operator()(const Dyadic& v) {
        auto r = get(v);
        if (!r) ok = false;
        return r.value_or(0);
    }
};

std::int64_t frac_bits(const Dyadic& v) { return std::max<std::int64_t>(0, -v.exponent()); }

}  // namespace

namespace {

// Squared distance from d to segment [a, b], exact.
ExactRational segment_sqdist(const Point& d, const Point& a, const Point& b) {
    Dyadic den;  // <v, v>
    Dyadic num;  // <d - a, v>
    for (int i = 0; i < a.dim(); ++i) {
        Dyadic v = b[i] - a[i];
        den += v * v;
        num += (d[i] - a[i]) * v;
    }
    if (den.is_zero() || num.sign() <= 0) return ExactRational(sqdist(d, a));
    if (num >= den) return ExactRational(sqdist(d, b));
    // |d-a|^2 - num^2/den
    return ExactRational(sqdist(d, a)) - ExactRational(num * num) / ExactRational(den);
}

}  // namespace

std::optional<ExactRational> PrimitiveShape::sqdist(const Point& d) const {
    if (auto* p = std::get_if<Pt>(&shape_)) return ExactRational(realbits::sqdist(d, p->p));
    if (auto* s = std::get_if<Seg>(&shape_)) return segment_sqdist(d, s->a, s->b);
    if (auto* b = std::get_if<Bx>(&shape_)) return ExactRational(b->b.sqdist_to(d));
    return std::nullopt;  // disk distance involves a square root
}

namespace {

std::optional<bool> fast_within(const PrimitiveShape::Impl& shape, const Point& d,
                                const Dyadic& t);

}  // namespace

bool PrimitiveShape::within(const Point& d, const Dyadic& t) const {
    if (d.dim() != dim()) throw DimensionMismatch();
    if (t.sign() < 0) return false;
    if (auto fast = fast_within(shape_, d, t)) return *fast;
    if (auto* k = std::get_if<Dk>(&shape_)) {
        // dist <= t  iff  |d - c| <= r + t
        Dyadic reach = k->r + t;
        return realbits::sqdist(d, k->c) <= reach * reach;
    }
    ExactRational t2 = ExactRational(t) * ExactRational(t);
    return ExactRational::cmp(*sqdist(d), t2) <= 0;
}

namespace {

std::optional<bool> fast_within(const PrimitiveShape::Impl& shape, const Point& d,
                                const Dyadic& t) {
    Scaled sc;
    sc.S = frac_bits(t);
    for (const auto& v : d.coord) sc.S = std::max(sc.S, frac_bits(v));
    auto widen = [&](const Point& p) {
        for (const auto& v : p.coord) sc.S = std::max(sc.S, frac_bits(v));
    };
    std::visit([&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PrimitiveShape::Pt>) widen(s.p);
        else if constexpr (std::is_same_v<T, PrimitiveShape::Seg>) widen(s.a), widen(s.b);
        else if constexpr (std::is_same_v<T, PrimitiveShape::Dk>) {
            widen(s.c);
            sc.S = std::max(sc.S, frac_bits(s.r));
        } else {
            for (const auto& iv : s.b.side) {
                sc.S = std::max(sc.S, frac_bits(iv.lo));
                sc.S = std::max(sc.S, frac_bits(iv.hi));
            }
        }
    }, shape);
    if (sc.S > 24) return std::nullopt;

    const int k = d.dim();
    long dc[2] = {0, 0}, tl = sc(t);
    for (int i = 0; i < k; ++i) dc[i] = sc(d[i]);
    __int128 t2 = static_cast<__int128>(tl) * tl;

    auto point_within = [&](const long* p) {
        __int128 s2 = 0;
        for (int i = 0; i < k; ++i) {
            __int128 g = static_cast<__int128>(dc[i]) - p[i];
            s2 += g * g;
        }
        return s2 <= t2;
    };

    std::optional<bool> result;
    std::visit([&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PrimitiveShape::Pt>) {
            long p[2] = {0, 0};
            for (int i = 0; i < k; ++i) p[i] = sc(s.p[i]);
            if (sc.ok) result = point_within(p);
        } else if constexpr (std::is_same_v<T, PrimitiveShape::Seg>) {
            long a[2] = {0, 0}, b[2] = {0, 0};
            for (int i = 0; i < k; ++i) a[i] = sc(s.a[i]), b[i] = sc(s.b[i]);
            if (!sc.ok) return;
            __int128 den = 0, num = 0, sqa = 0;
            for (int i = 0; i < k; ++i) {
                __int128 v = static_cast<__int128>(b[i]) - a[i];
                __int128 w = static_cast<__int128>(dc[i]) - a[i];
                den += v * v;
                num += w * v;
                sqa += w * w;
            }
            if (den == 0 || num <= 0) result = sqa <= t2;
            else if (num >= den) result = point_within(b);
            else
                // sqa - num^2/den <= t^2, cleared of the denominator
                result = sqa * den - num * num <= t2 * den;
        } else if constexpr (std::is_same_v<T, PrimitiveShape::Dk>) {
            long c[2] = {0, 0};
            for (int i = 0; i < k; ++i) c[i] = sc(s.c[i]);
            long reach = sc(s.r) + tl;
            if (!sc.ok) return;
            __int128 s2 = 0;
            for (int i = 0; i < k; ++i) {
                __int128 g = static_cast<__int128>(dc[i]) - c[i];
                s2 += g * g;
            }
            result = s2 <= static_cast<__int128>(reach) * reach;
        } else {
            __int128 s2 = 0;
            for (int i = 0; i < k; ++i) {
                long lo = sc(s.b[i].lo), hi = sc(s.b[i].hi);
                __int128 g = 0;
                if (dc[i] < lo) g = static_cast<__int128>(lo) - dc[i];
                else if (dc[i] > hi) g = static_cast<__int128>(dc[i]) - hi;
                s2 += g * g;
            }
            if (sc.ok) result = s2 <= t2;
        }
    }, shape);
    if (!sc.ok) return std::nullopt;
    return result;
}

}  // namespace

Box PrimitiveShape::bounds() const {
    if (auto* p = std::get_if<Pt>(&shape_)) {
        std::vector<DyadicInterval> s;
        for (int i = 0; i < p->p.dim(); ++i) s.emplace_back(p->p[i]);
        return Box(std::move(s));
    }
    if (auto* sg = std::get_if<Seg>(&shape_)) {
        std::vector<DyadicInterval> s;
        for (int i = 0; i < sg->a.dim(); ++i)
            s.emplace_back(std::min(sg->a[i], sg->b[i]), std::max(sg->a[i], sg->b[i]));
        return Box(std::move(s));
    }
    if (auto* b = std::get_if<Bx>(&shape_)) return b->b;
    const auto& k = std::get<Dk>(shape_);
    std::vector<DyadicInterval> s;
    for (int i = 0; i < k.c.dim(); ++i) s.emplace_back(k.c[i] - k.r, k.c[i] + k.r);
    return Box(std::move(s));
}

namespace {

struct PrimitiveImpl final : SetImpl {
    PrimitiveShape shape;
    explicit PrimitiveImpl(PrimitiveShape s) : shape(std::move(s)) {
        dim = shape.dim();
        bounds = shape.bounds();
    }
    bool query(const Point& d, std::int64_t n) const override {
        return shape.within(d, Dyadic(mpz_class(3), -(n + 1)));
    }
};

struct UnionImpl final : SetImpl {
    ComputableSet a, b;
    UnionImpl(ComputableSet x, ComputableSet y) : a(std::move(x)), b(std::move(y)) {
        dim = a.dim();
        bounds = Box::hull(a.bounds(), b.bounds());
    }
    bool query(const Point& d, std::int64_t n) const override {
        return a.query(d, n) || b.query(d, n);
    }
};

struct AffineImpl final : SetImpl {
    ComputableSet inner;
    AffineMap map, inv;
    AffineImpl(ComputableSet s, AffineMap m)
        : inner(std::move(s)), map(std::move(m)), inv(map.inverse()) {
        if (inner.dim() != map.dim()) throw DimensionMismatch();
        dim = map.dim();
        bounds = map.apply(inner.bounds());
    }
    bool query(const Point& d, std::int64_t n) const override {
        // dist(d, M(A)) = 2^j dist(M^-1 d, A)
        return inner.query(inv.apply(d), n + map.ratio_log2);
    }
};

}  // namespace

ComputableSet set_primitive(PrimitiveShape shape) {
    return ComputableSet(std::make_shared<PrimitiveImpl>(std::move(shape)));
}

ComputableSet set_union(const ComputableSet& a, const ComputableSet& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch();
    return ComputableSet(std::make_shared<UnionImpl>(a, b));
}

ComputableSet set_affine(const ComputableSet& a, const AffineMap& map) {
    return ComputableSet(std::make_shared<AffineImpl>(a, map));
}

// --- affine maps ---

AffineMap AffineMap::make(std::vector<Dyadic> lin, std::vector<Dyadic> off) {
    int k = static_cast<int>(off.size());
    if (k < 1 || k > 2 || lin.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(k))
        throw DimensionMismatch();
    AffineMap m;
    m.lin = std::move(lin);
    m.off = std::move(off);

    // The distance ratio must be exactly 2^j: |det| != 0, the linear part a
    // similarity, and the squared ratio a power of four.
    Dyadic s2;
    if (k == 1) {
        s2 = m.lin[0] * m.lin[0];
    } else {
        const Dyadic &a = m.lin[0], &b = m.lin[1], &c = m.lin[2], &d = m.lin[3];
        Dyadic col1 = a * a + c * c, col2 = b * b + d * d, dot = a * b + c * d;
        if (!(col1 == col2) || !dot.is_zero())
            throw NonInvertibleMap("linear part is not a similarity");
        s2 = col1;
    }
    if (s2.is_zero()) throw NonInvertibleMap("zero determinant");
    if (mpz_cmpabs_ui(s2.mantissa().get_mpz_t(), 1) != 0 || s2.exponent() % 2 != 0)
        throw NonInvertibleMap("similarity ratio must be a power of two");
    m.ratio_log2 = s2.exponent() / 2;
    return m;
}

AffineMap AffineMap::inverse() const {
    AffineMap r;
    int k = dim();
    // For a similarity, L^-1 = L^T / s^2 with dyadic entries.
    if (k == 1) {
        r.lin = {lin[0].mul_pow2(-2 * ratio_log2)};
    } else {
        r.lin = {lin[0].mul_pow2(-2 * ratio_log2), lin[2].mul_pow2(-2 * ratio_log2),
                 lin[1].mul_pow2(-2 * ratio_log2), lin[3].mul_pow2(-2 * ratio_log2)};
    }
    r.off.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Dyadic v;
        for (int j = 0; j < k; ++j)
            v += r.lin[static_cast<std::size_t>(i * k + j)] * off[static_cast<std::size_t>(j)];
        r.off[static_cast<std::size_t>(i)] = -v;
    }
    r.ratio_log2 = -ratio_log2;
    return r;
}

Point AffineMap::apply(const Point& p) const {
    int k = dim();
    if (p.dim() != k) throw DimensionMismatch();
    Point r;
    r.coord.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Dyadic v = off[static_cast<std::size_t>(i)];
        for (int j = 0; j < k; ++j) v += lin[static_cast<std::size_t>(i * k + j)] * p[j];
        r[i] = std::move(v);
    }
    return r;
}

Box AffineMap::apply(const Box& b) const {
    int k = dim();
    if (b.dim() != k) throw DimensionMismatch();
    // hull of corner images (affine image of a box is their convex hull)
    std::vector<DyadicInterval> sides;
    long corners = 1L << k;
    for (long mask = 0; mask < corners; ++mask) {
        Point c;
        for (int i = 0; i < k; ++i)
            c.coord.push_back((mask >> i) & 1 ? b[i].hi : b[i].lo);
        Point img = apply(c);
        if (mask == 0) {
            for (int i = 0; i < k; ++i) sides.emplace_back(img[i]);
        } else {
            for (int i = 0; i < k; ++i)
                sides[static_cast<std::size_t>(i)] =
                    DyadicInterval::hull(sides[static_cast<std::size_t>(i)], DyadicInterval(img[i]));
        }
    }
    return Box(std::move(sides));
}

// --- raster ---

namespace {

long ceil_to_long(const Dyadic& d) {
    mpz_class v = d.ceil_to(0).floor_scaled(0);
    if (!v.fits_slong_p()) throw RangeExceeded("raster size");
    return v.get_si();
}

}  // namespace

PixelGrid raster(const ComputableSet& s, const Box& viewport, std::int64_t n, unsigned threads) {
    if (viewport.dim() != 2 || s.dim() != 2) throw DimensionMismatch();
    if (n > 16) throw RangeExceeded("raster precision capped at 16");
    PixelGrid g;
    g.viewport = viewport;
    g.n = n;
    g.width = ceil_to_long(viewport[0].width().mul_pow2(n));
    g.height = ceil_to_long(viewport[1].width().mul_pow2(n));
    if (g.width <= 0 || g.height <= 0) throw ViewportEmpty();
    if (g.width > (1L << 20) || g.height > (1L << 20) || g.width * g.height > (1L << 26))
        throw RangeExceeded("raster pixel count");
    g.bits.assign(static_cast<std::size_t>(g.width * g.height), 0);

    const Dyadic half = Dyadic::pow2(-(n + 1));
    auto run_rows = [&](long row_begin, long row_end) {
        for (long r = row_begin; r < row_end; ++r) {
            long j = g.height - 1 - r;  // top row first
            Dyadic cy = viewport[1].lo + Dyadic(j).mul_pow2(-n) + half;
            for (long i = 0; i < g.width; ++i) {
                Dyadic cx = viewport[0].lo + Dyadic(i).mul_pow2(-n) + half;
                g.bits[static_cast<std::size_t>(r * g.width + i)] =
                    s.query(Point(cx, cy), n) ? 1 : 0;
            }
        }
    };

    if (threads <= 1) {
        run_rows(0, g.height);
    } else {
        long chunk = (g.height + static_cast<long>(threads) - 1) / static_cast<long>(threads);
        std::vector<std::future<void>> tasks;
        for (long r = 0; r < g.height; r += chunk)
            tasks.push_back(std::async(std::launch::async, run_rows, r,
                                       std::min(g.height, r + chunk)));
        for (auto& t : tasks) t.get();
    }
    for (auto b : g.bits) g.in_count += b;
    return g;
}

void write_pbm(std::ostream& os, const PixelGrid& g) {
    os << "P1\n" << g.width << " " << g.height << "\n";
    for (long r = 0; r < g.height; ++r) {
        for (long i = 0; i < g.width; ++i)
            os << (g.at(i, r) ? '1' : '0');
        os << "\n";
    }
}

std::string pbm_string(const PixelGrid& g) {
    std::ostringstream os;
    write_pbm(os, g);
    return os.str();
}

}  // namespace realbits
