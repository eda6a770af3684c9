#include "realbits/graphfn.hpp"

#include "realbits/error.hpp"

namespace realbits {

DyadicCloud graph_cloud(const BitFunction& f, std::int64_t n) {
    if (f.arity() != 1) throw DimensionMismatch();
    const DyadicInterval& dom = f.domain()[0];
    std::int64_t dlog = std::max(n + 3, f.modulus(n + 3));
    if (dlog > 24) throw PrecisionOverflow(dlog);
    Dyadic step = Dyadic::pow2(-dlog);
    mpz_class count = dom.width().floor_scaled(dlog);
    if (!count.fits_slong_p() || count.get_si() > (1L << 22))
        throw RangeExceeded("graph sample count");
    long samples = count.get_si();

    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(samples) + 2);
    for (long i = 0; i <= samples; ++i) {
        Dyadic x = dom.lo + Dyadic(i) * step;
        Dyadic y = f.eval(CReal::constant(x), n + 3).round_to(n + 3);
        pts.emplace_back(std::move(x), std::move(y));
    }
    if (dom.lo + Dyadic(samples) * step < dom.hi) {
        Dyadic y = f.eval(CReal::constant(dom.hi), n + 3).round_to(n + 3);
        pts.emplace_back(dom.hi, std::move(y));
    }
    return DyadicCloud::from_points(2, std::move(pts), n);
}

namespace {

DyadicInterval padded_range(const BitFunction& f) {
    DyadicInterval r = f.range_enclosure();
    Dyadic pad = Dyadic::pow2(-2);
    return {r.lo - pad, r.hi + pad};
}

}  // namespace

ComputableSet graph_set(const BitFunction& f) {
    if (f.arity() != 1) throw DimensionMismatch();
    DyadicInterval range = padded_range(f);
    Box box(f.domain()[0], range);
    CloudGenerator gen(2, box, [f](std::int64_t q) { return graph_cloud(f, q); });
    return oracle_from_cloud(std::move(gen));
}

GraphFunction::GraphFunction(ComputableSet graph, DyadicInterval domain, DyadicInterval range)
    : graph_(std::move(graph)), domain_(std::move(domain)), range_(std::move(range)) {
    if (graph_.dim() != 2) throw DimensionMismatch();
}

GraphFunction GraphFunction::from_bitfunc(const BitFunction& f) {
    return GraphFunction(graph_set(f), f.domain()[0], padded_range(f));
}

GraphFunction GraphFunction::step() {
    Dyadic one(1);
    ComputableSet low = set_primitive(
        PrimitiveShape::segment(Point(-one, Dyadic()), Point(Dyadic(), Dyadic())));
    ComputableSet high =
        set_primitive(PrimitiveShape::segment(Point(Dyadic(), one), Point(one, one)));
    return GraphFunction(set_union(low, high), DyadicInterval{-one, one},
                         DyadicInterval{Dyadic(), one});
}

GraphFunction GraphFunction::sqrt_multivalued() {
    Dyadic one(1);
    Box box(DyadicInterval{Dyadic(), one}, DyadicInterval{-one, one});
    CloudGenerator gen(2, box, [](std::int64_t q) {
        // (t^2, t) on the 2^-(q+4) t-grid; the curve map is sqrt(5)-Lipschitz
        // so the cloud is within sqrt(5) 2^-(q+5) < 2^-q of the curve.
        std::int64_t dlog = q + 4;
        if (dlog > 26) throw PrecisionOverflow(dlog);
        Dyadic step = Dyadic::pow2(-dlog);
        long samples = 2L << dlog;  // t from -1 to 1
        std::vector<Point> pts;
        pts.reserve(static_cast<std::size_t>(samples) + 1);
        for (long i = 0; i <= samples; ++i) {
            Dyadic t = Dyadic(-1) + Dyadic(i) * step;
            pts.emplace_back(t * t, t);
        }
        return DyadicCloud::from_points(2, std::move(pts), q);
    });
    return GraphFunction(oracle_from_cloud(std::move(gen)), DyadicInterval{Dyadic(), one},
                         DyadicInterval{-one, one});
}

std::vector<DyadicInterval> GraphFunction::eval(const Dyadic& x, std::int64_t n) const {
    if (!domain_.contains(x)) throw DomainViolation("evaluation point outside domain");
    std::int64_t q = n + 2;
    Dyadic step = Dyadic::pow2(-q);
    mpz_class count = range_.width().floor_scaled(q);
    if (!count.fits_slong_p() || count.get_si() > (1L << 24))
        throw RangeExceeded("graph slice sample count");
    long samples = count.get_si();

    std::vector<DyadicInterval> clusters;
    bool open = false;
    Dyadic run_lo, run_hi;
    for (long j = 0; j <= samples; ++j) {
        Dyadic y = range_.lo + Dyadic(j) * step;
        if (graph_.query(Point(x, y), q)) {
            if (!open) {
                run_lo = y;
                open = true;
            }
            run_hi = y;
        } else if (open) {
            clusters.emplace_back(run_lo, run_hi);
            open = false;
        }
    }
    if (open) clusters.emplace_back(run_lo, run_hi);
    if (clusters.empty()) throw EmptyResult();
    return clusters;
}

}  // namespace realbits
