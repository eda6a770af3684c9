#include "realbits/interval.hpp"

namespace realbits {

DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b) {
    Dyadic p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    Dyadic lo = std::min(std::min(p1, p2), std::min(p3, p4));
    Dyadic hi = std::max(std::max(p1, p2), std::max(p3, p4));
    return {std::move(lo), std::move(hi)};
}

DyadicInterval interval_abs(const DyadicInterval& a) {
    if (a.lo.sign() >= 0) return a;
    if (a.hi.sign() <= 0) return -a;
    return {Dyadic(), std::max(-a.lo, a.hi)};
}

DyadicInterval interval_min(const DyadicInterval& a, const DyadicInterval& b) {
    return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
}

DyadicInterval interval_max(const DyadicInterval& a, const DyadicInterval& b) {
    return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
}

bool operator<(const Point& a, const Point& b) {
    for (int i = 0; i < a.dim() && i < b.dim(); ++i) {
        int c = Dyadic::cmp(a[i], b[i]);
        if (c != 0) return c < 0;
    }
    return a.dim() < b.dim();
}

Dyadic sqdist(const Point& a, const Point& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch();
    Dyadic s;
    for (int i = 0; i < a.dim(); ++i) {
        Dyadic d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

bool Box::contains(const Point& p) const {
    if (p.dim() != dim()) throw DimensionMismatch();
    for (int i = 0; i < dim(); ++i)
        if (!side[static_cast<std::size_t>(i)].contains(p[i])) return false;
    return true;
}

Box Box::hull(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch();
    std::vector<DyadicInterval> s;
    for (int i = 0; i < a.dim(); ++i) s.push_back(DyadicInterval::hull(a[i], b[i]));
    return Box(std::move(s));
}

Dyadic Box::sqdiam() const {
    Dyadic s;
    for (const auto& iv : side) {
        Dyadic w = iv.width();
        s += w * w;
    }
    return s;
}

Dyadic Box::sqdist_to(const Point& p) const {
    if (p.dim() != dim()) throw DimensionMismatch();
    Dyadic s;
    for (int i = 0; i < dim(); ++i) {
        const auto& iv = side[static_cast<std::size_t>(i)];
        Dyadic gap;
        if (p[i] < iv.lo)
            gap = iv.lo - p[i];
        else if (p[i] > iv.hi)
            gap = p[i] - iv.hi;
        s += gap * gap;
    }
    return s;
}

}  // namespace realbits
