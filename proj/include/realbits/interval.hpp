#pragma once

#include <initializer_list>
#include <vector>

#include "realbits/dyadic.hpp"

namespace realbits {

/// Closed interval [lo, hi] with exact dyadic endpoints.
struct DyadicInterval {
    Dyadic lo, hi;

    DyadicInterval() = default;
    DyadicInterval(Dyadic point) : lo(point), hi(std::move(point)) {}
    DyadicInterval(Dyadic l, Dyadic h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw Error("interval endpoints out of order");
    }

    Dyadic width() const { return hi - lo; }
    Dyadic mid() const { return (lo + hi).mul_pow2(-1); }
    bool contains(const Dyadic& x) const { return lo <= x && x <= hi; }
    bool contains(const DyadicInterval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool is_point() const { return lo == hi; }

    friend DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b) {
        return {a.lo + b.lo, a.hi + b.hi};
    }
    friend DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b) {
        return {a.lo - b.hi, a.hi - b.lo};
    }
    friend DyadicInterval operator-(const DyadicInterval& a) { return {-a.hi, -a.lo}; }
    friend DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b);

    static DyadicInterval hull(const DyadicInterval& a, const DyadicInterval& b) {
        return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }

    /// Enclosing interval with endpoints on the 2^-n grid.
    DyadicInterval outward(std::int64_t n) const { return {lo.floor_to(n), hi.ceil_to(n)}; }
};

DyadicInterval interval_abs(const DyadicInterval& a);
DyadicInterval interval_min(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval interval_max(const DyadicInterval& a, const DyadicInterval& b);

struct Point {
    std::vector<Dyadic> coord;

    Point() = default;
    explicit Point(std::vector<Dyadic> c) : coord(std::move(c)) {}
    Point(Dyadic x) { coord.push_back(std::move(x)); }
    Point(Dyadic x, Dyadic y) {
        coord.push_back(std::move(x));
        coord.push_back(std::move(y));
    }

    int dim() const { return static_cast<int>(coord.size()); }
    const Dyadic& operator[](int i) const { return coord[static_cast<std::size_t>(i)]; }
    Dyadic& operator[](int i) { return coord[static_cast<std::size_t>(i)]; }

    friend bool operator==(const Point& a, const Point& b) { return a.coord == b.coord; }
    /// Lexicographic, for deterministic ordering of point lists.
    friend bool operator<(const Point& a, const Point& b);
};

/// Exact squared Euclidean distance.
Dyadic sqdist(const Point& a, const Point& b);

struct Box {
    std::vector<DyadicInterval> side;

    Box() = default;
    explicit Box(std::vector<DyadicInterval> s) : side(std::move(s)) {}
    Box(DyadicInterval x) { side.push_back(std::move(x)); }
    Box(DyadicInterval x, DyadicInterval y) {
        side.push_back(std::move(x));
        side.push_back(std::move(y));
    }

    int dim() const { return static_cast<int>(side.size()); }
    const DyadicInterval& operator[](int i) const { return side[static_cast<std::size_t>(i)]; }

    bool contains(const Point& p) const;
    static Box hull(const Box& a, const Box& b);

    /// Squared diameter (sum of squared side widths).
    Dyadic sqdiam() const;
    /// Exact squared distance from a point to the box (0 inside).
    Dyadic sqdist_to(const Point& p) const;
};

}  // namespace realbits
