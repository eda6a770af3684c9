#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <variant>
#include <vector>

#include "realbits/interval.hpp"

namespace realbits {

namespace detail {
struct SetImpl;
}

/// A set given by a pixel oracle: query(d, n) must answer In within distance
/// 2^-n of the set and Out beyond 2*2^-n; in between either answer is legal
/// but deterministic for a fixed construction. Sets are nonempty, closed and
/// contained in bounds().
class ComputableSet {
  public:
    bool query(const Point& d, std::int64_t n) const;
    int dim() const;
    const Box& bounds() const;

    explicit ComputableSet(std::shared_ptr<const detail::SetImpl> impl) : impl_(std::move(impl)) {}

  private:
    std::shared_ptr<const detail::SetImpl> impl_;
};

/// Geometric primitive with exact dyadic-point distance tests.
class PrimitiveShape {
  public:
    static PrimitiveShape point(Point p);
    static PrimitiveShape segment(Point a, Point b);
    static PrimitiveShape box(Box b);
    static PrimitiveShape disk(Point center, Dyadic radius);

    /// Exact test dist(d, S) <= t for dyadic t >= 0.
    bool within(const Point& d, const Dyadic& t) const;
    /// Exact squared distance where it is rational (everything but the disk).
    std::optional<ExactRational> sqdist(const Point& d) const;

    int dim() const;
    Box bounds() const;

    struct Pt { Point p; };
    struct Seg { Point a, b; };
    struct Bx { Box b; };
    struct Dk { Point c; Dyadic r; };
    using Impl = std::variant<Pt, Seg, Bx, Dk>;

  private:
    Impl shape_;
    explicit PrimitiveShape(Impl s) : shape_(std::move(s)) {}
};

/// Sharp oracle: In iff dist(d, S) <= (3/2) 2^-n, decided exactly.
ComputableSet set_primitive(PrimitiveShape shape);

ComputableSet set_union(const ComputableSet& a, const ComputableSet& b);

/// Dyadic affine bijection. Only similarities whose ratio is a power of two
/// preserve the oracle contract under precision shifting, so construction
/// rejects anything else.
struct AffineMap {
    // value(x) = L x + t, row-major L
    std::vector<Dyadic> lin;
    std::vector<Dyadic> off;

    static AffineMap make(std::vector<Dyadic> lin, std::vector<Dyadic> off);

    int dim() const { return static_cast<int>(off.size()); }
    std::int64_t ratio_log2 = 0;  // distance scaling is exactly 2^ratio_log2
    AffineMap inverse() const;
    Point apply(const Point& p) const;
    Box apply(const Box& b) const;

  private:
    AffineMap() = default;
};

ComputableSet set_affine(const ComputableSet& a, const AffineMap& map);

/// Bit-per-pixel raster; pixel centers sit at box-min + (i + 1/2) 2^-n.
struct PixelGrid {
    Box viewport;
    std::int64_t n = 0;
    long width = 0, height = 0;
    std::vector<std::uint8_t> bits;  // row-major, row 0 at the top (max y)
    long in_count = 0;

    bool at(long col, long row_from_top) const {
        return bits[static_cast<std::size_t>(row_from_top * width + col)] != 0;
    }
};

/// Queries every pixel center at precision n; parallel over rows with output
/// bytes independent of the thread count.
PixelGrid raster(const ComputableSet& s, const Box& viewport, std::int64_t n,
                 unsigned threads = 1);

/// Text PBM (P1): "P1\n<w> <h>\n" then one row per line of '0'/'1', 1 = In,
/// top row first.
void write_pbm(std::ostream& os, const PixelGrid& grid);
std::string pbm_string(const PixelGrid& grid);

namespace detail {
struct SetImpl {
    virtual ~SetImpl() = default;
    virtual bool query(const Point& d, std::int64_t n) const = 0;
    int dim = 2;
    Box bounds;
};
}  // namespace detail

}  // namespace realbits
