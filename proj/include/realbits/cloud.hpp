#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "realbits/interval.hpp"

namespace realbits {

/// Finite set of dyadic points certifying d_H(cloud, S) <= 2^-n for its
/// target set. Iteration order is lexicographic, so serialized bytes are
/// deterministic. Grid-aligned clouds (the output of oracle scans) are kept
/// as bitmaps; distance probes on either representation are exact.
class DyadicCloud {
  public:
    struct GridData {
        int dim = 2;
        std::int64_t spacing_log2 = 0;          // spacing 2^-g
        std::array<long, 2> origin{0, 0};       // cell indices (y unused in 1D)
        std::array<long, 2> extent{0, 1};       // cells per axis
        std::vector<std::uint8_t> bits;         // index = ix * extent[1] + iy
    };

    static DyadicCloud from_points(int dim, std::vector<Point> pts, std::int64_t certified_n);
    static DyadicCloud from_grid(GridData grid, std::int64_t certified_n);

    int dim() const;
    std::int64_t certified() const;
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    /// Lexicographic visit; the callback returns false to stop early.
    void scan(const std::function<bool(const Point&)>& f) const;
    std::vector<Point> points() const;

    /// Exact: is some cloud point within distance t of d?
    bool any_within(const Point& d, const Dyadic& t) const;
    /// Exact squared distance from d to the nearest cloud point.
    Dyadic min_sqdist(const Point& d) const;

    /// One comma-separated dyadic point per line.
    void write_csv(std::ostream& os) const;
    static DyadicCloud read_csv(std::istream& is, std::int64_t certified_n);

  private:
    struct Rep;
    explicit DyadicCloud(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
    std::shared_ptr<const Rep> rep_;
};

/// Exact squared Hausdorff distance max(sup_a inf_b, sup_b inf_a).
ExactRational hausdorff_sq(const DyadicCloud& a, const DyadicCloud& b);

/// Exact test: every point of a lies within t of b.
bool directed_within(const DyadicCloud& a, const DyadicCloud& b, const Dyadic& t);

/// Exact test d_H(a, b) <= t.
bool hausdorff_le(const DyadicCloud& a, const DyadicCloud& b, const Dyadic& t);

}  // namespace realbits
