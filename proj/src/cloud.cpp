#include "realbits/cloud.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "realbits/error.hpp"

namespace realbits {

namespace {

long floor_scaled_long(const Dyadic& d, std::int64_t g) {
    mpz_class v = d.floor_scaled(g);
    if (!v.fits_slong_p()) throw RangeExceeded("cloud coordinate");
    return v.get_si();
}

long ceil_scaled_long(const Dyadic& d, std::int64_t g) { return -floor_scaled_long(-d, g); }

}  // namespace

struct DyadicCloud::Rep {
    int dim = 2;
    std::int64_t certified_n = 0;

    // exactly one of the two representations is active
    std::vector<Point> list;  // sorted lexicographic, unique
    bool is_grid = false;
    GridData grid;

    // lazy bucket index for the list representation
    mutable std::mutex index_mu;
    mutable bool index_built = false;
    mutable std::int64_t bucket_log2 = 0;  // bucket side 2^-B
    mutable std::map<std::pair<long, long>, std::vector<std::uint32_t>> buckets;
    mutable long bmin[2] = {0, 0}, bmax[2] = {0, 0};

    Point grid_point(long ix, long iy) const {
        Dyadic x = Dyadic(grid.origin[0] + ix).mul_pow2(-grid.spacing_log2);
        if (dim == 1) return Point(std::move(x));
        Dyadic y = Dyadic(grid.origin[1] + iy).mul_pow2(-grid.spacing_log2);
        return Point(std::move(x), std::move(y));
    }
    bool grid_bit(long ix, long iy) const {
        return grid.bits[static_cast<std::size_t>(ix * grid.extent[1] + iy)] != 0;
    }

    void build_index() const {
        std::lock_guard<std::mutex> lock(index_mu);
        if (index_built) return;
        bucket_log2 = certified_n;
        for (std::uint32_t i = 0; i < list.size(); ++i) {
            const Point& p = list[i];
            long bx = floor_scaled_long(p[0], bucket_log2);
            long by = dim == 2 ? floor_scaled_long(p[1], bucket_log2) : 0;
            if (i == 0) {
                bmin[0] = bmax[0] = bx;
                bmin[1] = bmax[1] = by;
            } else {
                bmin[0] = std::min(bmin[0], bx);
                bmax[0] = std::max(bmax[0], bx);
                bmin[1] = std::min(bmin[1], by);
                bmax[1] = std::max(bmax[1], by);
            }
            buckets[{bx, by}].push_back(i);
        }
        index_built = true;
    }
};

DyadicCloud DyadicCloud::from_points(int dim, std::vector<Point> pts, std::int64_t certified_n) {
    if (dim < 1 || dim > 2) throw DimensionMismatch();
    for (const Point& p : pts)
        if (p.dim() != dim) throw DimensionMismatch();
    if (pts.empty()) throw EmptyCloud();
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    auto rep = std::make_shared<Rep>();
    rep->dim = dim;
    rep->certified_n = certified_n;
    rep->list = std::move(pts);
    return DyadicCloud(std::move(rep));
}

DyadicCloud DyadicCloud::from_grid(GridData grid, std::int64_t certified_n) {
    if (grid.dim < 1 || grid.dim > 2) throw DimensionMismatch();
    if (grid.dim == 1) grid.extent[1] = 1;
    if (grid.bits.size() !=
        static_cast<std::size_t>(grid.extent[0]) * static_cast<std::size_t>(grid.extent[1]))
        throw Error("grid bit count mismatch");
    bool any = false;
    for (auto b : grid.bits) any |= (b != 0);
    if (!any) throw EmptyCloud();
    auto rep = std::make_shared<Rep>();
    rep->dim = grid.dim;
    rep->certified_n = certified_n;
    rep->is_grid = true;
    rep->grid = std::move(grid);
    return DyadicCloud(std::move(rep));
}

int DyadicCloud::dim() const { return rep_->dim; }
std::int64_t DyadicCloud::certified() const { return rep_->certified_n; }

std::size_t DyadicCloud::size() const {
    if (!rep_->is_grid) return rep_->list.size();
    std::size_t c = 0;
    for (auto b : rep_->grid.bits) c += b;
    return c;
}

void DyadicCloud::scan(const std::function<bool(const Point&)>& f) const {
    if (!rep_->is_grid) {
        for (const Point& p : rep_->list)
            if (!f(p)) return;
        return;
    }
    for (long ix = 0; ix < rep_->grid.extent[0]; ++ix)
        for (long iy = 0; iy < rep_->grid.extent[1]; ++iy)
            if (rep_->grid_bit(ix, iy) && !f(rep_->grid_point(ix, iy))) return;
}

std::vector<Point> DyadicCloud::points() const {
    std::vector<Point> out;
    out.reserve(size());
    scan([&](const Point& p) {
        out.push_back(p);
        return true;
    });
    return out;
}

bool DyadicCloud::any_within(const Point& d, const Dyadic& t) const {
    if (d.dim() != rep_->dim) throw DimensionMismatch();
    if (t.sign() < 0) return false;
    Dyadic t2 = t * t;
    if (rep_->is_grid) {
        const auto& g = rep_->grid;
        long lo_x = ceil_scaled_long(d[0] - t, g.spacing_log2) - g.origin[0];
        long hi_x = floor_scaled_long(d[0] + t, g.spacing_log2) - g.origin[0];
        lo_x = std::max(lo_x, 0L);
        hi_x = std::min(hi_x, g.extent[0] - 1);
        long lo_y = 0, hi_y = 0;
        if (rep_->dim == 2) {
            lo_y = std::max(ceil_scaled_long(d[1] - t, g.spacing_log2) - g.origin[1], 0L);
            hi_y = std::min(floor_scaled_long(d[1] + t, g.spacing_log2) - g.origin[1],
                            g.extent[1] - 1);
        }
        for (long ix = lo_x; ix <= hi_x; ++ix)
            for (long iy = lo_y; iy <= hi_y; ++iy)
                if (rep_->grid_bit(ix, iy) && sqdist(d, rep_->grid_point(ix, iy)) <= t2)
                    return true;
        return false;
    }
    if (rep_->list.size() <= 64) {
        for (const Point& p : rep_->list)
            if (sqdist(d, p) <= t2) return true;
        return false;
    }
    rep_->build_index();
    std::int64_t B = rep_->bucket_log2;
    long lo_x = floor_scaled_long(d[0] - t, B), hi_x = floor_scaled_long(d[0] + t, B);
    long lo_y = 0, hi_y = 0;
    if (rep_->dim == 2) {
        lo_y = floor_scaled_long(d[1] - t, B);
        hi_y = floor_scaled_long(d[1] + t, B);
    }
    for (long bx = lo_x; bx <= hi_x; ++bx)
        for (long by = lo_y; by <= hi_y; ++by) {
            auto it = rep_->buckets.find({bx, by});
            if (it == rep_->buckets.end()) continue;
            for (auto idx : it->second)
                if (sqdist(d, rep_->list[idx]) <= t2) return true;
        }
    return false;
}

Dyadic DyadicCloud::min_sqdist(const Point& d) const {
    if (d.dim() != rep_->dim) throw DimensionMismatch();
    if (rep_->is_grid) {
        const auto& g = rep_->grid;
        // expanding Chebyshev rings of cells around d's cell
        long cx = floor_scaled_long(d[0], g.spacing_log2) - g.origin[0];
        long cy = rep_->dim == 2 ? floor_scaled_long(d[1], g.spacing_log2) - g.origin[1] : 0;
        long span = std::max({g.extent[0], g.extent[1], std::labs(cx), std::labs(cy)}) + 2;
        std::optional<Dyadic> best;
        Dyadic cell = Dyadic::pow2(-g.spacing_log2);
        for (long k = 0;; ++k) {
            if (best) {
                // cells at Chebyshev ring k hold points at distance >= (k-1) * cell
                Dyadic lb = Dyadic(std::max(k - 1, 0L)) * cell;
                if (lb * lb >= *best) break;
            }
            if (k > 2 * span) break;
            long x0 = cx - k, x1 = cx + k, y0 = cy - k, y1 = cy + k;
            auto consider = [&](long ix, long iy) {
                if (ix < 0 || ix >= g.extent[0] || iy < 0 || iy >= g.extent[1]) return;
                if (!rep_->grid_bit(ix, iy)) return;
                Dyadic s = sqdist(d, rep_->grid_point(ix, iy));
                if (!best || s < *best) best = s;
            };
            if (k == 0) {
                consider(cx, cy);
                continue;
            }
            if (rep_->dim == 1) {
                consider(x0, 0);
                consider(x1, 0);
                continue;
            }
            for (long ix = x0; ix <= x1; ++ix) {
                consider(ix, y0);
                consider(ix, y1);
            }
            for (long iy = y0 + 1; iy < y1; ++iy) {
                consider(x0, iy);
                consider(x1, iy);
            }
        }
        if (!best) throw EmptyCloud();
        return *best;
    }
    if (rep_->list.size() > 256) {
        rep_->build_index();
        std::int64_t B = rep_->bucket_log2;
        Dyadic cell = Dyadic::pow2(-B);
        long cx = floor_scaled_long(d[0], B);
        long cy = rep_->dim == 2 ? floor_scaled_long(d[1], B) : 0;
        long span = std::max({rep_->bmax[0] - rep_->bmin[0], rep_->bmax[1] - rep_->bmin[1],
                              std::labs(cx - rep_->bmin[0]), std::labs(cy - rep_->bmin[1])}) +
                    2;
        std::optional<Dyadic> best;
        auto consider = [&](long bx, long by) {
            auto it = rep_->buckets.find({bx, by});
            if (it == rep_->buckets.end()) return;
            for (auto idx : it->second) {
                Dyadic s = sqdist(d, rep_->list[idx]);
                if (!best || s < *best) best = s;
            }
        };
        for (long k = 0;; ++k) {
            if (best) {
                Dyadic lb = Dyadic(std::max(k - 1, 0L)) * cell;
                if (lb * lb >= *best) break;
            }
            if (k > 2 * span) break;
            if (k == 0) {
                consider(cx, cy);
                continue;
            }
            if (rep_->dim == 1) {
                consider(cx - k, 0);
                consider(cx + k, 0);
                continue;
            }
            for (long bx = cx - k; bx <= cx + k; ++bx) {
                consider(bx, cy - k);
                consider(bx, cy + k);
            }
            for (long by = cy - k + 1; by < cy + k; ++by) {
                consider(cx - k, by);
                consider(cx + k, by);
            }
        }
        if (!best) throw EmptyCloud();
        return *best;
    }
    std::optional<Dyadic> best;
    for (const Point& p : rep_->list) {
        Dyadic s = sqdist(d, p);
        if (!best || s < *best) best = s;
    }
    if (!best) throw EmptyCloud();
    return *best;
}

void DyadicCloud::write_csv(std::ostream& os) const {
    scan([&](const Point& p) {
        for (int i = 0; i < p.dim(); ++i) {
            if (i) os << ",";
            os << p[i].str();
        }
        os << "\n";
        return true;
    });
}

DyadicCloud DyadicCloud::read_csv(std::istream& is, std::int64_t certified_n) {
    std::vector<Point> pts;
    std::string line;
    int dim = 0;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        Point p;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            std::string field = line.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            try {
                p.coord.push_back(Dyadic::parse(field));
            } catch (const ParseError&) {
                throw ParseError("bad dyadic in CSV", lineno, start + 1);
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (dim == 0) dim = p.dim();
        if (p.dim() != dim) throw ParseError("inconsistent CSV dimension", lineno, 1);
        pts.push_back(std::move(p));
    }
    return from_points(dim, std::move(pts), certified_n);
}

ExactRational hausdorff_sq(const DyadicCloud& a, const DyadicCloud& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch();
    if (a.empty() || b.empty()) throw EmptyCloud();
    auto directed = [](const DyadicCloud& from, const DyadicCloud& to) {
        Dyadic worst;
        bool any = false;
        from.scan([&](const Point& p) {
            Dyadic s = to.min_sqdist(p);
            if (!any || s > worst) {
                worst = s;
                any = true;
            }
            return true;
        });
        return worst;
    };
    return ExactRational(std::max(directed(a, b), directed(b, a)));
}

bool directed_within(const DyadicCloud& a, const DyadicCloud& b, const Dyadic& t) {
    if (a.dim() != b.dim()) throw DimensionMismatch();
    bool ok = true;
    a.scan([&](const Point& p) {
        ok = b.any_within(p, t);
        return ok;
    });
    return ok;
}

bool hausdorff_le(const DyadicCloud& a, const DyadicCloud& b, const Dyadic& t) {
    return directed_within(a, b, t) && directed_within(b, a, t);
}

}  // namespace realbits
