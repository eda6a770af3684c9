#include "realbits/weak.hpp"

#include <future>
#include <map>
#include <mutex>

#include "realbits/error.hpp"

namespace realbits {

struct CloudGenerator::State {
    std::function<DyadicCloud(std::int64_t)> make;
    std::mutex mu;
    std::map<std::int64_t, DyadicCloud> memo;
};

CloudGenerator::CloudGenerator(int dim, Box box, std::function<DyadicCloud(std::int64_t)> make)
    : dim_(dim), box_(std::move(box)), state_(std::make_shared<State>()) {
    if (dim_ < 1 || dim_ > 2 || box_.dim() != dim_) throw DimensionMismatch();
    state_->make = std::move(make);
}

const DyadicCloud& CloudGenerator::at(std::int64_t n) const {
    std::lock_guard<std::mutex> lock(state_->mu);
    auto it = state_->memo.find(n);
    if (it == state_->memo.end()) {
        DyadicCloud c = state_->make(n);
        if (c.dim() != dim_) throw DimensionMismatch();
        it = state_->memo.emplace(n, std::move(c)).first;
    }
    return it->second;
}

namespace {

long floor_scaled_long(const Dyadic& d, std::int64_t g) {
    mpz_class v = d.floor_scaled(g);
    if (!v.fits_slong_p()) throw RangeExceeded("grid coordinate");
    return v.get_si();
}

long ceil_scaled_long(const Dyadic& d, std::int64_t g) { return -floor_scaled_long(-d, g); }

}  // namespace

DyadicCloud cloud_from_oracle(const ComputableSet& s, const Box& box, std::int64_t n,
                              unsigned threads) {
    if (box.dim() != s.dim()) throw DimensionMismatch();
    std::int64_t g = n + 2;
    DyadicCloud::GridData grid;
    grid.dim = s.dim();
    grid.spacing_log2 = g;
    long count[2] = {1, 1};
    for (int d = 0; d < s.dim(); ++d) {
        long lo = floor_scaled_long(box[d].lo, g);
        long hi = ceil_scaled_long(box[d].hi, g);
        grid.origin[static_cast<std::size_t>(d)] = lo;
        count[d] = hi - lo + 1;
        if (count[d] <= 0 || count[d] > (1L << 21)) throw RangeExceeded("cloud grid size");
    }
    if (count[0] * count[1] > (1L << 28)) throw RangeExceeded("cloud grid size");
    grid.extent = {count[0], s.dim() == 2 ? count[1] : 1};
    grid.bits.assign(static_cast<std::size_t>(grid.extent[0] * grid.extent[1]), 0);

    auto run_cols = [&](long x_begin, long x_end) {
        Point p;
        p.coord.resize(static_cast<std::size_t>(s.dim()));
        for (long ix = x_begin; ix < x_end; ++ix) {
            p.coord[0] = Dyadic(mpz_class(grid.origin[0] + ix), -g);
            for (long iy = 0; iy < grid.extent[1]; ++iy) {
                if (s.dim() == 2) p.coord[1] = Dyadic(mpz_class(grid.origin[1] + iy), -g);
                grid.bits[static_cast<std::size_t>(ix * grid.extent[1] + iy)] =
                    s.query(p, n + 2) ? 1 : 0;
            }
        }
    };
    if (threads <= 1) {
        run_cols(0, grid.extent[0]);
    } else {
        long chunk = (grid.extent[0] + static_cast<long>(threads) - 1) / static_cast<long>(threads);
        std::vector<std::future<void>> tasks;
        for (long x = 0; x < grid.extent[0]; x += chunk)
            tasks.push_back(std::async(std::launch::async, run_cols, x,
                                       std::min(grid.extent[0], x + chunk)));
        for (auto& t : tasks) t.get();
    }
    return DyadicCloud::from_grid(std::move(grid), n);
}

namespace {

struct CloudOracleImpl final : detail::SetImpl {
    CloudGenerator gen;
    explicit CloudOracleImpl(CloudGenerator g) : gen(std::move(g)) {
        dim = gen.dim();
        bounds = gen.box();
    }
    bool query(const Point& d, std::int64_t n) const override {
        const DyadicCloud& cloud = gen.at(n + 2);
        return cloud.any_within(d, Dyadic(3).mul_pow2(-(n + 1)));
    }
};

}  // namespace

ComputableSet oracle_from_cloud(CloudGenerator gen) {
    return ComputableSet(std::make_shared<CloudOracleImpl>(std::move(gen)));
}

}  // namespace realbits
