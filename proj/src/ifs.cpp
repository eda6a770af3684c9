#include "realbits/ifs.hpp"

#include <map>
#include <mutex>
#include <optional>

#include "realbits/error.hpp"

namespace realbits {

namespace {

// Exact check operator_norm(L) <= rho for a dim x dim dyadic matrix:
// with T = sum of squared entries and D = det(L)^2, the largest eigenvalue of
// L^T L is at most rho^2 iff T <= 2 rho^2 and rho^4 - T rho^2 + D >= 0.
bool norm_at_most(const std::vector<Dyadic>& lin, int dim, const Dyadic& rho) {
    Dyadic r2 = rho * rho;
    if (dim == 1) return lin[0] * lin[0] <= r2;
    Dyadic T;
    for (const auto& v : lin) T += v * v;
    Dyadic det = lin[0] * lin[3] - lin[1] * lin[2];
    Dyadic D = det * det;
    if (T > r2.mul_pow2(1)) return false;
    return r2 * r2 - T * r2 + D >= Dyadic();
}

struct Composed {
    std::vector<Dyadic> lin;
    std::vector<Dyadic> off;
};

Composed compose(const Composed& outer, const IfsMap& inner, int k) {
    Composed r;
    r.lin.resize(static_cast<std::size_t>(k * k));
    r.off.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Dyadic o = outer.off[static_cast<std::size_t>(i)];
        for (int j = 0; j < k; ++j) {
            Dyadic v;
            for (int l = 0; l < k; ++l)
                v += outer.lin[static_cast<std::size_t>(i * k + l)] *
                     inner.lin[static_cast<std::size_t>(l * k + j)];
            r.lin[static_cast<std::size_t>(i * k + j)] = std::move(v);
        }
        for (int l = 0; l < k; ++l)
            o += outer.lin[static_cast<std::size_t>(i * k + l)] * inner.off[static_cast<std::size_t>(l)];
        r.off[static_cast<std::size_t>(i)] = std::move(o);
    }
    return r;
}

Point apply(const Composed& m, const Point& p, int k) {
    Point r;
    r.coord.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Dyadic v = m.off[static_cast<std::size_t>(i)];
        for (int j = 0; j < k; ++j) v += m.lin[static_cast<std::size_t>(i * k + j)] * p[j];
        r[i] = std::move(v);
    }
    return r;
}

int pick_depth_for(const IfsSystem& sys, std::int64_t n) {
    Dyadic budget2 = Dyadic::pow2(-2 * (n + 2));
    Dyadic cur = sys.bounds.sqdiam();
    Dyadic r2 = sys.contraction * sys.contraction;
    int m = 0;
    while (cur > budget2) {
        cur *= r2;
        if (++m > 2048) throw DepthOverflow();
    }
    return m;
}

Box image_box(const Composed& m, const Box& b, int k) {
    std::vector<DyadicInterval> sides;
    long corners = 1L << k;
    for (long mask = 0; mask < corners; ++mask) {
        Point c;
        for (int i = 0; i < k; ++i) c.coord.push_back((mask >> i) & 1 ? b[i].hi : b[i].lo);
        Point img = apply(m, c, k);
        if (mask == 0) {
            for (int i = 0; i < k; ++i) sides.emplace_back(img[i]);
        } else {
            for (int i = 0; i < k; ++i)
                sides[static_cast<std::size_t>(i)] = DyadicInterval::hull(
                    sides[static_cast<std::size_t>(i)], DyadicInterval(img[i]));
        }
    }
    return Box(std::move(sides));
}

// --- exact fixed-point fast path -------------------------------------------
//
// All quantities are integers at a common scale 2^-S. Composition products of
// two scale-S values land at scale 2S and are shifted back exactly (the low S
// bits are zero because the true fractional width never exceeds S).

struct FastState {
    int dim;
    std::int64_t S;
    long maps_lin[8][4];
    long maps_off[8][2];
    int map_count;
    long seed[2];
    long box_lo[2], box_hi[2];
    long d[2];
    __int128 t2;    // squared In threshold at scale 2S
    __int128 tau2;  // squared prune threshold at scale 2S
    long snap_unit;  // 2^(S - (n+3))
    int depth;
};

std::optional<long> to_scaled(const Dyadic& v, std::int64_t S) {
    std::int64_t e = v.exponent() + S;
    if (v.is_zero()) return 0L;
    if (e < 0) return std::nullopt;  // needs more fractional bits than S
    if (e > 62) return std::nullopt;
    mpz_class m = v.mantissa() << static_cast<unsigned>(e);
    if (!m.fits_slong_p()) return std::nullopt;
    long r = m.get_si();
    if (std::labs(r) > (1L << 62)) return std::nullopt;
    return r;
}

struct FastFrame {
    long lin[4];
    long off[2];
    int depth;
};

bool fast_query(const FastState& st) {
    std::vector<FastFrame> stack;
    stack.reserve(256);
    FastFrame id{};
    for (int i = 0; i < st.dim; ++i) id.lin[i * st.dim + i] = 1L << st.S;
    id.depth = 0;
    stack.push_back(id);
    const int k = st.dim;
    while (!stack.empty()) {
        FastFrame f = stack.back();
        stack.pop_back();
        // prune on the image of the bounding box
        __int128 dist2 = 0;
        long corner_lo[2], corner_hi[2];
        for (int i = 0; i < k; ++i) {
            __int128 lo = f.off[i], hi = f.off[i];
            for (int j = 0; j < k; ++j) {
                __int128 a = static_cast<__int128>(f.lin[i * k + j]) * st.box_lo[j];
                __int128 b = static_cast<__int128>(f.lin[i * k + j]) * st.box_hi[j];
                lo += (a < b ? a : b) >> st.S;
                hi += (a < b ? b : a) >> st.S;
            }
            corner_lo[i] = static_cast<long>(lo);
            corner_hi[i] = static_cast<long>(hi);
            __int128 gap = 0;
            if (st.d[i] < corner_lo[i]) gap = corner_lo[i] - static_cast<__int128>(st.d[i]);
            else if (st.d[i] > corner_hi[i]) gap = st.d[i] - static_cast<__int128>(corner_hi[i]);
            dist2 += gap * gap;
        }
        if (dist2 > st.tau2) continue;
        if (f.depth == st.depth) {
            // leaf: snap the orbit point and test it
            __int128 s2 = 0;
            for (int i = 0; i < k; ++i) {
                __int128 v = f.off[i];
                for (int j = 0; j < k; ++j)
                    v += (static_cast<__int128>(f.lin[i * k + j]) * st.seed[j]) >> st.S;
                long p = static_cast<long>(v);
                // round to the snap grid, ties to even
                long q = st.snap_unit;
                long div = p >= 0 ? p / q : -((-p) / q);
                long rem = p - div * q;
                if (rem < 0) {
                    rem += q;
                    --div;
                }
                long twice = 2 * rem;
                if (twice > q || (twice == q && (div & 1))) ++div;
                long snapped = div * q;
                __int128 gap = static_cast<__int128>(st.d[i]) - snapped;
                s2 += gap * gap;
            }
            if (s2 <= st.t2) return true;
            continue;
        }
        for (int mi = st.map_count - 1; mi >= 0; --mi) {
            FastFrame g;
            g.depth = f.depth + 1;
            for (int i = 0; i < k; ++i) {
                __int128 o = f.off[i];
                for (int j = 0; j < k; ++j) {
                    __int128 v = 0;
                    for (int l = 0; l < k; ++l)
                        v += static_cast<__int128>(f.lin[i * k + l]) * st.maps_lin[mi][l * k + j];
                    g.lin[i * k + j] = static_cast<long>(v >> st.S);
                    o += (static_cast<__int128>(f.lin[i * k + j]) * st.maps_off[mi][j]) >> st.S;
                }
                g.off[i] = static_cast<long>(o);
            }
            stack.push_back(g);
        }
    }
    return false;
}

// Specialized engine for systems whose maps all share the linear part
// c * I with c = 2^-j: compositions are then pure shifts. Everything is an
// int64 at scale 2^-S; exactness as in the general fast path.
struct UniformPlan {
    int dim;
    std::int64_t S;
    int depth;
    int jc;  // per-level shift
    long off[8][2];
    int map_count;
    long seed_leaf[2];              // c^depth * seed
    std::vector<long> lvl_lo, lvl_hi;  // c^level * box, per level and axis
    long d_units = 0;               // filled per query
    __int128 t2, tau2;
    long snap_unit;

    bool query(const long* d) const {
        struct Frame {
            long off[2];
            int depth;
        };
        // DFS stack bound: map_count frames per level (gated at plan build)
        Frame stack[512];
        int top = 0;
        stack[top++] = Frame{{0, 0}, 0};
        while (top > 0) {
            Frame f = stack[--top];
            __int128 dist2 = 0;
            for (int i = 0; i < dim; ++i) {
                long lo = f.off[i] + lvl_lo[static_cast<std::size_t>(f.depth * dim + i)];
                long hi = f.off[i] + lvl_hi[static_cast<std::size_t>(f.depth * dim + i)];
                long gap = d[i] < lo ? lo - d[i] : (d[i] > hi ? d[i] - hi : 0);
                dist2 += static_cast<__int128>(gap) * gap;
            }
            if (dist2 > tau2) continue;
            if (f.depth == depth) {
                __int128 s2 = 0;
                for (int i = 0; i < dim; ++i) {
                    long p = f.off[i] + seed_leaf[i];
                    long q = snap_unit;
                    long div = p >= 0 ? p / q : -((-p) / q);
                    long rem = p - div * q;
                    if (rem < 0) {
                        rem += q;
                        --div;
                    }
                    long twice = 2 * rem;
                    if (twice > q || (twice == q && (div & 1))) ++div;
                    long gap = d[i] - div * q;
                    s2 += static_cast<__int128>(gap) * gap;
                }
                if (s2 <= t2) return true;
                continue;
            }
            int shift = jc * f.depth;
            for (int mi = 0; mi < map_count; ++mi) {
                Frame& g = stack[top++];
                g.depth = f.depth + 1;
                for (int i = 0; i < dim; ++i) g.off[i] = f.off[i] + (off[mi][i] >> shift);
            }
        }
        return false;
    }
};

// --- oracle -----------------------------------------------------------------

struct IfsImpl final : detail::SetImpl {
    IfsSystem sys;
    std::int64_t lin_frac;   // max fractional bits over linear coefficients
    std::int64_t base_frac;  // max fractional bits over offsets, seed, box

    // uniform-scaling detection: every map's linear part is 2^-jc * I
    bool uniform = false;
    int uniform_jc = 0;
    mutable std::mutex plan_mu;
    mutable std::map<std::int64_t, std::shared_ptr<const UniformPlan>> plans;

    explicit IfsImpl(IfsSystem s) : sys(std::move(s)) {
        dim = sys.dim();
        bounds = sys.bounds;
        lin_frac = base_frac = 0;
        auto frac = [](const Dyadic& v) {
            return std::max<std::int64_t>(0, -v.exponent());
        };
        for (const auto& m : sys.maps) {
            for (const auto& v : m.lin) lin_frac = std::max(lin_frac, frac(v));
            for (const auto& v : m.off) base_frac = std::max(base_frac, frac(v));
        }
        for (const auto& v : sys.seed.coord) base_frac = std::max(base_frac, frac(v));
        for (const auto& iv : sys.bounds.side) {
            base_frac = std::max(base_frac, frac(iv.lo));
            base_frac = std::max(base_frac, frac(iv.hi));
        }
        detect_uniform();
    }

    void detect_uniform() {
        const Dyadic& c = sys.maps[0].lin[0];
        if (c.sign() <= 0 || mpz_cmpabs_ui(c.mantissa().get_mpz_t(), 1) != 0 ||
            c.exponent() > 0 || sys.maps.size() > 8)
            return;
        for (const auto& m : sys.maps)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    const Dyadic& v = m.lin[static_cast<std::size_t>(i * dim + j)];
                    if (i == j ? !(v == c) : !v.is_zero()) return;
                }
        uniform = true;
        uniform_jc = static_cast<int>(-c.exponent());
    }

    // Plans live as long as the impl; the thread-local memo makes repeated
    // same-precision queries lock-free.
    const UniformPlan* uniform_plan(std::int64_t n) const {
        thread_local const IfsImpl* cached_impl = nullptr;
        thread_local std::int64_t cached_n = -1;
        thread_local const UniformPlan* cached_plan = nullptr;
        if (cached_impl == this && cached_n == n) return cached_plan;
        {
            std::lock_guard<std::mutex> lock(plan_mu);
            auto it = plans.find(n);
            if (it != plans.end()) {
                cached_impl = this;
                cached_n = n;
                cached_plan = it->second.get();
                return cached_plan;
            }
        }
        int m = pick_depth(n);
        auto plan = std::make_shared<UniformPlan>();
        std::int64_t snap = n + 3;
        plan->dim = dim;
        plan->depth = m;
        plan->jc = uniform_jc;
        plan->map_count = static_cast<int>(sys.maps.size());
        std::int64_t S =
            static_cast<std::int64_t>(m) * uniform_jc + std::max(base_frac, snap);
        plan->S = S;
        bool ok = S <= 56 && m * plan->map_count + 2 < 512;
        auto conv = [&](const Dyadic& v) {
            auto r = to_scaled(v, S);
            if (!r) ok = false;
            return r.value_or(0);
        };
        if (ok) {
            for (int mi = 0; mi < plan->map_count && ok; ++mi)
                for (int i = 0; i < dim; ++i)
                    plan->off[mi][i] = conv(sys.maps[static_cast<std::size_t>(mi)]
                                                .off[static_cast<std::size_t>(i)]);
            plan->lvl_lo.resize(static_cast<std::size_t>((m + 1) * dim));
            plan->lvl_hi.resize(static_cast<std::size_t>((m + 1) * dim));
            for (int i = 0; i < dim && ok; ++i) {
                long lo = conv(bounds[i].lo), hi = conv(bounds[i].hi);
                long sd = conv(sys.seed[i]);
                plan->seed_leaf[i] = sd >> (uniform_jc * m);
                for (int lvl = 0; lvl <= m; ++lvl) {
                    plan->lvl_lo[static_cast<std::size_t>(lvl * dim + i)] = lo >> (uniform_jc * lvl);
                    plan->lvl_hi[static_cast<std::size_t>(lvl * dim + i)] = hi >> (uniform_jc * lvl);
                }
            }
            long tl = conv(Dyadic(3).mul_pow2(-(n + 1)));
            long taul = conv(Dyadic(3).mul_pow2(-(n + 1)) + Dyadic::pow2(-snap));
            if (ok && std::labs(tl) < (1L << 50) && std::labs(taul) < (1L << 50)) {
                plan->t2 = static_cast<__int128>(tl) * tl;
                plan->tau2 = static_cast<__int128>(taul) * taul;
                plan->snap_unit = 1L << (S - snap);
            } else {
                ok = false;
            }
        }
        std::shared_ptr<const UniformPlan> result = ok ? plan : nullptr;
        std::lock_guard<std::mutex> lock(plan_mu);
        auto [it, fresh] = plans.emplace(n, std::move(result));
        cached_impl = this;
        cached_n = n;
        cached_plan = it->second.get();
        return cached_plan;
    }

    int pick_depth(std::int64_t n) const { return pick_depth_for(sys, n); }

    bool query(const Point& d, std::int64_t n) const override {
        std::int64_t snap = n + 3;
        std::int64_t point_frac = 0;
        for (const auto& v : d.coord)
            point_frac = std::max(point_frac, std::max<std::int64_t>(0, -v.exponent()));

        if (uniform && point_frac <= snap) {
            if (const UniformPlan* plan = uniform_plan(n)) {
                long dc[2] = {0, 0};
                bool ok = true;
                for (int i = 0; i < dim; ++i) {
                    auto r = to_scaled(d[i], plan->S);
                    if (!r || std::labs(*r) > (1L << 50)) ok = false;
                    else dc[i] = *r;
                }
                if (ok) return plan->query(dc);
            }
        }

        int m = pick_depth(n);
        Dyadic t = Dyadic(3).mul_pow2(-(n + 1));
        Dyadic tau = t + Dyadic::pow2(-(n + 3));
        std::int64_t S = m * lin_frac + std::max({base_frac, point_frac, snap});
        if (S <= 40 && sys.maps.size() <= 8) {
            FastState st;
            st.dim = dim;
            st.S = S;
            st.map_count = static_cast<int>(sys.maps.size());
            st.depth = m;
            bool ok = true;
            auto put = [&](const Dyadic& v, long& slot) {
                auto r = to_scaled(v, S);
                if (!r) ok = false;
                else slot = *r;
            };
            for (int mi = 0; mi < st.map_count && ok; ++mi) {
                for (int j = 0; j < dim * dim; ++j) put(sys.maps[static_cast<std::size_t>(mi)].lin[static_cast<std::size_t>(j)], st.maps_lin[mi][j]);
                for (int j = 0; j < dim; ++j) put(sys.maps[static_cast<std::size_t>(mi)].off[static_cast<std::size_t>(j)], st.maps_off[mi][j]);
            }
            for (int j = 0; j < dim && ok; ++j) {
                put(sys.seed[j], st.seed[j]);
                put(bounds[j].lo, st.box_lo[j]);
                put(bounds[j].hi, st.box_hi[j]);
                put(d[j], st.d[j]);
            }
            long tl = 0, taul = 0;
            if (ok) put(t, tl), put(tau, taul);
            // keep coordinates small enough that squared sums stay in int128
            if (ok && std::labs(tl) < (1L << 50) && std::labs(taul) < (1L << 50)) {
                bool coords_ok = true;
                for (int j = 0; j < dim; ++j)
                    if (std::labs(st.box_lo[j]) > (1L << 50) || std::labs(st.box_hi[j]) > (1L << 50) ||
                        std::labs(st.d[j]) > (1L << 50))
                        coords_ok = false;
                if (coords_ok) {
                    st.t2 = static_cast<__int128>(tl) * tl;
                    st.tau2 = static_cast<__int128>(taul) * taul;
                    st.snap_unit = 1L << (S - snap);
                    return fast_query(st);
                }
            }
        }

        return detail::ifs_query_exact(sys, d, n);
    }
};

}  // namespace

namespace detail {

bool ifs_query_exact(const IfsSystem& sys, const Point& d, std::int64_t n) {
    int m = pick_depth_for(sys, n);
    std::int64_t snap = n + 3;
    Dyadic t = Dyadic(3).mul_pow2(-(n + 1));
    Dyadic tau = t + Dyadic::pow2(-snap);
    Dyadic t2 = t * t, tau2 = tau * tau;
    int k = sys.dim();
    std::vector<std::pair<Composed, int>> stack;
    Composed id;
    id.lin.assign(static_cast<std::size_t>(k * k), Dyadic());
    id.off.assign(static_cast<std::size_t>(k), Dyadic());
    for (int i = 0; i < k; ++i) id.lin[static_cast<std::size_t>(i * k + i)] = Dyadic(1);
    stack.emplace_back(std::move(id), 0);
    while (!stack.empty()) {
        auto [cm, depth] = std::move(stack.back());
        stack.pop_back();
        Box img = image_box(cm, sys.bounds, k);
        if (img.sqdist_to(d) > tau2) continue;
        if (depth == m) {
            Point p = apply(cm, sys.seed, k);
            Point snapped;
            for (int i = 0; i < k; ++i) snapped.coord.push_back(p[i].round_to(snap));
            if (sqdist(d, snapped) <= t2) return true;
            continue;
        }
        for (auto it = sys.maps.rbegin(); it != sys.maps.rend(); ++it)
            stack.emplace_back(compose(cm, *it, k), depth + 1);
    }
    return false;
}

}  // namespace detail

IfsSystem IfsSystem::make(std::vector<IfsMap> maps, Dyadic rho, Point seed, Box bounds) {
    if (maps.empty()) throw Error("attractor needs at least one map");
    int k = seed.dim();
    if (k < 1 || k > 2 || bounds.dim() != k) throw DimensionMismatch();
    if (rho.sign() <= 0 || rho >= Dyadic(1)) throw Error("contraction ratio must be in (0, 1)");
    if (!bounds.contains(seed)) throw Error("seed must lie in the bounding box");
    for (const auto& m : maps) {
        if (m.lin.size() != static_cast<std::size_t>(k * k) ||
            m.off.size() != static_cast<std::size_t>(k))
            throw DimensionMismatch();
        if (!norm_at_most(m.lin, k, rho))
            throw Error("map exceeds the declared contraction ratio");
        Composed c{m.lin, m.off};
        Box img = image_box(c, bounds, k);
        for (int i = 0; i < k; ++i)
            if (!(bounds[i].lo <= img[i].lo && img[i].hi <= bounds[i].hi))
                throw Error("map does not send the bounding box into itself");
    }
    IfsSystem s;
    s.maps = std::move(maps);
    s.contraction = std::move(rho);
    s.seed = std::move(seed);
    s.bounds = std::move(bounds);
    return s;
}

IfsSystem sierpinski() {
    Dyadic half = Dyadic::pow2(-1);
    IfsMap a{{half, Dyadic(), Dyadic(), half}, {Dyadic(), Dyadic()}};
    IfsMap b{{half, Dyadic(), Dyadic(), half}, {half, Dyadic()}};
    IfsMap c{{half, Dyadic(), Dyadic(), half}, {Dyadic(), half}};
    Box unit(DyadicInterval{Dyadic(), Dyadic(1)}, DyadicInterval{Dyadic(), Dyadic(1)});
    return IfsSystem::make({a, b, c}, half, Point(Dyadic(), Dyadic()), unit);
}

ComputableSet ifs_attractor(IfsSystem sys) {
    return ComputableSet(std::make_shared<IfsImpl>(std::move(sys)));
}

}  // namespace realbits
