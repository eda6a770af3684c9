#include "realbits/bitfunc.hpp"

#include <cctype>
#include <map>
#include <optional>

#include "realbits/error.hpp"

namespace realbits {

namespace fn {

namespace {
FuncNodePtr node(FuncOp op, FuncNodePtr a = nullptr, FuncNodePtr b = nullptr) {
    return std::make_shared<FuncNode>(FuncNode{op, Dyadic(), 0, std::move(a), std::move(b)});
}
}  // namespace

FuncNodePtr constant(Dyadic d) {
    return std::make_shared<FuncNode>(FuncNode{FuncOp::Const, std::move(d), 0, nullptr, nullptr});
}
FuncNodePtr var(int index) {
    return std::make_shared<FuncNode>(FuncNode{FuncOp::Var, Dyadic(), index, nullptr, nullptr});
}
FuncNodePtr add(FuncNodePtr a, FuncNodePtr b) { return node(FuncOp::Add, std::move(a), std::move(b)); }
FuncNodePtr sub(FuncNodePtr a, FuncNodePtr b) { return node(FuncOp::Sub, std::move(a), std::move(b)); }
FuncNodePtr mul(FuncNodePtr a, FuncNodePtr b) { return node(FuncOp::Mul, std::move(a), std::move(b)); }
FuncNodePtr div(FuncNodePtr a, FuncNodePtr b) { return node(FuncOp::Div, std::move(a), std::move(b)); }
FuncNodePtr min(FuncNodePtr a, FuncNodePtr b) { return node(FuncOp::Min, std::move(a), std::move(b)); }
FuncNodePtr max(FuncNodePtr a, FuncNodePtr b) { return node(FuncOp::Max, std::move(a), std::move(b)); }
FuncNodePtr neg(FuncNodePtr a) { return node(FuncOp::Neg, std::move(a)); }
FuncNodePtr abs(FuncNodePtr a) { return node(FuncOp::Abs, std::move(a)); }
FuncNodePtr sqrt(FuncNodePtr a) { return node(FuncOp::Sqrt, std::move(a)); }
FuncNodePtr exp(FuncNodePtr a) { return node(FuncOp::Exp, std::move(a)); }

}  // namespace fn

namespace {

const Dyadic kExpRangeCap = Dyadic(17);

// Interval evaluation of a node tree. Leaves take their interval from
// `seeds`; partial operations round outward at precision p. Returns nullopt
// when an operand interval is too wide to apply a partial operation (divisor
// straddles zero, sqrt operand dips negative, exp operand past the range
// cap) -- the caller refines and retries.
struct IntervalEval {
    std::span<const DyadicInterval> seeds;
    std::int64_t p;
    CostMeter* meter = nullptr;
    // Per-node hull accumulation for the construction sweep.
    std::map<const FuncNode*, DyadicInterval>* hulls = nullptr;

    std::optional<DyadicInterval> run(const FuncNode& node) {
        auto r = visit(node);
        if (r && hulls) {
            auto [it, fresh] = hulls->emplace(&node, *r);
            if (!fresh) it->second = DyadicInterval::hull(it->second, *r);
        }
        return r;
    }

    std::optional<DyadicInterval> visit(const FuncNode& node) {
        if (meter) ++meter->node_evals;
        switch (node.op) {
            case FuncOp::Const:
                return DyadicInterval(node.value);
            case FuncOp::Var:
                return seeds[static_cast<std::size_t>(node.var_index)];
            default:
                break;
        }
        auto a = run(*node.a);
        if (!a) return std::nullopt;
        std::optional<DyadicInterval> b;
        if (node.b) {
            b = run(*node.b);
            if (!b) return std::nullopt;
        }
        std::int64_t q = p + 16;
        switch (node.op) {
            case FuncOp::Add: return (*a + *b).outward(q);
            case FuncOp::Sub: return (*a - *b).outward(q);
            case FuncOp::Mul: return (*a * *b).outward(q);
            case FuncOp::Neg: return -*a;
            case FuncOp::Abs: return interval_abs(*a);
            case FuncOp::Min: return interval_min(*a, *b);
            case FuncOp::Max: return interval_max(*a, *b);
            case FuncOp::Div: {
                if (b->lo.sign() <= 0 && b->hi.sign() >= 0) return std::nullopt;
                ExactRational lo1 = ExactRational(a->lo) / ExactRational(b->lo);
                ExactRational lo2 = ExactRational(a->lo) / ExactRational(b->hi);
                ExactRational hi1 = ExactRational(a->hi) / ExactRational(b->lo);
                ExactRational hi2 = ExactRational(a->hi) / ExactRational(b->hi);
                ExactRational lo = std::min(std::min(lo1, lo2), std::min(hi1, hi2));
                ExactRational hi = std::max(std::max(lo1, lo2), std::max(hi1, hi2));
                return DyadicInterval(lo.round_to_dyadic(q) - Dyadic::pow2(-q),
                                      hi.round_to_dyadic(q) + Dyadic::pow2(-q));
            }
            case FuncOp::Sqrt: {
                if (a->hi.sign() < 0) return std::nullopt;
                if (a->lo < -Dyadic::pow2(4 - q))
                    return std::nullopt;  // negative beyond rounding slack
                Dyadic lo = a->lo.sign() > 0 ? sqrt_dyadic_floor(a->lo, q) : Dyadic();
                Dyadic hi = sqrt_dyadic_floor(a->hi, q) + Dyadic::pow2(-q);
                return DyadicInterval(std::move(lo), std::move(hi));
            }
            case FuncOp::Exp: {
                if (abs(a->lo) > kExpRangeCap || abs(a->hi) > kExpRangeCap) return std::nullopt;
                Dyadic lo = exp_dyadic(a->lo, q) - Dyadic::pow2(-q);
                Dyadic hi = exp_dyadic(a->hi, q) + Dyadic::pow2(-q);
                return DyadicInterval(std::move(lo), std::move(hi));
            }
            default:
                throw Error("unreachable");
        }
    }
};

int max_var_index(const FuncNode& n) {
    if (n.op == FuncOp::Var) return n.var_index;
    int m = -1;
    if (n.a) m = std::max(m, max_var_index(*n.a));
    if (n.b) m = std::max(m, max_var_index(*n.b));
    return m;
}

using Mu = std::function<std::int64_t(std::int64_t)>;

// Smallest b with sup|hull| <= 2^b, or nullopt when the hull is exactly {0}.
std::optional<std::int64_t> sup_exponent(const DyadicInterval& hull) {
    Dyadic m = std::max(abs(hull.lo), abs(hull.hi));
    if (m.is_zero()) return std::nullopt;
    return m.ceil_log2_abs();
}

// Largest ell with 2^ell <= inf|hull|, for hulls excluding zero.
std::int64_t inf_exponent(const DyadicInterval& hull) {
    Dyadic m = hull.lo.sign() > 0 ? hull.lo : -hull.hi;
    std::int64_t e = m.ceil_log2_abs();
    if (Dyadic::pow2(e) > m) --e;
    return e;
}

Mu build_mu(const FuncNode& node, const std::map<const FuncNode*, DyadicInterval>& hulls) {
    switch (node.op) {
        case FuncOp::Const:
            return [](std::int64_t) { return std::int64_t(0); };
        case FuncOp::Var:
            return [](std::int64_t n) { return std::max<std::int64_t>(n, 0); };
        default:
            break;
    }
    Mu ma = build_mu(*node.a, hulls);
    Mu mb = node.b ? build_mu(*node.b, hulls) : Mu();
    switch (node.op) {
        case FuncOp::Neg:
        case FuncOp::Abs:
            return ma;
        case FuncOp::Add:
        case FuncOp::Sub:
            return [ma, mb](std::int64_t n) { return std::max(ma(n + 1), mb(n + 1)); };
        case FuncOp::Min:
        case FuncOp::Max:
            return [ma, mb](std::int64_t n) { return std::max(ma(n), mb(n)); };
        case FuncOp::Mul: {
            auto ba = sup_exponent(hulls.at(node.a.get()));
            auto bb = sup_exponent(hulls.at(node.b.get()));
            // |fg - f'g'| <= sup|f| |dg| + sup|g| |df|
            return [ma, mb, ba, bb](std::int64_t n) {
                std::int64_t r = 0;
                if (ba) r = std::max(r, mb(n + 1 + *ba));
                if (bb) r = std::max(r, ma(n + 1 + *bb));
                return r;
            };
        }
        case FuncOp::Div: {
            auto ba = sup_exponent(hulls.at(node.a.get()));
            std::int64_t ell = inf_exponent(hulls.at(node.b.get()));
            if (!ba) return [](std::int64_t) { return std::int64_t(0); };  // numerator is identically 0
            return [ma, mb, ba, ell](std::int64_t n) {
                return std::max(ma(n + 1 - ell), mb(n + 1 + *ba - 2 * ell));
            };
        }
        case FuncOp::Sqrt: {
            const auto& hull = hulls.at(node.a.get());
            if (hull.lo.sign() > 0) {
                std::int64_t ell = inf_exponent(hull);
                // |sqrt u - sqrt v| <= |u - v| / (2 sqrt(inf))
                std::int64_t shift = 1 + (ell >= 0 ? ell / 2 : (ell - 1) / 2);
                return [ma, shift](std::int64_t n) { return ma(n - shift); };
            }
            // inf may be 0: Hoelder-1/2 |sqrt u - sqrt v| <= sqrt|u - v|
            return [ma](std::int64_t n) { return ma(2 * std::max<std::int64_t>(n, 0)); };
        }
        case FuncOp::Exp: {
            const auto& hull = hulls.at(node.a.get());
            // Lipschitz e^sup <= 2^ceil(sup * 3/2) (log2 e < 3/2)
            Dyadic sup3 = std::max(hull.hi, Dyadic()) * Dyadic(3);
            long v = sup3.ceil_to(0).floor_scaled(0).get_si();
            std::int64_t c = (v + 1) / 2;
            return [ma, c](std::int64_t n) { return ma(n + c); };
        }
        default:
            throw Error("unreachable");
    }
}

}  // namespace

BitFunction BitFunction::make(FuncNodePtr root, Box domain) {
    if (!root) throw Error("empty expression");
    if (domain.dim() < 1 || domain.dim() > 2) throw DimensionMismatch();
    if (max_var_index(*root) >= domain.dim())
        throw DomainViolation("variable index outside domain dimension");

    // Sweep the domain; refine the subdivision until partial operations are
    // decided on every cell.
    std::map<const FuncNode*, DyadicInterval> hulls;
    bool ok = false;
    for (int s = 0; s <= 6 && !ok; ++s) {
        hulls.clear();
        ok = true;
        long cells = 1L << s;
        std::vector<DyadicInterval> seeds(static_cast<std::size_t>(domain.dim()));
        std::vector<long> idx(static_cast<std::size_t>(domain.dim()), 0);
        while (true) {
            for (int d = 0; d < domain.dim(); ++d) {
                const auto& side = domain[d];
                Dyadic w = side.width();
                Dyadic lo = side.lo + w * Dyadic(idx[static_cast<std::size_t>(d)]).mul_pow2(-s);
                Dyadic hi = side.lo + w * Dyadic(idx[static_cast<std::size_t>(d)] + 1).mul_pow2(-s);
                seeds[static_cast<std::size_t>(d)] = DyadicInterval(lo, hi);
            }
            IntervalEval ev{seeds, 24, nullptr, &hulls};
            if (!ev.run(*root)) {
                ok = false;
                break;
            }
            // advance the cell index
            int d = 0;
            for (; d < domain.dim(); ++d) {
                if (++idx[static_cast<std::size_t>(d)] < cells) break;
                idx[static_cast<std::size_t>(d)] = 0;
            }
            if (d == domain.dim()) break;
        }
    }
    if (!ok)
        throw DomainViolation(
            "partial operation (div/sqrt/exp) not defined on the declared domain");

    BitFunction f;
    f.root_ = std::move(root);
    f.arity_ = domain.dim();
    f.range_ = hulls.at(f.root_.get());
    f.mu_ = build_mu(*f.root_, hulls);
    f.domain_ = std::move(domain);
    return f;
}

Dyadic BitFunction::eval(std::span<const CReal> args, std::int64_t n, CostMeter* meter,
                         std::int64_t initial_precision) const {
    if (meter) meter->reset();
    if (static_cast<int>(args.size()) != arity_) throw DimensionMismatch();
    if (root_->op == FuncOp::Const) {
        if (meter) ++meter->node_evals;
        return root_->value;
    }
    if (root_->op == FuncOp::Var) {
        if (meter) {
            ++meter->node_evals;
            ++meter->oracle_queries;
            meter->max_precision = std::max(meter->max_precision, n);
        }
        return args[static_cast<std::size_t>(root_->var_index)].approx(n);
    }

    auto eval_at = [&](std::int64_t p) -> std::optional<DyadicInterval> {
        std::vector<DyadicInterval> seeds;
        seeds.reserve(args.size());
        for (const CReal& a : args) {
            Dyadic d = a.approx(p);
            if (meter) ++meter->oracle_queries;
            seeds.emplace_back(d - Dyadic::pow2(-p), d + Dyadic::pow2(-p));
        }
        if (meter) meter->max_precision = std::max(meter->max_precision, p);
        IntervalEval ev{seeds, p, meter, nullptr};
        return ev.run(*root_);
    };

    // Canonical refinement schedule: n + 4, n + 8, n + 16, ... The hint only
    // chooses where the search starts; the returned value is taken from the
    // first *canonical* success, so it does not depend on the hint.
    Dyadic target = Dyadic::pow2(-n);
    std::map<std::int64_t, std::optional<DyadicInterval>> cache;
    auto at = [&](std::int64_t p) -> const std::optional<DyadicInterval>& {
        auto it = cache.find(p);
        if (it == cache.end()) it = cache.emplace(p, eval_at(p)).first;
        return it->second;
    };

    std::int64_t start_off = 4;
    if (initial_precision > n + 4) {
        while (n + start_off < initial_precision) start_off *= 2;
    }
    std::int64_t hit = -1;
    for (std::int64_t off = start_off; n + off <= kMaxPrecision; off *= 2) {
        const auto& iv = at(n + off);
        if (iv && iv->width() <= target) {
            hit = n + off;
            break;
        }
    }
    if (hit < 0) throw PrecisionOverflow(kMaxPrecision);
    for (std::int64_t off = 4; n + off < hit; off *= 2) {
        const auto& iv = at(n + off);
        if (iv && iv->width() <= target) {
            hit = n + off;
            break;
        }
    }
    return at(hit)->mid().round_to(n + 1);
}

// --- expression grammar ---

namespace {

struct FuncParser {
    std::string_view s;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    void expect(char c) {
        if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos);
        ++pos;
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        return std::string(s.substr(start, pos - start));
    }

    Dyadic number() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '*' ||
                s[pos] == '^' || s[pos] == '/' ||
                ((s[pos] == '-' || s[pos] == '+') && pos > start && s[pos - 1] == '^')))
            ++pos;
        try {
            return Dyadic::parse(s.substr(start, pos - start));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), start);
        }
    }

    FuncNodePtr expr() {
        char c = peek();
        if (c == '\0') throw ParseError("unexpected end of expression", pos);
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+')
            return fn::constant(number());
        std::size_t at = pos;
        std::string id = ident();
        if (id.empty()) throw ParseError("expected expression", pos);
        if (id == "x") return fn::var(0);
        if (id == "y") return fn::var(1);
        expect('(');
        FuncNodePtr a = expr();
        FuncNodePtr result;
        if (id == "neg" || id == "abs" || id == "sqrt" || id == "exp") {
            if (id == "neg") result = fn::neg(std::move(a));
            else if (id == "abs") result = fn::abs(std::move(a));
            else if (id == "sqrt") result = fn::sqrt(std::move(a));
            else result = fn::exp(std::move(a));
        } else {
            expect(',');
            FuncNodePtr b = expr();
            if (id == "add") result = fn::add(std::move(a), std::move(b));
            else if (id == "sub") result = fn::sub(std::move(a), std::move(b));
            else if (id == "mul") result = fn::mul(std::move(a), std::move(b));
            else if (id == "div") result = fn::div(std::move(a), std::move(b));
            else if (id == "min") result = fn::min(std::move(a), std::move(b));
            else if (id == "max") result = fn::max(std::move(a), std::move(b));
            else throw ParseError("unknown operator '" + id + "'", at);
        }
        expect(')');
        return result;
    }
};

}  // namespace

BitFunction BitFunction::parse(std::string_view text, Box domain) {
    FuncParser p{text};
    FuncNodePtr root = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing characters in expression", p.pos);
    return make(std::move(root), std::move(domain));
}

FuncNodePtr parse_func_node(std::string_view text, std::size_t& pos) {
    FuncParser p{text, pos};
    FuncNodePtr root = p.expr();
    pos = p.pos;
    return root;
}

}  // namespace realbits
