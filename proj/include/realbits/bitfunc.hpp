#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "realbits/creal.hpp"
#include "realbits/interval.hpp"

namespace realbits {

/// Complexity accounting for one evaluation run.
struct CostMeter {
    std::int64_t oracle_queries = 0;
    std::int64_t max_precision = 0;
    std::int64_t node_evals = 0;

    void reset() { *this = CostMeter{}; }
};

enum class FuncOp { Const, Var, Add, Sub, Mul, Div, Neg, Abs, Min, Max, Sqrt, Exp };

struct FuncNode;
using FuncNodePtr = std::shared_ptr<const FuncNode>;

struct FuncNode {
    FuncOp op;
    Dyadic value;    // Const
    int var_index;   // Var
    FuncNodePtr a, b;
};

/// Parses one expression of the grammar below starting at text[pos],
/// advancing pos past it (used by the set-expression grammar).
FuncNodePtr parse_func_node(std::string_view text, std::size_t& pos);

namespace fn {
FuncNodePtr constant(Dyadic d);
FuncNodePtr var(int index = 0);
FuncNodePtr add(FuncNodePtr a, FuncNodePtr b);
FuncNodePtr sub(FuncNodePtr a, FuncNodePtr b);
FuncNodePtr mul(FuncNodePtr a, FuncNodePtr b);
FuncNodePtr div(FuncNodePtr a, FuncNodePtr b);
FuncNodePtr min(FuncNodePtr a, FuncNodePtr b);
FuncNodePtr max(FuncNodePtr a, FuncNodePtr b);
FuncNodePtr neg(FuncNodePtr a);
FuncNodePtr abs(FuncNodePtr a);
FuncNodePtr sqrt(FuncNodePtr a);
FuncNodePtr exp(FuncNodePtr a);
}  // namespace fn

/// A continuous expression over a declared box domain, carrying a modulus of
/// continuity mu with |x - x'|_inf <= 2^-mu(n)  =>  |f(x) - f(x')| <= 2^-n.
/// Construction sweeps the domain with interval arithmetic and rejects
/// expressions whose divisor can vanish or whose sqrt operand can go
/// negative on the domain.
class BitFunction {
  public:
    static BitFunction make(FuncNodePtr root, Box domain);

    /// Grammar: expr := const | x | (add|sub|mul|div|min|max)(expr, expr)
    ///               | (neg|abs|sqrt|exp)(expr)
    /// with const in dyadic or power-of-two fraction text.
    static BitFunction parse(std::string_view text, Box domain);

    int arity() const { return arity_; }
    const Box& domain() const { return domain_; }
    /// Certified enclosure of f over the domain.
    const DyadicInterval& range_enclosure() const { return range_; }
    std::int64_t modulus(std::int64_t n) const { return mu_(n); }
    const FuncNodePtr& root() const { return root_; }

    /// |result - f(x)| <= 2^-n. The answer does not depend on the initial
    /// working precision hint; the refinement schedule is canonical in n.
    Dyadic eval(std::span<const CReal> args, std::int64_t n, CostMeter* meter = nullptr,
                std::int64_t initial_precision = -1) const;
    Dyadic eval(const CReal& arg, std::int64_t n, CostMeter* meter = nullptr) const {
        return eval(std::span<const CReal>(&arg, 1), n, meter);
    }

  private:
    BitFunction() = default;

    FuncNodePtr root_;
    int arity_ = 0;
    Box domain_;
    DyadicInterval range_;
    std::function<std::int64_t(std::int64_t)> mu_;
};

}  // namespace realbits
