#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "realbits/creal.hpp"
#include "realbits/dyadic.hpp"

namespace realbits {

enum class BssOp { Const, Input, Mov, Add, Sub, Mul, Div, Jgez, Jmp, Out, Halt };

enum class BssConstKind { Literal, E, Sqrt2 };

struct BssInstr {
    BssOp op;
    int dst = -1;
    int a = -1, b = -1;
    int target = -1;       // resolved jump target
    int input_index = -1;  // Input
    BssConstKind ckind = BssConstKind::Literal;
    Dyadic literal;
    std::size_t line = 0;
};

/// Register program over the reals. Parsing performs the static checks:
/// all jump labels resolve, every register is initialized on every path
/// before use, and control cannot fall off the end.
struct BssProgram {
    std::vector<BssInstr> code;
    int register_count = 0;
    int input_count = 0;
    bool uses_named_constants = false;

    /// One instruction per line, '#' comments, labels as "name:".
    /// Constants in dyadic/fraction text or the names e, sqrt2.
    static BssProgram parse(std::string_view text);
};

enum class FuzzyPolicy { Take, Skip, Explore };

/// Execution semantics toggles; the three modifications are orthogonal.
///   - exact(): infinite-precision field arithmetic and exact sign tests;
///     named (non-finite) constants are rejected.
///   - Rounded(p): every arithmetic result is rounded to the 2^-p grid
///     (division computes the exact rational first, then rounds).
///   - Fuzzy(p): JGEZ is unreliable when |operand| < 2^-p; the policy picks
///     the branch, or explores both.
struct RunMode {
    bool rounded = false;
    std::int64_t round_p = 0;
    bool fuzzy = false;
    std::int64_t fuzzy_p = 0;
    FuzzyPolicy policy = FuzzyPolicy::Take;
    bool allow_named_constants = false;

    static RunMode exact() { return {}; }
    static RunMode with_rounding(std::int64_t p) {
        RunMode m;
        m.rounded = true;
        m.round_p = p;
        m.allow_named_constants = true;
        return m;
    }
    static RunMode with_fuzz(std::int64_t p, FuzzyPolicy policy) {
        RunMode m;
        m.fuzzy = true;
        m.fuzzy_p = p;
        m.policy = policy;
        return m;
    }
    /// The named "modified BSS" bundle: computable constants only (named
    /// constants materialized at precision p), Rounded(p), Fuzzy(p, explore).
    static RunMode modified(std::int64_t p) {
        RunMode m = with_rounding(p);
        m.fuzzy = true;
        m.fuzzy_p = p;
        m.policy = FuzzyPolicy::Explore;
        return m;
    }
};

struct RunOutcome {
    /// Completed paths' output lists, sorted and deduplicated.
    std::vector<std::vector<ExactRational>> outputs;
    long diverged_paths = 0;  // paths that ran out of fuel
    long paths = 0;
    long max_trace = 0;  // longest instruction trace over paths
};

constexpr long kDefaultFuel = 1'000'000;
constexpr long kBranchBudget = 1L << 12;

RunOutcome bss_run(const BssProgram& prog, const std::vector<Dyadic>& inputs,
                   const RunMode& mode, long fuel = kDefaultFuel);

/// Stabilization: runs the program under Rounded(p) + Fuzzy(p, explore) on a
/// 2^-p approximation of the input, raising p along n+4, n+8, n+16, ... until
/// every explored outcome agrees within 2^-(n+1); returns the first outcome
/// rounded to the 2^-n grid. Throws NotStablyConvergent when max_p is
/// exhausted (the expected signal at a discontinuity), FuelExhausted if paths
/// kept diverging instead.
Dyadic bss_to_bitfunc(const BssProgram& prog, const CReal& input, std::int64_t n,
                      std::int64_t max_p = 256, long fuel = kDefaultFuel);

}  // namespace realbits
