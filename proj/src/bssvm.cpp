#include "realbits/bssvm.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "realbits/error.hpp"

namespace realbits {

namespace {

constexpr int kMaxRegisters = 64;

struct LineLexer {
    std::string_view s;
    std::size_t pos = 0;
    std::size_t line;

    explicit LineLexer(std::string_view text, std::size_t lineno) : s(text), line(lineno) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size();
    }
    std::string token() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) throw ParseError("expected operand", line, start + 1);
        return std::string(s.substr(start, pos - start));
    }
};

int parse_register(const std::string& tok, std::size_t line) {
    if (tok.size() < 2 || (tok[0] != 'r' && tok[0] != 'R'))
        throw ParseError("expected register, got '" + tok + "'", line, 1);
    int v = 0;
    for (std::size_t i = 1; i < tok.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(tok[i])))
            throw ParseError("bad register '" + tok + "'", line, 1);
        v = v * 10 + (tok[i] - '0');
        if (v >= kMaxRegisters) throw ParseError("register index too large", line, 1);
    }
    return v;
}

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

// Must-initialization dataflow: a register may be read only if it is written
// on every path from entry.
void check_initialization(const BssProgram& prog) {
    const auto& code = prog.code;
    std::size_t n = code.size();
    std::vector<std::uint64_t> in(n, ~0ULL), out(n, ~0ULL);
    auto reads = [](const BssInstr& i) -> std::uint64_t {
        std::uint64_t r = 0;
        switch (i.op) {
            case BssOp::Mov: r |= 1ULL << i.a; break;
            case BssOp::Add:
            case BssOp::Sub:
            case BssOp::Mul:
            case BssOp::Div: r |= (1ULL << i.a) | (1ULL << i.b); break;
            case BssOp::Jgez:
            case BssOp::Out: r |= 1ULL << i.a; break;
            default: break;
        }
        return r;
    };
    auto writes = [](const BssInstr& i) -> std::uint64_t {
        switch (i.op) {
            case BssOp::Const:
            case BssOp::Input:
            case BssOp::Mov:
            case BssOp::Add:
            case BssOp::Sub:
            case BssOp::Mul:
            case BssOp::Div: return 1ULL << i.dst;
            default: return 0;
        }
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t newin = 0;
            // meet over predecessors: fallthrough from i-1 (unless JMP/HALT)
            // plus jumps targeting i
            if (i > 0) {
                std::uint64_t m = ~0ULL;
                bool any = false;
                const BssInstr& prev = code[i - 1];
                if (prev.op != BssOp::Jmp && prev.op != BssOp::Halt) {
                    m &= out[i - 1];
                    any = true;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    if ((code[j].op == BssOp::Jmp || code[j].op == BssOp::Jgez) &&
                        code[j].target == static_cast<int>(i)) {
                        m &= out[j];
                        any = true;
                    }
                }
                newin = any ? m : ~0ULL;  // unreachable: vacuously initialized
            }
            // the entry edge carries nothing, so in[0] stays 0
            std::uint64_t newout = newin | writes(code[i]);
            if (newin != in[i] || newout != out[i]) {
                in[i] = newin;
                out[i] = newout;
                changed = true;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t need = reads(code[i]);
        if ((need & in[i]) != need)
            throw ParseError("register read before initialization", code[i].line, 1);
    }
}

}  // namespace

BssProgram BssProgram::parse(std::string_view text) {
    BssProgram prog;
    std::map<std::string, int> labels;
    // label references in program order of JMP/JGEZ, resolved after parsing
    std::vector<std::pair<std::string, std::size_t>> pending;

    std::istringstream is{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        LineLexer lex(line, lineno);
        if (lex.done()) continue;
        std::string first = lex.token();
        if (first.size() > 1 && first.back() == ':') {
            std::string name = first.substr(0, first.size() - 1);
            if (labels.count(name)) throw ParseError("duplicate label '" + name + "'", lineno, 1);
            labels[name] = static_cast<int>(prog.code.size());
            if (lex.done()) continue;
            first = lex.token();
        }
        BssInstr ins;
        ins.line = lineno;
        std::string op = upper(first);
        auto reg = [&] { return parse_register(lex.token(), lineno); };
        auto label_ref = [&] { pending.emplace_back(lex.token(), lineno); };
        if (op == "CONST") {
            ins.op = BssOp::Const;
            ins.dst = reg();
            std::string val = lex.token();
            if (val == "e") {
                ins.ckind = BssConstKind::E;
                prog.uses_named_constants = true;
            } else if (val == "sqrt2") {
                ins.ckind = BssConstKind::Sqrt2;
                prog.uses_named_constants = true;
            } else {
                try {
                    ins.literal = Dyadic::parse(val);
                } catch (const ParseError&) {
                    throw ParseError("bad constant '" + val + "'", lineno, 1);
                }
            }
        } else if (op == "INPUT") {
            ins.op = BssOp::Input;
            ins.dst = reg();
            std::string idx = lex.token();
            try {
                ins.input_index = std::stoi(idx);
            } catch (...) {
                throw ParseError("bad input index '" + idx + "'", lineno, 1);
            }
            if (ins.input_index < 0 || ins.input_index > 255)
                throw ParseError("input index out of range", lineno, 1);
            prog.input_count = std::max(prog.input_count, ins.input_index + 1);
        } else if (op == "MOV") {
            ins.op = BssOp::Mov;
            ins.dst = reg();
            ins.a = reg();
        } else if (op == "ADD" || op == "SUB" || op == "MUL" || op == "DIV") {
            ins.op = op == "ADD" ? BssOp::Add
                     : op == "SUB" ? BssOp::Sub
                     : op == "MUL" ? BssOp::Mul : BssOp::Div;
            ins.dst = reg();
            ins.a = reg();
            ins.b = reg();
        } else if (op == "JGEZ") {
            ins.op = BssOp::Jgez;
            ins.a = reg();
            label_ref();
        } else if (op == "JMP") {
            ins.op = BssOp::Jmp;
            label_ref();
        } else if (op == "OUT") {
            ins.op = BssOp::Out;
            ins.a = reg();
        } else if (op == "HALT") {
            ins.op = BssOp::Halt;
        } else {
            throw ParseError("unknown instruction '" + first + "'", lineno, 1);
        }
        if (!lex.done()) throw ParseError("trailing tokens", lineno, lex.pos + 1);
        prog.code.push_back(ins);
    }

    if (prog.code.empty()) throw ParseError("empty program", lineno, 1);
    std::size_t ref = 0;
    for (auto& ins : prog.code) {
        if (ins.op == BssOp::Jmp || ins.op == BssOp::Jgez) {
            const auto& [name, line] = pending[ref++];
            auto it = labels.find(name);
            if (it == labels.end())
                throw ParseError("unresolved label '" + name + "'", line, 1);
            ins.target = it->second;
        }
    }

    for (const auto& ins : prog.code) {
        int regs[] = {ins.dst, ins.a, ins.b};
        for (int r : regs)
            if (r >= 0) prog.register_count = std::max(prog.register_count, r + 1);
    }
    const BssInstr& last = prog.code.back();
    if (last.op != BssOp::Halt && last.op != BssOp::Jmp)
        throw ParseError("control falls off the end of the program", last.line, 1);
    bool has_halt = false;
    for (const auto& ins : prog.code) has_halt |= ins.op == BssOp::Halt;
    if (!has_halt) throw ParseError("program has no HALT", prog.code.back().line, 1);

    check_initialization(prog);
    return prog;
}

namespace {

struct PathState {
    int pc = 0;
    std::vector<ExactRational> regs;
    std::vector<ExactRational> outputs;
    long steps = 0;
};

ExactRational round_if(const ExactRational& v, const RunMode& mode) {
    if (!mode.rounded) return v;
    return ExactRational(v.round_to_dyadic(mode.round_p));
}

}  // namespace

RunOutcome bss_run(const BssProgram& prog, const std::vector<Dyadic>& inputs,
                   const RunMode& mode, long fuel) {
    if (static_cast<int>(inputs.size()) < prog.input_count)
        throw VmError("program expects " + std::to_string(prog.input_count) + " inputs");
    if (prog.uses_named_constants && !(mode.allow_named_constants && mode.rounded))
        throw VmError("named constants are not finitely given; this mode requires dyadic constants");

    ExactRational fuzz_band = mode.fuzzy ? ExactRational(Dyadic::pow2(-mode.fuzzy_p))
                                         : ExactRational(0);

    RunOutcome outcome;
    std::vector<PathState> stack;
    PathState init;
    init.regs.assign(static_cast<std::size_t>(prog.register_count), ExactRational(0));
    stack.push_back(std::move(init));
    long budget = kBranchBudget;

    while (!stack.empty()) {
        PathState st = std::move(stack.back());
        stack.pop_back();
        bool done = false;
        while (!done) {
            if (st.steps >= fuel) {
                ++outcome.diverged_paths;
                outcome.max_trace = std::max(outcome.max_trace, st.steps);
                break;
            }
            const BssInstr& ins = prog.code[static_cast<std::size_t>(st.pc)];
            ++st.steps;
            int next = st.pc + 1;
            switch (ins.op) {
                case BssOp::Const: {
                    ExactRational v;
                    switch (ins.ckind) {
                        case BssConstKind::Literal: v = ExactRational(ins.literal); break;
                        case BssConstKind::E:
                            v = ExactRational(CReal::e().approx(mode.round_p).round_to(mode.round_p));
                            break;
                        case BssConstKind::Sqrt2:
                            v = ExactRational(
                                CReal::sqrt2().approx(mode.round_p).round_to(mode.round_p));
                            break;
                    }
                    st.regs[static_cast<std::size_t>(ins.dst)] = std::move(v);
                    break;
                }
                case BssOp::Input:
                    st.regs[static_cast<std::size_t>(ins.dst)] =
                        ExactRational(inputs[static_cast<std::size_t>(ins.input_index)]);
                    break;
                case BssOp::Mov:
                    st.regs[static_cast<std::size_t>(ins.dst)] = st.regs[static_cast<std::size_t>(ins.a)];
                    break;
                case BssOp::Add:
                case BssOp::Sub:
                case BssOp::Mul:
                case BssOp::Div: {
                    const ExactRational& a = st.regs[static_cast<std::size_t>(ins.a)];
                    const ExactRational& b = st.regs[static_cast<std::size_t>(ins.b)];
                    ExactRational v;
                    switch (ins.op) {
                        case BssOp::Add: v = a + b; break;
                        case BssOp::Sub: v = a - b; break;
                        case BssOp::Mul: v = a * b; break;
                        default:
                            if (b.is_zero()) throw DivisionByZero();
                            v = a / b;
                    }
                    st.regs[static_cast<std::size_t>(ins.dst)] = round_if(v, mode);
                    break;
                }
                case BssOp::Jgez: {
                    const ExactRational& v = st.regs[static_cast<std::size_t>(ins.a)];
                    bool unreliable = mode.fuzzy && ExactRational::cmp(abs(v), fuzz_band) < 0;
                    if (!unreliable) {
                        if (v.sign() >= 0) next = ins.target;
                    } else
                        switch (mode.policy) {
                            case FuzzyPolicy::Take:
                                next = ins.target;
                                break;
                            case FuzzyPolicy::Skip:
                                break;
                            case FuzzyPolicy::Explore: {
                                if (--budget <= 0) throw FuelExhausted();
                                PathState fork = st;
                                fork.pc = ins.target;
                                stack.push_back(std::move(fork));
                                break;
                            }
                        }
                    break;
                }
                case BssOp::Jmp:
                    next = ins.target;
                    break;
                case BssOp::Out:
                    st.outputs.push_back(st.regs[static_cast<std::size_t>(ins.a)]);
                    break;
                case BssOp::Halt:
                    outcome.outputs.push_back(st.outputs);
                    outcome.max_trace = std::max(outcome.max_trace, st.steps);
                    done = true;
                    break;
            }
            st.pc = next;
        }
        ++outcome.paths;
    }

    auto less = [](const std::vector<ExactRational>& a, const std::vector<ExactRational>& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        for (std::size_t i = 0; i < a.size(); ++i) {
            int c = ExactRational::cmp(a[i], b[i]);
            if (c != 0) return c < 0;
        }
        return false;
    };
    std::sort(outcome.outputs.begin(), outcome.outputs.end(), less);
    outcome.outputs.erase(std::unique(outcome.outputs.begin(), outcome.outputs.end()),
                          outcome.outputs.end());
    return outcome;
}

Dyadic bss_to_bitfunc(const BssProgram& prog, const CReal& input, std::int64_t n,
                      std::int64_t max_p, long fuel) {
    if (prog.input_count > 1) throw VmError("stabilization expects a single-input program");
    bool saw_divergence = false;
    for (std::int64_t off = 4; n + off <= max_p; off *= 2) {
        std::int64_t p = n + off;
        Dyadic d = input.approx(p);
        RunOutcome out = bss_run(prog, {d}, RunMode::modified(p), fuel);
        saw_divergence = out.diverged_paths > 0;
        if (saw_divergence) continue;
        if (out.outputs.empty()) throw VmError("no completed path");
        ExactRational first;
        bool stable = true;
        ExactRational tol(Dyadic::pow2(-(n + 1)));
        for (std::size_t i = 0; i < out.outputs.size() && stable; ++i) {
            if (out.outputs[i].size() != 1)
                throw VmError("stabilization expects exactly one output per path");
            if (i == 0)
                first = out.outputs[i][0];
            else
                stable = ExactRational::cmp(abs(out.outputs[i][0] - first), tol) <= 0;
        }
        if (stable) return first.round_to_dyadic(n);
    }
    if (saw_divergence) throw FuelExhausted();
    throw NotStablyConvergent();
}

}  // namespace realbits
