#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "realbits/bssvm.hpp"
#include "realbits/error.hpp"
#include "realbits/setexpr.hpp"

using namespace realbits;

namespace {

Box parse_box(const std::string& text) {
    std::vector<Dyadic> v;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string field =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        v.push_back(Dyadic::parse(field));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (v.size() != 4) throw ParseError("--box expects x_min,y_min,x_max,y_max", 0);
    return Box(DyadicInterval{v[0], v[2]}, DyadicInterval{v[1], v[3]});
}

RunMode parse_mode(const std::string& text) {
    auto split = [&] {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t colon = text.find(':', start);
            parts.push_back(text.substr(
                start, colon == std::string::npos ? std::string::npos : colon - start));
            if (colon == std::string::npos) break;
            start = colon + 1;
        }
        return parts;
    };
    std::vector<std::string> parts = split();
    auto precision = [&](std::size_t i) {
        if (parts.size() <= i) throw ParseError("mode needs a precision", 0);
        return static_cast<std::int64_t>(std::stoll(parts[i]));
    };
    if (parts[0] == "exact") return RunMode::exact();
    if (parts[0] == "rounded") return RunMode::with_rounding(precision(1));
    if (parts[0] == "modified") return RunMode::modified(precision(1));
    if (parts[0] == "fuzzy") {
        if (parts.size() != 3) throw ParseError("fuzzy mode is fuzzy:P:take|skip|explore", 0);
        FuzzyPolicy pol;
        if (parts[2] == "take") pol = FuzzyPolicy::Take;
        else if (parts[2] == "skip") pol = FuzzyPolicy::Skip;
        else if (parts[2] == "explore") pol = FuzzyPolicy::Explore;
        else throw ParseError("unknown fuzzy policy '" + parts[2] + "'", 0);
        return RunMode::with_fuzz(precision(1), pol);
    }
    throw ParseError("unknown mode '" + parts[0] + "'", 0);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string rational_text(const ExactRational& v) { return v.str(); }

int dispatch(int argc, char** argv) {
    CLI::App app{
        "Computable-analysis toolkit: pixel-oracle sets, dyadic clouds, graph "
        "functions and BSS machines with exact arithmetic"};
    app.require_subcommand(1);

    // render
    auto* render_cmd = app.add_subcommand("render", "Rasterize a set expression to a PBM file");
    std::string set_text, box_text, out_path;
    std::int64_t n = 3;
    unsigned threads = 4;
    render_cmd->add_option("--set", set_text, "set expression")->required();
    render_cmd->add_option("--box", box_text,
                           "viewport x_min,y_min,x_max,y_max (origin bottom-left)")
        ->required();
    render_cmd->add_option("--n", n, "precision (pixel size 2^-n, n <= 16)")->required();
    render_cmd->add_option("--out", out_path, "output PBM path")->required();
    render_cmd->add_option("--threads", threads, "row-parallelism degree (output-invariant)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a function expression at a point");
    std::string expr_text, x_text;
    eval_cmd->add_option("--expr", expr_text, "expression over x")->required();
    eval_cmd->add_option("--x", x_text, "argument in dyadic/fraction text")->required();
    eval_cmd->add_option("--n", n, "output accuracy 2^-n")->required();

    // graph-eval
    auto* geval_cmd = app.add_subcommand("graph-eval", "Slice a graph function at x");
    geval_cmd->add_option("--set", set_text, "stepgraph() | sqrtgraph() | graph(F, lo, hi)")
        ->required();
    geval_cmd->add_option("--x", x_text, "slice abscissa")->required();
    geval_cmd->add_option("--n", n, "cluster resolution 2^-n")->required();

    // weak
    auto* weak_cmd = app.add_subcommand("weak", "Dyadic cloud of a set (CSV)");
    weak_cmd->add_option("--set", set_text, "set expression")->required();
    weak_cmd->add_option("--box", box_text, "scan box")->required();
    weak_cmd->add_option("--n", n, "Hausdorff certificate 2^-n")->required();
    weak_cmd->add_option("--out", out_path, "output CSV path (default stdout)");
    weak_cmd->add_option("--threads", threads, "scan parallelism");

    // hausdorff
    auto* h_cmd = app.add_subcommand("hausdorff", "Exact squared Hausdorff distance of two CSVs");
    std::string csv_a, csv_b;
    h_cmd->add_option("a", csv_a, "first cloud CSV")->required();
    h_cmd->add_option("b", csv_b, "second cloud CSV")->required();

    // certify
    auto* cert_cmd = app.add_subcommand(
        "certify", "Recompute a cloud certificate against a finer reference cloud");
    std::string cloud_path;
    cert_cmd->add_option("--set", set_text, "set expression")->required();
    cert_cmd->add_option("--box", box_text, "scan box")->required();
    cert_cmd->add_option("--n", n, "certificate precision")->required();
    cert_cmd->add_option("--cloud", cloud_path, "cloud CSV to check (default: regenerate)");
    cert_cmd->add_option("--threads", threads, "scan parallelism");

    // bss
    auto* bss_cmd = app.add_subcommand("bss", "BSS register machine");
    bss_cmd->require_subcommand(1);
    auto* bss_run_cmd = bss_cmd->add_subcommand("run", "Run a program");
    std::string prog_path, mode_text = "exact";
    std::vector<std::string> input_texts;
    long fuel = kDefaultFuel;
    bss_run_cmd->add_option("file", prog_path, "assembly file")->required();
    bss_run_cmd->add_option("--mode", mode_text, "exact | rounded:P | fuzzy:P:POLICY | modified:P");
    bss_run_cmd->add_option("--input", input_texts, "program inputs (dyadic text)");
    bss_run_cmd->add_option("--fuel", fuel, "step budget per path");

    auto* bss_stab_cmd =
        bss_cmd->add_subcommand("stabilize", "Stabilized evaluation on a computable input");
    std::int64_t max_p = 256;
    bss_stab_cmd->add_option("file", prog_path, "assembly file")->required();
    bss_stab_cmd->add_option("--input", x_text, "input: dyadic text or e | sqrt2")->required();
    bss_stab_cmd->add_option("--n", n, "output accuracy 2^-n")->required();
    bss_stab_cmd->add_option("--max-p", max_p, "working precision cap");
    bss_stab_cmd->add_option("--fuel", fuel, "step budget per path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*render_cmd) {
        ComputableSet s = parse_set(set_text);
        PixelGrid g = raster(s, parse_box(box_text), n, threads);
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw Error("cannot write " + out_path);
        write_pbm(out, g);
        std::cout << "in=" << g.in_count << " out=" << (g.width * g.height - g.in_count)
                  << "\n";
        return 0;
    }
    if (*eval_cmd) {
        Dyadic x = Dyadic::parse(x_text);
        BitFunction f = BitFunction::parse(expr_text, Box(DyadicInterval{x, x}));
        std::cout << f.eval(CReal::constant(x), n).str() << "\n";
        return 0;
    }
    if (*geval_cmd) {
        GraphFunction g = parse_graph(set_text);
        for (const auto& cluster : g.eval(Dyadic::parse(x_text), n))
            std::cout << "[" << cluster.lo.str() << ", " << cluster.hi.str() << "]\n";
        return 0;
    }
    if (*weak_cmd) {
        ComputableSet s = parse_set(set_text);
        DyadicCloud cloud = cloud_from_oracle(s, parse_box(box_text), n, threads);
        if (out_path.empty()) {
            cloud.write_csv(std::cout);
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw Error("cannot write " + out_path);
            cloud.write_csv(out);
        }
        return 0;
    }
    if (*h_cmd) {
        std::ifstream a(csv_a), b(csv_b);
        if (!a) throw Error("cannot open " + csv_a);
        if (!b) throw Error("cannot open " + csv_b);
        DyadicCloud ca = DyadicCloud::read_csv(a, 0), cb = DyadicCloud::read_csv(b, 0);
        std::cout << rational_text(hausdorff_sq(ca, cb)) << "\n";
        return 0;
    }
    if (*cert_cmd) {
        ComputableSet s = parse_set(set_text);
        Box box = parse_box(box_text);
        DyadicCloud cloud = [&] {
            if (cloud_path.empty()) return cloud_from_oracle(s, box, n, threads);
            std::ifstream in(cloud_path);
            if (!in) throw Error("cannot open " + cloud_path);
            return DyadicCloud::read_csv(in, n);
        }();
        DyadicCloud reference = cloud_from_oracle(s, box, n + 4, threads);
        ExactRational h = hausdorff_sq(cloud, reference);
        std::cout << rational_text(h) << "\n";
        // d_H(cloud, S) <= sqrt(h) + 2^-(n+4) <= 2^-n iff h <= (15/16 2^-n)^2
        ExactRational limit = ExactRational(Dyadic(15).mul_pow2(-(n + 4)));
        bool ok = ExactRational::cmp(h, limit * limit) <= 0;
        std::cout << (ok ? "certified" : "not-proven") << " n=" << n << "\n";
        return 0;
    }
    if (*bss_run_cmd) {
        BssProgram prog = BssProgram::parse(read_file(prog_path));
        RunMode mode = parse_mode(mode_text);
        std::vector<Dyadic> inputs;
        for (const auto& t : input_texts) inputs.push_back(Dyadic::parse(t));
        RunOutcome out = bss_run(prog, inputs, mode, fuel);
        for (const auto& vec : out.outputs) {
            for (std::size_t i = 0; i < vec.size(); ++i) {
                if (i) std::cout << " ";
                std::cout << rational_text(vec[i]);
            }
            std::cout << "\n";
        }
        if (out.diverged_paths > 0) std::cout << "diverged=" << out.diverged_paths << "\n";
        if (out.outputs.empty() && out.diverged_paths > 0) throw FuelExhausted();
        return 0;
    }
    if (*bss_stab_cmd) {
        BssProgram prog = BssProgram::parse(read_file(prog_path));
        CReal input = x_text == "e"       ? CReal::e()
                      : x_text == "sqrt2" ? CReal::sqrt2()
                                          : CReal::constant(Dyadic::parse(x_text));
        std::cout << bss_to_bitfunc(prog, input, n, max_p, fuel).str() << "\n";
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const NotStablyConvergent& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonInvertibleMap& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const VmError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const EmptyCloud& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ViewportEmpty& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
