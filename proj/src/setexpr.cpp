#include "realbits/setexpr.hpp"

#include <cctype>

#include "realbits/error.hpp"

namespace realbits {

namespace {

struct SetParser {
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
        if (start == pos) throw ParseError("expected constructor name", pos);
        return std::string(s.substr(start, pos - start));
    }
    Dyadic number() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '*' ||
                s[pos] == '^' || s[pos] == '/' ||
                ((s[pos] == '-' || s[pos] == '+') && s[pos - 1] == '^')))
            ++pos;
        try {
            return Dyadic::parse(s.substr(start, pos - start));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), start);
        }
    }
    Dyadic arg() {
        expect(',');
        return number();
    }

    GraphFunction graph_expr(const std::string& id) {
        if (id == "stepgraph") {
            expect('(');
            expect(')');
            return GraphFunction::step();
        }
        if (id == "sqrtgraph") {
            expect('(');
            expect(')');
            return GraphFunction::sqrt_multivalued();
        }
        if (id == "graph") {
            expect('(');
            skip_ws();
            FuncNodePtr node = parse_func_node(s, pos);
            Dyadic lo = arg(), hi = arg();
            expect(')');
            BitFunction f = BitFunction::make(std::move(node), Box(DyadicInterval{lo, hi}));
            return GraphFunction::from_bitfunc(f);
        }
        throw ParseError("unknown graph constructor '" + id + "'", pos);
    }

    ComputableSet set_expr() {
        std::size_t at = pos;
        std::string id = ident();
        if (id == "point") {
            expect('(');
            Dyadic x = number(), y = arg();
            expect(')');
            return set_primitive(PrimitiveShape::point(Point(x, y)));
        }
        if (id == "segment") {
            expect('(');
            Dyadic x1 = number(), y1 = arg(), x2 = arg(), y2 = arg();
            expect(')');
            return set_primitive(PrimitiveShape::segment(Point(x1, y1), Point(x2, y2)));
        }
        if (id == "box") {
            expect('(');
            Dyadic x1 = number(), y1 = arg(), x2 = arg(), y2 = arg();
            expect(')');
            return set_primitive(
                PrimitiveShape::box(Box(DyadicInterval{x1, x2}, DyadicInterval{y1, y2})));
        }
        if (id == "disk") {
            expect('(');
            Dyadic cx = number(), cy = arg(), r = arg();
            expect(')');
            return set_primitive(PrimitiveShape::disk(Point(cx, cy), r));
        }
        if (id == "union") {
            expect('(');
            ComputableSet a = set_expr();
            expect(',');
            ComputableSet b = set_expr();
            expect(')');
            return set_union(a, b);
        }
        if (id == "affine") {
            expect('(');
            ComputableSet e = set_expr();
            Dyadic a = arg(), b = arg(), c = arg(), d = arg(), tx = arg(), ty = arg();
            expect(')');
            return set_affine(e, AffineMap::make({a, b, c, d}, {tx, ty}));
        }
        if (id == "sierpinski") {
            expect('(');
            expect(')');
            return ifs_attractor(sierpinski());
        }
        if (id == "graph" || id == "stepgraph" || id == "sqrtgraph")
            return graph_expr(id).graph();
        throw ParseError("unknown set constructor '" + id + "'", at);
    }
};

}  // namespace

ComputableSet parse_set(std::string_view text) {
    SetParser p{text};
    ComputableSet s = p.set_expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing characters in set expression", p.pos);
    return s;
}

GraphFunction parse_graph(std::string_view text) {
    SetParser p{text};
    std::string id = p.ident();
    GraphFunction g = p.graph_expr(id);
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing characters in graph expression", p.pos);
    return g;
}

}  // namespace realbits
