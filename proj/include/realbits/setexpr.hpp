#pragma once

#include <string_view>

#include "realbits/graphfn.hpp"
#include "realbits/ifs.hpp"
#include "realbits/sets.hpp"

namespace realbits {

/// Grammar:
///   e := point(x,y) | segment(x1,y1,x2,y2) | box(x1,y1,x2,y2)
///      | disk(cx,cy,r) | union(e,e) | affine(e, a,b,c,d,tx,ty)
///      | sierpinski() | graph(FUNC, lo, hi) | stepgraph() | sqrtgraph()
/// Numbers in dyadic or power-of-two fraction text; FUNC in the expression
/// grammar of BitFunction::parse. affine applies (x,y) -> (ax+by+tx, cx+dy+ty).
ComputableSet parse_set(std::string_view text);

/// Accepts the graph-valued subset of the grammar: stepgraph(), sqrtgraph(),
/// graph(FUNC, lo, hi).
GraphFunction parse_graph(std::string_view text);

}  // namespace realbits
