#pragma once

#include <vector>

#include "realbits/sets.hpp"

namespace realbits {

/// One affine contraction x -> L x + t with dyadic coefficients.
struct IfsMap {
    std::vector<Dyadic> lin;  // row-major, dim x dim
    std::vector<Dyadic> off;
};

/// Finite contraction family whose attractor is rendered through the pixel
/// oracle. Construction verifies, exactly: 0 < rho < 1, every map has
/// operator norm at most rho, every map sends the bounding box into itself,
/// and the seed lies in the box.
struct IfsSystem {
    std::vector<IfsMap> maps;
    Dyadic contraction;  // rho
    Point seed;
    Box bounds;

    static IfsSystem make(std::vector<IfsMap> maps, Dyadic rho, Point seed, Box bounds);
    int dim() const { return seed.dim(); }
};

/// Right-triangle gasket: maps x/2, x/2 + (1/2, 0), x/2 + (0, 1/2) on
/// [0,1]^2, seed at the origin.
IfsSystem sierpinski();

/// Pixel oracle for the attractor. query(d, n) picks the minimal depth m with
/// diam(bounds) rho^m <= 2^-(n+2), and answers In iff some depth-m orbit point
/// of the seed, snapped to the 2^-(n+3) grid, lies within (3/2) 2^-n of d.
/// The orbit is enumerated with exact branch-and-bound pruning, so the answer
/// equals the full-orbit rule without materializing it.
ComputableSet ifs_attractor(IfsSystem sys);

namespace detail {
/// Reference evaluation of the attractor predicate in plain dyadic
/// arithmetic, for crosschecking the fixed-point engines.
bool ifs_query_exact(const IfsSystem& sys, const Point& d, std::int64_t n);
}  // namespace detail

}  // namespace realbits
