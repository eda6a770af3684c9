#pragma once

#include "realbits/bitfunc.hpp"
#include "realbits/weak.hpp"

namespace realbits {

/// Samples the graph of a continuous 1-variable function on an x-grid fine
/// enough (via the modulus of continuity) that the result is within
/// Hausdorff distance 2^-n of the true graph.
DyadicCloud graph_cloud(const BitFunction& f, std::int64_t n);

/// The graph of f as a computable subset of the plane.
ComputableSet graph_set(const BitFunction& f);

/// A possibly multivalued function represented by its closed graph. eval()
/// slices the graph over a 2^-(n+2) y-grid: every true value lies within
/// 2^-(n+2) of a returned cluster, and every cluster point is near a graph
/// point whose x is within the 2^-(n+1) slab around the query.
class GraphFunction {
  public:
    GraphFunction(ComputableSet graph, DyadicInterval domain, DyadicInterval range);

    static GraphFunction from_bitfunc(const BitFunction& f);
    /// Closure of the step 1{x >= 0} on [-1,1]: both (0,0) and (0,1) are in
    /// the graph. Built from exact segment primitives.
    static GraphFunction step();
    /// Both square roots over [0,1]: the curve {(t^2, t) : t in [-1,1]},
    /// from exactly-on-curve dyadic sample clouds.
    static GraphFunction sqrt_multivalued();

    const ComputableSet& graph() const { return graph_; }
    const DyadicInterval& domain() const { return domain_; }
    const DyadicInterval& range() const { return range_; }

    /// Maximal runs of accepted y-grid points, as closed intervals in
    /// increasing y order. Throws EmptyResult if nothing is accepted.
    std::vector<DyadicInterval> eval(const Dyadic& x, std::int64_t n) const;

  private:
    ComputableSet graph_;
    DyadicInterval domain_, range_;
};

}  // namespace realbits
