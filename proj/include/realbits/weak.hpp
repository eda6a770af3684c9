#pragma once

#include <functional>

#include "realbits/cloud.hpp"
#include "realbits/sets.hpp"

namespace realbits {

/// Uniform machine producing, for each n, a finite dyadic cloud within
/// Hausdorff distance 2^-n of the target set. Clouds are memoized per n.
class CloudGenerator {
  public:
    CloudGenerator(int dim, Box box, std::function<DyadicCloud(std::int64_t)> make);

    const DyadicCloud& at(std::int64_t n) const;
    int dim() const { return dim_; }
    const Box& box() const { return box_; }

  private:
    struct State;
    int dim_;
    Box box_;
    std::shared_ptr<State> state_;
};

/// Scans the aligned 2^-(n+2) grid over box and keeps the points the oracle
/// accepts at precision n+2; the result certifies 2^-n. Throws EmptyCloud if
/// the oracle accepts nothing (upstream contract violation).
DyadicCloud cloud_from_oracle(const ComputableSet& s, const Box& box, std::int64_t n,
                              unsigned threads = 1);

/// Pixel oracle from a cloud generator: query(d, n) fetches the cloud at
/// n+2 and answers In iff dist(d, cloud) <= (3/2) 2^-n, decided exactly.
ComputableSet oracle_from_cloud(CloudGenerator gen);

}  // namespace realbits
