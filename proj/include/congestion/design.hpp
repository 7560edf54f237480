#pragma once

#include <vector>

namespace congestion {

// 0/1 feature vectors phi(a), one per action, all of the same dimension.
using FeatureSet = std::vector<std::vector<double>>;

struct DesignAllocation {
  std::vector<double> weights;  // lambda over actions
  double achieved_g = 0.0;      // max_a ||phi(a)||^2_{Sigma(lambda)^+}, in the span
  int span_rank = 0;
  bool tol_met = true;
};

// G-optimal design via Frank-Wolfe/Wynn iterations on the D-optimal
// objective, working in the span of the features (rank-deficient sets are
// common for routing-style action lists). By Kiefer-Wolfowitz the optimum of
// achieved_g equals the span rank. Iteration cap 1e5.
DesignAllocation g_optimal(const FeatureSet& features, double tol = 1e-3);

// Facility-cover exploration distribution: a greedy pass adds an action to
// the cover whenever it brings an uncovered facility; cover actions get mass
// 1/(2F), the remainder goes uniformly to the rest (or uniformly back over
// the cover when there is no rest). Guarantees P(f in a) >= 1/(2F) for every
// facility present in the action set.
std::vector<double> semi_bandit_exploration(const std::vector<std::vector<int>>& action_set,
                                            int num_facilities);

}  // namespace congestion
