// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace celltrack {

// Dense maximum-weight bipartite matching (Kuhn-Munkres). `weights` is
// rows x cols with non-negative entries; zero means the pair may not be
// matched. Returns the matched column per row, or -1.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

struct WeightedPair {
    std::size_t row = 0;
    std::size_t col = 0;
    double weight = 0.0;  // must be > 0
};

// Sparse variant: splits the pair graph into connected components and solves
// each one densely. Result is sorted by row.
std::vector<WeightedPair> max_weight_matching(std::span<const WeightedPair> pairs);

}  // namespace celltrack
