// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 celltrack contributors

#include "celltrack/assignment.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace celltrack {

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
    const std::size_t rows = weights.size();
    const std::size_t cols = rows ? weights.front().size() : 0;
    std::vector<int> result(rows, -1);
    if (rows == 0 || cols == 0) return result;
    const std::size_t n = std::max(rows, cols);
    double max_w = 0.0;
    for (const auto& r : weights) {
        for (double w : r) max_w = std::max(max_w, w);
    }
    // Square min-cost problem; padding rows/cols cost max_w (weight 0).
    auto cost = [&](std::size_t i, std::size_t j) {
        if (i < rows && j < cols) return max_w - weights[i][j];
        return max_w;
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = p[j];
        if (i == 0 || i > rows || j > cols) continue;
        if (weights[i - 1][j - 1] > 0.0) result[i - 1] = static_cast<int>(j - 1);
    }
    return result;
}

std::vector<WeightedPair> max_weight_matching(std::span<const WeightedPair> pairs) {
    std::vector<WeightedPair> out;
    if (pairs.empty()) return out;
    // Union-find over rows and columns (columns offset past the largest row).
    std::size_t max_row = 0;
    for (const auto& e : pairs) max_row = std::max(max_row, e.row);
    std::map<std::size_t, std::size_t> node_of;  // row r -> r, col c -> max_row + 1 + c
    std::vector<std::size_t> parent;
    auto node = [&](std::size_t key) {
        auto [it, inserted] = node_of.emplace(key, parent.size());
        if (inserted) parent.push_back(parent.size());
        return it->second;
    };
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::pair<std::size_t, std::size_t>> ends;
    ends.reserve(pairs.size());
    for (const auto& e : pairs) {
        const std::size_t a = node(e.row);
        const std::size_t b = node(max_row + 1 + e.col);
        ends.emplace_back(a, b);
    }
    for (const auto& [a, b] : ends) parent[find(a)] = find(b);

    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t k = 0; k < pairs.size(); ++k) components[find(ends[k].first)].push_back(k);

    for (const auto& [root, members] : components) {
        if (members.size() == 1) {
            out.push_back(pairs[members.front()]);
            continue;
        }
        std::vector<std::size_t> rows, cols;
        for (std::size_t k : members) {
            rows.push_back(pairs[k].row);
            cols.push_back(pairs[k].col);
        }
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        std::vector<std::vector<double>> w(rows.size(), std::vector<double>(cols.size(), 0.0));
        for (std::size_t k : members) {
            const auto r = std::lower_bound(rows.begin(), rows.end(), pairs[k].row) - rows.begin();
            const auto c = std::lower_bound(cols.begin(), cols.end(), pairs[k].col) - cols.begin();
            w[r][c] = std::max(w[r][c], pairs[k].weight);
        }
        const auto assign = max_weight_assignment(w);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (assign[r] >= 0) out.push_back({rows[r], cols[static_cast<std::size_t>(assign[r])], w[r][assign[r]]});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
    return out;
}

}  // namespace celltrack
